#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "pvgr/ast.hpp"

namespace pvgr {

enum class ExprClass { Value, Comm, Reducible, Stuck };

ExprClass classify_expr(const ExprP& e);

// One expression-level step under the let-header evaluation context.
std::optional<ExprP> step_expr(const ExprP& e);
// Same, also naming the rule that fired.
std::optional<std::pair<ExprP, std::string>> step_expr_rule(const ExprP& e);

// The subexpression in evaluation position.
ExprP eval_head(const ExprP& e);

struct Binder {
  enum class Kind { Chan, Access } kind;
  Ident end1, end2;  // end2 unused for access points
  TypeP ses;         // from end1's point of view
  bool closed = false;
};

struct BlockedSite {
  std::size_t process;
  std::string op;      // request, accept, send, recv, select, case, close
  std::string target;  // channel end or access point
  std::string redex;
};

struct DeadlockReport {
  std::vector<BlockedSite> blocked;
  std::string describe() const;
};

enum class ConfigClass { Final, Deadlock, Reducible, Stuck };

struct Classification {
  ConfigClass kind;
  DeadlockReport report;  // filled for Deadlock
};

struct TraceEntry {
  std::uint64_t step;
  std::string rule;
  std::string redex;
};

// Binders are hoisted to the top in scope order and processes kept as a flat
// list; with unique binder names this is a normal form modulo congruence.
class Machine {
 public:
  static constexpr std::uint64_t kDefaultMaxSteps = 100000;

  explicit Machine(const ConfigP& c, std::uint64_t seed = 0, std::uint64_t max_steps = kDefaultMaxSteps);

  ConfigP config() const;
  const std::vector<Binder>& binders() const { return binders_; }
  const std::vector<ExprP>& processes() const { return procs_; }
  std::uint64_t steps() const { return steps_; }
  std::uint64_t seed() const { return seed_; }
  std::uint64_t max_steps() const { return max_steps_; }
  const std::vector<TraceEntry>& trace() const { return trace_; }

  // Typing context and state the binders give to each process.
  Ctx context() const;
  TypeP open_state() const;

  friend struct Stepper;

 private:
  std::vector<Binder> binders_;
  std::vector<ExprP> procs_;
  std::uint64_t steps_ = 0;
  std::uint64_t seed_;
  std::uint64_t max_steps_;
  std::mt19937_64 rng_;
  std::vector<TraceEntry> trace_;
};

Classification classify_config(const ConfigP& c);
Classification classify_machine(const Machine& m);

struct StepOutcome {
  enum class Kind { Stepped, Final, Deadlock, OutOfFuel, Stuck } kind;
  std::string rule;
  std::string redex;
  std::vector<std::size_t> processes;  // indices of the processes involved
  DeadlockReport report;
};

StepOutcome step_config(Machine& m);

// Called after every step; a non-empty return aborts the run as a violation.
using StepHook = std::function<std::string(const Machine& before, const Machine& after, const StepOutcome&)>;

struct RunResult {
  StepOutcome outcome;
  std::string violation;  // set when a hook rejected a step
};

RunResult run(Machine& m, const StepHook& hook = nullptr);

// Subject-reduction hook: re-types the configuration after every step, and
// for expression steps compares the stepped process's typing with its
// typing before the step.
std::string subject_reduction_check(const Machine& before, const Machine& after, const StepOutcome& o);

const char* outcome_name(StepOutcome::Kind k);

}  // namespace pvgr
