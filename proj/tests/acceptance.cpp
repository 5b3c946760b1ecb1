// Acceptance run: one PASS/FAIL line per criterion.
#include <algorithm>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "pvgr/cli.hpp"
#include "pvgr/constraints.hpp"
#include "pvgr/normalize.hpp"
#include "pvgr/parser.hpp"
#include "pvgr/runtime.hpp"
#include "pvgr/typing.hpp"

namespace fs = std::filesystem;
using namespace pvgr;

namespace {

// Budgets in seconds, and sample sizes.
constexpr double kBudget1 = 1.0;
constexpr double kBudget2 = 1.0;
constexpr double kBudget3 = 60.0;
constexpr double kBudget4 = 60.0;
constexpr double kBudget5 = 30.0;
constexpr double kBudget6 = 30.0;
constexpr double kBudget7 = 5.0;
constexpr double kBudget8 = 30.0;
constexpr int kSeeds = 10;
constexpr std::uint64_t kStepCap = 10000;
constexpr int kEntailInstances = 1000;
constexpr int kConvPairs = 1000;
constexpr int kDualSessions = 1000;
constexpr int kRandomTrees = 1000;
constexpr int kOracleDepth = 6;

std::string corpus_dir;

struct Verdict {
  bool ok = true;
  std::string detail;
  void fail(const std::string& why) {
    if (ok) detail = why;
    ok = false;
  }
};

using Clock = std::chrono::steady_clock;

void report(int n, const std::string& title, double budget, const std::function<Verdict()>& body, int& failures) {
  auto t0 = Clock::now();
  Verdict v;
  try {
    v = body();
  } catch (const std::exception& e) {
    v.fail(std::string("exception: ") + e.what());
  }
  double secs = std::chrono::duration<double>(Clock::now() - t0).count();
  if (secs >= budget) v.fail("took " + std::to_string(secs) + " s, budget " + std::to_string(budget) + " s");
  std::ostringstream line;
  line << (v.ok ? "PASS" : "FAIL") << " " << n << " " << title << " (" << std::fixed;
  line.precision(3);
  line << secs << " s)";
  if (!v.detail.empty()) line << ": " << v.detail;
  std::cout << line.str() << std::endl;
  if (!v.ok) ++failures;
}

template <class T>
bool alpha(const T& a, const T& b) {
  return same(canonicalize(a), canonicalize(b));
}

std::string path(const std::string& name) { return (fs::path(corpus_dir) / name).string(); }

std::string slurp(const std::string& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::string> corpus_files() {
  std::vector<std::string> out;
  for (const auto& e : fs::directory_iterator(corpus_dir))
    if (e.path().extension() == ".pvgr") out.push_back(e.path().string());
  std::sort(out.begin(), out.end());
  return out;
}

// ---------------------------------------------------------------- 1

struct Example {
  const char* file;
  const char* type;
};

// Transcriptions of the published types.
const Example kExamples[] = {
    {"server.pvgr",
     "forall s:Session. forall u:Dom(1). [{u: ?{x:Dom(0)}(.; Int).?{y:Dom(0)}(.; Int).!{z:Dom(0)}(.; Int).s}; "
     "Chan u -> {u: s}; Unit]"},
    {"server_captured.pvgr",
     "forall a:Dom(1). forall s:Session. [{a: ?{x:Dom(0)}(.; Int).?{y:Dom(0)}(.; Int).!{z:Dom(0)}(.; Int).s}; "
     "Unit -> {a: s}; Unit]"},
    {"acc.pvgr", "forall s:Session. [.; AP(s) -> ex c:Dom(1). {c: s}; Chan c]"},
    {"send0.pvgr", "forall w:Dom(1). forall s:Session. [.; Int -> .; [{w: !{a:Dom(0)}(.; Int).s}; Chan w -> {w: s}; Unit]]"},
    {"send1.pvgr",
     "forall s1:Session. forall a:Dom(1). forall w:Dom(1)[a # w]. forall s:Session. [.; Chan a -> .; "
     "[{a: s1, w: !{b:Dom(1)}({b: s1}; Chan b).s}; Chan w -> {w: s}; Unit]]"},
    {"send2.pvgr",
     "forall s1:Session. forall s2:Session. forall a:Dom(1). forall b:Dom(1)[a # b]. forall w:Dom(1)[a # w, b # w]. "
     "forall s:Session. [.; (Chan a * Chan b) -> .; [{a: s1, b: s2, w: !{c:Dom((1*1))}({pi1 c: s1, pi2 c: s2}; "
     "(Chan pi1 c * Chan pi2 c)).s}; Chan w -> {w: s}; Unit]]"},
    {"gsend.pvgr",
     "forall n:Shape. forall a:Dom(n). forall F:Dom(n) -> State. forall T:Dom(n) -> Type. forall w:Dom(1)[a # w]. "
     "forall s:Session. [.; T a -> .; [F a, {w: !{b:Dom(n)}(F b; T b).s}; Chan w -> {w: s}; Unit]]"},
    {"gsend_send0.pvgr",
     "forall w:Dom(1). forall s:Session. [.; Int -> .; [{w: !{a:Dom(0)}(.; Int).s}; Chan w -> {w: s}; Unit]]"},
    {"gsend_send1.pvgr",
     "forall s1:Session. forall a:Dom(1). forall w:Dom(1)[a # w]. forall s:Session. [.; Chan a -> .; "
     "[{a: s1, w: !{b:Dom(1)}({b: s1}; Chan b).s}; Chan w -> {w: s}; Unit]]"},
    {"gsend_send2.pvgr",
     "forall s1:Session. forall s2:Session. forall a:Dom(1). forall b:Dom(1)[a # b]. forall w:Dom(1)[a # w, b # w]. "
     "forall s:Session. [.; (Chan a * Chan b) -> .; [{a: s1, b: s2, w: !{c:Dom((1*1))}({pi1 c: s1, pi2 c: s2}; "
     "(Chan pi1 c * Chan pi2 c)).s}; Chan w -> {w: s}; Unit]]"},
};

Verdict criterion1() {
  Verdict v;
  for (const auto& ex : kExamples) {
    auto r = check_file(path(ex.file));
    if (r.exit != 0 || !r.typing) {
      v.fail(std::string(ex.file) + " does not type-check" +
             (r.diagnostics.empty() ? "" : ": " + r.diagnostics.front().message));
      continue;
    }
    if (!r.typing->ex.empty() || !state_atoms(normalize(r.typing->post)).empty()) {
      v.fail(std::string(ex.file) + " leaves a package or state behind");
      continue;
    }
    auto want = parse_type(ex.type);
    if (!conv(r.typing->type, want))
      v.fail(std::string(ex.file) + ": got " + pretty(r.typing->type) + ", want " + pretty(want));
  }
  if (v.ok) v.detail = std::to_string(std::size(kExamples)) + " examples";
  return v;
}

// ---------------------------------------------------------------- 2

Verdict criterion2() {
  Verdict v;
  auto bad = check_file(path("sendsend_aliased.pvgr"));
  if (bad.exit != 1 || bad.diagnostics.empty()) {
    v.fail("aliased call was not rejected");
  } else {
    const auto& d = bad.diagnostics.front();
    if (d.code != "T-TApp" || d.message.find("entail") == std::string::npos)
      v.fail("aliased call rejected for another reason: " + d.code + " " + d.message);
  }
  for (const char* f : {"sendsend_type.pvgr", "sendsend_single.pvgr"}) {
    auto ok = check_file(path(f));
    if (ok.exit != 0) v.fail(std::string(f) + " was rejected");
  }
  return v;
}

// ---------------------------------------------------------------- 3, 4

struct Runnable {
  std::string file;
  ConfigP program;
};

std::vector<Runnable> runnable_corpus(Verdict& v) {
  std::vector<Runnable> out;
  for (const auto& f : corpus_files()) {
    auto r = check_file(f);
    if (r.exit == 0) {
      out.push_back(Runnable{f, r.program});
    } else if (slurp(f + ".expected").rfind("error:", 0) != 0) {
      v.fail(f + " does not type-check");
    }
  }
  return out;
}

Verdict criterion3() {
  Verdict v;
  auto progs = runnable_corpus(v);
  std::uint64_t steps = 0;
  for (const auto& p : progs)
    for (int seed = 0; seed < kSeeds; ++seed) {
      Machine m(p.program, static_cast<std::uint64_t>(seed), kStepCap);
      auto res = run(m, subject_reduction_check);
      steps += m.steps();
      if (!res.violation.empty())
        v.fail(fs::path(p.file).filename().string() + " seed " + std::to_string(seed) + ": " + res.violation);
    }
  if (v.ok) v.detail = std::to_string(progs.size()) + " programs, " + std::to_string(steps) + " checked steps";
  return v;
}

Verdict criterion4() {
  Verdict v;
  auto progs = runnable_corpus(v);
  std::uint64_t configs = 0;
  for (const auto& p : progs)
    for (int seed = 0; seed < kSeeds; ++seed) {
      Machine m(p.program, static_cast<std::uint64_t>(seed), kStepCap);
      auto name = fs::path(p.file).filename().string() + " seed " + std::to_string(seed);
      for (;;) {
        ++configs;
        auto c = classify_config(m.config());
        if (c.kind != classify_machine(m).kind) {
          v.fail(name + ": classifications of the machine and its configuration differ");
          break;
        }
        if (c.kind == ConfigClass::Stuck) {
          v.fail(name + ": stuck after " + std::to_string(m.steps()) + " steps");
          break;
        }
        if (c.kind != ConfigClass::Reducible) break;
        if (m.steps() >= kStepCap) {
          v.fail(name + ": no final or deadlocked configuration within the step cap");
          break;
        }
        auto o = step_config(m);
        if (o.kind != StepOutcome::Kind::Stepped) {
          v.fail(name + ": reducible configuration did not step");
          break;
        }
      }
    }
  if (v.ok) v.detail = std::to_string(configs) + " configurations";
  return v;
}

// ---------------------------------------------------------------- 5

Verdict criterion5() {
  Verdict v;
  oracle::Rng rng(0x5eed0005);
  int agree = 0, positive = 0;
  for (int i = 0; i < kEntailInstances; ++i) {
    auto inst = oracle::random_entail_instance(rng);
    bool impl = entails(inst.g, inst.c);
    bool ref = oracle::derivable(inst.g, inst.c, kOracleDepth);
    if (impl == ref) {
      ++agree;
    } else {
      v.fail("disagreement on " + pretty(inst.g) + " |- " + pretty(inst.c) + ": entails=" + (impl ? "yes" : "no"));
    }
    positive += impl;
  }
  if (v.ok)
    v.detail = std::to_string(agree) + "/" + std::to_string(kEntailInstances) + " agree, " +
               std::to_string(positive) + " entailed";
  return v;
}

// ---------------------------------------------------------------- 6

Verdict criterion6() {
  Verdict v;
  oracle::Rng rng(0x5eed0006);
  int agree = 0, positive = 0;
  for (int i = 0; i < kConvPairs; ++i) {
    auto [a, b] = oracle::random_conv_pair(rng);
    bool impl = conv(a, b);
    bool ref = oracle::conv_search(a, b, kOracleDepth);
    if (impl == ref) {
      ++agree;
    } else {
      v.fail("disagreement on " + pretty(a) + " vs " + pretty(b) + ": conv=" + (impl ? "yes" : "no"));
    }
    positive += impl;
  }
  for (int i = 0; i < kDualSessions; ++i) {
    auto s = oracle::random_session(rng, 3);
    if (!conv(ty::dual(ty::dual(s)), s)) v.fail("dual (dual S) not convertible to S for " + pretty(s));
  }
  if (v.ok)
    v.detail = std::to_string(agree) + "/" + std::to_string(kConvPairs) + " agree, " + std::to_string(positive) +
               " convertible; involution on " + std::to_string(kDualSessions) + " sessions";
  return v;
}

// ---------------------------------------------------------------- 7

struct Witness {
  const char* name;
  const char* deadlocked;
  const char* repaired;
  std::vector<std::pair<std::string, std::string>> blocked;  // op, target
};

const Witness kWitnesses[] = {
    {"send/send on one channel",
     "nu (a, b): !{x:Dom(0)}(.; Int).End.\n"
     "  let p = send () (chan a) in close (chan a)\n"
     "| let q = send () (chan b) in close (chan b)\n",
     "nu (a, b): !{x:Dom(0)}(.; Int).End.\n"
     "  let p = send () (chan a) in close (chan a)\n"
     "| let q = recv (chan b) in close (chan b)\n",
     {{"send", "a"}, {"send", "b"}}},
    {"request without accept",
     "let ap = new End in\n"
     "let c = request ap in\n"
     "close c\n",
     "let ap = new End in\n"
     "let t = fork (\\[.](z:Unit). let c = accept ap in close c) in\n"
     "let c = request ap in\n"
     "close c\n",
     {{"request", "ap"}}},
    {"close without co-close",
     "nu (a, b): End.\n"
     "  close (chan a)\n"
     "| ()\n",
     "nu (a, b): End.\n"
     "  close (chan a)\n"
     "| close (chan b)\n",
     {{"close", "a"}}},
};

Verdict criterion7() {
  Verdict v;
  for (const auto& w : kWitnesses) {
    auto dl = parse_program(w.deadlocked, w.name);
    Machine m(anf_transform(dl.config));
    auto o = run(m).outcome;
    if (o.kind != StepOutcome::Kind::Deadlock) {
      v.fail(std::string(w.name) + ": ended " + outcome_name(o.kind));
      continue;
    }
    std::vector<std::pair<std::string, std::string>> got;
    for (const auto& b : o.report.blocked) got.emplace_back(b.op, b.target);
    auto want = w.blocked;
    std::sort(got.begin(), got.end());
    std::sort(want.begin(), want.end());
    if (got != want) v.fail(std::string(w.name) + ": report " + o.report.describe());

    auto fixed = check_source(w.repaired, w.name);
    if (fixed.exit != 0) {
      v.fail(std::string(w.name) + ": repaired program is ill-typed");
      continue;
    }
    Machine r(fixed.program);
    auto ro = run(r).outcome;
    if (ro.kind != StepOutcome::Kind::Final)
      v.fail(std::string(w.name) + ": repaired program ended " + outcome_name(ro.kind));
  }
  return v;
}

// ---------------------------------------------------------------- 8

// Leftover processes compared after ANF, since a value can carry a function
// body the transformation rewrote.
std::string final_summary(const Machine& m, const StepOutcome& o) {
  std::string s = outcome_name(o.kind);
  for (const auto& p : m.processes()) s += " | " + pretty(canonicalize(anf_transform(p)));
  for (const auto& b : m.binders()) s += b.closed ? " closed" : " " + pretty(b.ses);
  return s;
}

Verdict criterion8() {
  Verdict v;
  int trees = 0;
  for (const auto& f : corpus_files()) {
    auto p = parse_program(slurp(f), f);
    for (const auto& c : {p.config, anf_transform(p.config)}) {
      auto back = parse_program(pretty(c), f);
      if (!alpha(c, back.config)) v.fail(f + ": round trip changed the program");
      ++trees;
    }
  }
  oracle::Rng rng(0x5eed0008);
  for (int i = 0; i < kRandomTrees; ++i) {
    switch (i % 3) {
      case 0: {
        auto t = oracle::random_closed_type(rng, 4);
        if (!alpha(t, parse_type(pretty(t)))) v.fail("type round trip: " + pretty(t));
        break;
      }
      case 1: {
        auto e = oracle::random_closed_expr(rng, 4);
        if (!alpha(e, parse_expr(pretty(e)))) v.fail("expression round trip: " + pretty(e));
        auto a = anf_transform(e);
        if (!is_strict_anf(a) || !alpha(a, anf_transform(a))) v.fail("anf not idempotent on " + pretty(e));
        break;
      }
      default: {
        auto c = oracle::random_closed_config(rng, 3);
        if (!alpha(c, parse_program(pretty(c)).config)) v.fail("configuration round trip: " + pretty(c));
        break;
      }
    }
    ++trees;
  }
  int runs = 0;
  for (const auto& f : corpus_files()) {
    auto p = parse_program(slurp(f), f);
    auto a = anf_transform(p.config);
    if (!alpha(a, anf_transform(a))) v.fail(f + ": anf not idempotent");
    if (!is_strict_anf(a)) v.fail(f + ": anf output not strict");
    if (slurp(f + ".expected").rfind("error:", 0) == 0) continue;
    Machine raw(p.config), norm(a);
    auto ro = run(raw).outcome;
    auto no = run(norm).outcome;
    if (final_summary(raw, ro) != final_summary(norm, no))
      v.fail(f + ": runs differ: " + final_summary(raw, ro) + " vs " + final_summary(norm, no));
    ++runs;
  }
  if (v.ok) v.detail = std::to_string(trees) + " round trips, " + std::to_string(runs) + " differential runs";
  return v;
}

}  // namespace

int main(int argc, char** argv) {
  corpus_dir = argc > 1 ? argv[1] : PVGR_CORPUS_DIR;
  int failures = 0;
  report(1, "reference example typings", kBudget1, criterion1, failures);
  report(2, "aliased sendSend rejected, single-channel variant accepted", kBudget2, criterion2, failures);
  report(3, "subject reduction over the corpus", kBudget3, criterion3, failures);
  report(4, "progress trichotomy over the corpus", kBudget4, criterion4, failures);
  report(5, "entailment agrees with derivation search", kBudget5, criterion5, failures);
  report(6, "conversion agrees with rewrite search; dual involution", kBudget6, criterion6, failures);
  report(7, "deadlock witnesses and their repairs", kBudget7, criterion7, failures);
  report(8, "round trip and ANF", kBudget8, criterion8, failures);
  return failures == 0 ? 0 : 1;
}
