#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "pvgr/ast.hpp"
#include "pvgr/typing.hpp"

namespace pvgr {

// Diagnostic codes: "io", "parse", "subject-reduction", "existential-match",
// or the name of the failing typing/kinding rule (T-*, K-*, KF-*, CF-*).
struct Diagnostic {
  std::string severity = "error";
  std::string code;
  std::string message;
  SourceSpan span;
  std::string expected;
  std::string found;
  std::string state;
  std::vector<std::string> trail;

  std::string json() const;
  std::string text() const;
};

enum class Format { Pretty, Json };

struct CheckResult {
  int exit = 0;  // 0 ok, 1 type error, 2 parse or read error
  std::vector<Diagnostic> diagnostics;
  ConfigP program;  // after anf_transform
  bool expression = false;
  std::optional<ExprTyping> typing;  // for expression programs
};

CheckResult check_source(const std::string& src, const std::string& file);
CheckResult check_file(const std::string& path);

struct RunOptions {
  std::uint64_t seed = 0;
  std::optional<std::uint64_t> max_steps;
  bool trace = false;
  bool typecheck = true;   // --no-check turns this off
  bool check_steps = false;  // --check: re-type after every step
  Format format = Format::Pretty;
};

// Fuel: the flag, else PVGR_MAX_STEPS, else the machine default.
std::uint64_t resolve_max_steps(const std::optional<std::uint64_t>& flag);

// Exit codes: 0 Final, 3 Deadlock, 4 OutOfFuel, 5 Stuck, 6 subject-reduction
// violation; 1 and 2 as for check.
int cmd_check(const std::string& path, Format format, std::ostream& out, std::ostream& err);
int cmd_run(const std::string& path, const RunOptions& opts, std::ostream& out, std::ostream& err);

struct CorpusRow {
  std::string file;
  std::string expected;
  std::string actual;
  bool ok = false;
};

std::vector<CorpusRow> run_corpus(const std::string& dir, std::ostream& err);
int cmd_corpus(const std::string& dir, std::ostream& out, std::ostream& err);

int cli_main(int argc, char** argv);

}  // namespace pvgr
