#include "pvgr/cli.hpp"

#include <CLI11.hpp>
#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <json.hpp>
#include <sstream>

#include "pvgr/kinding.hpp"
#include "pvgr/normalize.hpp"
#include "pvgr/parser.hpp"
#include "pvgr/runtime.hpp"

namespace pvgr {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

json span_json(const SourceSpan& s) {
  json j;
  j["file"] = s.file ? *s.file : "";
  j["line"] = s.line;
  j["column"] = s.column;
  return j;
}

std::string where(const SourceSpan& s) {
  if (!s.known()) return s.file ? *s.file : "";
  return (s.file ? *s.file : std::string("<input>")) + ":" + std::to_string(s.line) + ":" +
         std::to_string(s.column);
}

std::optional<std::string> read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return std::nullopt;
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Diagnostic from_type_error(const TypeError& e) {
  Diagnostic d;
  d.code = e.rule;
  d.message = e.message;
  d.span = e.span;
  d.expected = e.expected;
  d.found = e.found;
  d.state = e.state;
  return d;
}

Diagnostic from_kind_error(const KindError& e) {
  Diagnostic d;
  d.code = e.rule;
  d.message = e.message;
  d.span = e.span;
  if (e.expected) d.expected = pretty(e.expected);
  if (e.found) d.found = pretty(e.found);
  d.trail = e.trail;
  return d;
}

std::string trim(std::string s) {
  auto notspace = [](unsigned char c) { return !std::isspace(c); };
  s.erase(s.begin(), std::find_if(s.begin(), s.end(), notspace));
  s.erase(std::find_if(s.rbegin(), s.rend(), notspace).base(), s.end());
  return s;
}

std::string typing_text(const ExprTyping& t) {
  std::string out;
  if (!t.ex.empty()) out += "ex " + pretty(t.ex) + ". ";
  if (!state_atoms(normalize(t.post)).empty()) out += pretty(t.post) + "; ";
  return out + pretty(t.type);
}

}  // namespace

std::string Diagnostic::json() const {
  nlohmann::json j;
  j["severity"] = severity;
  j["code"] = code;
  j["message"] = message;
  j["span"] = span_json(span);
  if (!expected.empty()) j["expected"] = expected;
  if (!found.empty()) j["found"] = found;
  if (!state.empty()) j["state"] = state;
  if (!trail.empty()) j["trail"] = trail;
  return j.dump();
}

std::string Diagnostic::text() const {
  std::string out = where(span);
  if (!out.empty()) out += ": ";
  out += severity + " [" + code + "] " + message;
  if (!expected.empty()) out += "\n  expected: " + expected;
  if (!found.empty()) out += "\n  found:    " + found;
  if (!state.empty()) out += "\n  state:    " + state;
  if (!trail.empty()) {
    out += "\n  trail:   ";
    for (const auto& r : trail) out += " " + r;
  }
  return out;
}

CheckResult check_source(const std::string& src, const std::string& file) {
  CheckResult r;
  Program p;
  try {
    p = parse_program(src, file);
  } catch (const ParseError& e) {
    Diagnostic d;
    d.code = "parse";
    d.message = e.what();
    d.span = e.span;
    for (const auto& t : e.expected) d.expected += (d.expected.empty() ? "" : " | ") + t;
    r.diagnostics.push_back(d);
    r.exit = 2;
    return r;
  }
  r.expression = p.is_expression();
  r.program = anf_transform(p.config);
  try {
    if (r.expression) {
      auto e = anf_transform(p.expression());
      r.typing = type_expr({}, ty::st_empty(), e);
    }
    check_program(r.program);
  } catch (const TypeError& e) {
    r.diagnostics.push_back(from_type_error(e));
    r.exit = 1;
  } catch (const KindError& e) {
    r.diagnostics.push_back(from_kind_error(e));
    r.exit = 1;
  }
  return r;
}

CheckResult check_file(const std::string& path) {
  auto src = read_file(path);
  if (!src) {
    CheckResult r;
    Diagnostic d;
    d.code = "io";
    d.message = "cannot read " + path;
    r.diagnostics.push_back(d);
    r.exit = 2;
    return r;
  }
  return check_source(*src, path);
}

int cmd_check(const std::string& path, Format format, std::ostream& out, std::ostream& err) {
  auto r = check_file(path);
  if (format == Format::Json) {
    json j;
    j["file"] = path;
    j["status"] = r.exit == 0 ? "ok" : "error";
    if (r.exit == 0) {
      j["program"] = r.expression ? "expression" : "configuration";
      if (r.typing) {
        j["type"] = pretty(r.typing->type);
        j["post"] = pretty(r.typing->post);
        j["ex"] = pretty(r.typing->ex);
      }
    }
    json ds = json::array();
    for (const auto& d : r.diagnostics) ds.push_back(json::parse(d.json()));
    j["diagnostics"] = ds;
    out << j.dump(2) << "\n";
    for (const auto& d : r.diagnostics) err << d.json() << "\n";
    return r.exit;
  }
  for (const auto& d : r.diagnostics) err << d.text() << "\n";
  if (r.exit == 0) {
    if (r.typing)
      out << typing_text(*r.typing) << "\n";
    else
      out << "ok\n";
  }
  return r.exit;
}

std::uint64_t resolve_max_steps(const std::optional<std::uint64_t>& flag) {
  if (flag) return *flag;
  if (const char* env = std::getenv("PVGR_MAX_STEPS")) {
    try {
      return std::stoull(env);
    } catch (const std::exception&) {
    }
  }
  return Machine::kDefaultMaxSteps;
}

namespace {

int outcome_exit(StepOutcome::Kind k) {
  switch (k) {
    case StepOutcome::Kind::Final: return 0;
    case StepOutcome::Kind::Deadlock: return 3;
    case StepOutcome::Kind::OutOfFuel: return 4;
    default: return 5;
  }
}

}  // namespace

int cmd_run(const std::string& path, const RunOptions& opts, std::ostream& out, std::ostream& err) {
  auto src = read_file(path);
  if (!src) {
    err << path << ": error [io] cannot read file\n";
    return 2;
  }
  ConfigP prog;
  if (opts.typecheck) {
    auto r = check_source(*src, path);
    for (const auto& d : r.diagnostics) err << (opts.format == Format::Json ? d.json() : d.text()) << "\n";
    if (r.exit != 0) return r.exit;
    prog = r.program;
  } else {
    try {
      prog = anf_transform(parse_program(*src, path).config);
    } catch (const ParseError& e) {
      Diagnostic d;
      d.code = "parse";
      d.message = e.what();
      d.span = e.span;
      err << (opts.format == Format::Json ? d.json() : d.text()) << "\n";
      return 2;
    }
  }

  Machine m(prog, opts.seed, resolve_max_steps(opts.max_steps));
  StepHook hook = [&](const Machine& before, const Machine& after, const StepOutcome& o) -> std::string {
    if (opts.trace) out << after.steps() << "\t" << o.rule << "\t" << o.redex << "\n";
    if (opts.check_steps) return subject_reduction_check(before, after, o);
    return "";
  };
  auto res = run(m, opts.trace || opts.check_steps ? hook : StepHook{});
  if (!res.violation.empty()) {
    Diagnostic d;
    d.code = "subject-reduction";
    d.message = res.violation;
    err << (opts.format == Format::Json ? d.json() : d.text()) << "\n";
    return 6;
  }
  const auto& o = res.outcome;
  if (opts.format == Format::Json) {
    json j;
    j["outcome"] = outcome_name(o.kind);
    j["steps"] = m.steps();
    json vals = json::array();
    for (const auto& p : m.processes()) vals.push_back(pretty(p));
    j["processes"] = vals;
    if (o.kind == StepOutcome::Kind::Deadlock) {
      json bl = json::array();
      for (const auto& b : o.report.blocked)
        bl.push_back({{"process", b.process}, {"op", b.op}, {"target", b.target}, {"redex", b.redex}});
      j["blocked"] = bl;
    }
    out << j.dump(2) << "\n";
  } else {
    out << outcome_name(o.kind) << " after " << m.steps() << " steps\n";
    if (o.kind == StepOutcome::Kind::Final) {
      for (const auto& p : m.processes()) out << "  " << pretty(p) << "\n";
    } else if (o.kind == StepOutcome::Kind::Deadlock) {
      out << o.report.describe();
    } else if (o.kind == StepOutcome::Kind::Stuck) {
      for (const auto& p : m.processes()) out << "  " << pretty(eval_head(p)) << "\n";
    }
  }
  return outcome_exit(o.kind);
}

std::vector<CorpusRow> run_corpus(const std::string& dir, std::ostream& err) {
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir))
    if (entry.is_regular_file() && entry.path().extension() == ".pvgr") files.push_back(entry.path());
  std::sort(files.begin(), files.end());

  std::vector<CorpusRow> rows;
  for (const auto& f : files) {
    CorpusRow row;
    row.file = f.filename().string();
    auto side = read_file(f.string() + ".expected");
    if (!side) {
      row.expected = "(no sidecar)";
      row.actual = "-";
      rows.push_back(row);
      continue;
    }
    std::string line = trim(*side);
    if (auto nl = line.find('\n'); nl != std::string::npos) line = trim(line.substr(0, nl));
    row.expected = line;
    auto colon = line.find(':');
    std::string key = colon == std::string::npos ? line : trim(line.substr(0, colon));
    std::string val = colon == std::string::npos ? "" : trim(line.substr(colon + 1));
    auto r = check_file(f.string());
    if (key == "error") {
      row.actual = r.diagnostics.empty() ? "ok" : "error: " + r.diagnostics[0].code;
      row.ok = r.exit == 1 && r.diagnostics[0].code == val;
    } else if (r.exit != 0) {
      row.actual = "error: " + r.diagnostics[0].code;
      for (const auto& d : r.diagnostics) err << d.text() << "\n";
    } else if (key == "type") {
      if (!r.typing) {
        row.actual = "configuration";
      } else {
        row.actual = "type: " + pretty(r.typing->type);
        try {
          row.ok = conv(parse_type(val), r.typing->type);
        } catch (const ParseError& e) {
          row.actual += " (bad sidecar: " + std::string(e.what()) + ")";
        }
      }
    } else if (key == "outcome") {
      Machine m(r.program, 0, resolve_max_steps(std::nullopt));
      auto res = run(m);
      std::string name = outcome_name(res.outcome.kind);
      std::transform(name.begin(), name.end(), name.begin(), [](unsigned char c) { return std::tolower(c); });
      row.actual = "outcome: " + name;
      row.ok = name == val;
    } else {
      row.actual = "(unknown sidecar key)";
    }
    rows.push_back(row);
  }
  return rows;
}

int cmd_corpus(const std::string& dir, std::ostream& out, std::ostream& err) {
  if (!fs::is_directory(dir)) {
    err << dir << ": error [io] not a directory\n";
    return 2;
  }
  auto rows = run_corpus(dir, err);
  if (rows.empty()) {
    err << "warning: no .pvgr files in " << dir << "\n";
    return 0;
  }
  std::size_t w = 4;
  for (const auto& r : rows) w = std::max(w, r.file.size());
  int bad = 0;
  for (const auto& r : rows) {
    out << (r.ok ? "ok    " : "FAIL  ") << r.file << std::string(w - r.file.size() + 2, ' ') << r.actual;
    if (!r.ok) {
      out << "   (expected " << r.expected << ")";
      ++bad;
    }
    out << "\n";
  }
  out << rows.size() - bad << "/" << rows.size() << " match\n";
  return bad ? 1 : 0;
}

int cli_main(int argc, char** argv) {
  CLI::App app{"pvgr: checker and interpreter for polymorphic typestate session programs"};
  app.require_subcommand(1);

  std::string file, format = "pretty";
  auto* check = app.add_subcommand("check", "type-check a program");
  check->add_option("FILE", file)->required();
  check->add_option("--format", format)->check(CLI::IsMember({"pretty", "json"}));

  RunOptions ro;
  std::uint64_t max_steps = 0;
  bool no_check = false;
  auto* runc = app.add_subcommand("run", "type-check and run a program");
  runc->add_option("FILE", file)->required();
  runc->add_option("--seed", ro.seed, "scheduling seed; 0 always takes the first redex");
  auto* ms = runc->add_option("--max-steps", max_steps);
  runc->add_flag("--trace", ro.trace, "print one line per step");
  runc->add_flag("--no-check", no_check, "skip the initial type check");
  runc->add_flag("--check", ro.check_steps, "re-type the configuration after every step");
  runc->add_option("--format", format)->check(CLI::IsMember({"pretty", "json"}));

  std::string dir;
  auto* corpus = app.add_subcommand("corpus", "check every program in a directory against its sidecar");
  corpus->add_option("DIR", dir)->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;
  }
  Format fmt = format == "json" ? Format::Json : Format::Pretty;
  if (*check) return cmd_check(file, fmt, std::cout, std::cerr);
  if (*runc) {
    ro.format = fmt;
    ro.typecheck = !no_check;
    if (ms->count()) ro.max_steps = max_steps;
    return cmd_run(file, ro, std::cout, std::cerr);
  }
  return cmd_corpus(dir, std::cout, std::cerr);
}

}  // namespace pvgr
