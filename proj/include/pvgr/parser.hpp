#pragma once

#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "pvgr/ast.hpp"

namespace pvgr {

struct ParseError : std::runtime_error {
  ParseError(std::string msg, SourceSpan span, std::vector<std::string> expected)
      : std::runtime_error(std::move(msg)), span(std::move(span)), expected(std::move(expected)) {}
  SourceSpan span;
  std::vector<std::string> expected;
};

struct Program {
  ConfigP config;
  std::string file;

  // A program that is a single expression process rather than a configuration.
  bool is_expression() const;
  ExprP expression() const;
};

Program parse_program(std::string_view src, std::string file = "<input>");
TypeP parse_type(std::string_view src);
KindP parse_kind(std::string_view src);
ExprP parse_expr(std::string_view src);
ValueP parse_value(std::string_view src);

std::string pretty(const TypeP& t);
std::string pretty(const KindP& k);
std::string pretty(const Ctx& g);
std::string pretty(const Constraints& c);
std::string pretty(const ValueP& v);
std::string pretty(const ExprP& e);
std::string pretty(const ConfigP& c);

// Strict A-normal form: every let body, function body, case branch and
// process is a let chain ending in a value; other forms occur only as
// headers, and a header is never itself a let.
ExprP anf_transform(const ExprP& e);
ValueP anf_transform(const ValueP& v);
ConfigP anf_transform(const ConfigP& c);
bool is_strict_anf(const ExprP& e);
bool is_strict_anf(const ConfigP& c);

}  // namespace pvgr
