#pragma once

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "pvgr/ast.hpp"
#include "pvgr/parser.hpp"

namespace pvgr::test {

template <class T>
bool alpha(const T& a, const T& b) {
  return same(canonicalize(a), canonicalize(b));
}

inline TypeP T(const char* src) { return parse_type(src); }
inline ExprP E(const char* src) { return parse_expr(src); }
inline Ident I(const char* name) { return Ident{name, 0}; }

inline std::string corpus(const std::string& name) {
  return (std::filesystem::path(PVGR_CORPUS_DIR) / name).string();
}

inline std::string slurp(const std::string& path) {
  std::ifstream in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace pvgr::test
