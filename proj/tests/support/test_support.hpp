#pragma once

#include <fstream>
#include <sstream>
#include <string>

#include "stabrace/ast.hpp"
#include "stabrace/domain.hpp"
#include "stabrace/parser.hpp"

namespace stabrace::testing {

inline std::string read_fixture(const std::string& name) {
  std::ifstream in(std::string(STABRACE_FIXTURE_DIR) + "/" + name);
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

inline Program fixture(const std::string& name) { return parse_program(read_fixture(name)); }

/// `arg1.f.g` style expression.
inline Expr E(const std::string& dotted) {
  std::vector<std::string> parts;
  std::string cur;
  for (char c : dotted) {
    if (c == '.') {
      parts.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  parts.push_back(cur);
  return Expr(Var(parts.front()), {parts.begin() + 1, parts.end()});
}

inline AccessRecord R(const std::string& p, unsigned lock) { return {AccessKind::Read, E(p), lock}; }
inline AccessRecord W(const std::string& p, unsigned lock) { return {AccessKind::Write, E(p), lock}; }

/// Body of the single method of `src`.
inline Program one(const std::string& src) { return parse_program(src); }

}  // namespace stabrace::testing
