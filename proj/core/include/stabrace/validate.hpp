#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "stabrace/ast.hpp"

namespace stabrace {

enum class ViolationKind {
  UnmatchedUnlock,
  UnbalancedBlock,
  AnfViolation,
  UseBeforeInit,
  RecursionCycle,
};

std::string_view to_string(ViolationKind kind);

struct Violation {
  ViolationKind kind;
  MethodName method;
  SourcePos pos;
  std::string message;
  /// RecursionCycle: the methods on the cycle. UseBeforeInit: the variable.
  std::vector<std::string> subjects;
};

/// lock()/unlock() must pair up within every block (method body, branch,
/// loop body), and no unlock() may precede its lock() in that block.
std::vector<Violation> validate_balanced_locking(const Program& p);

/// No store of the form `path := argj`.
std::vector<Violation> validate_anf(const Program& p);

/// Every local is assigned on all paths before it is read. Assignments made
/// inside a loop body do not count after the loop.
std::vector<Violation> validate_definite_init(const Program& p);

/// The call graph is acyclic. At most one cycle is reported.
std::vector<Violation> validate_no_recursion(const Program& p);

/// All four validators, concatenated.
std::vector<Violation> validate_all(const Program& p);

}  // namespace stabrace
