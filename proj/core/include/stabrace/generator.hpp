#pragma once

// Random programs that pass every validator by construction, plus a greedy
// shrinker for failing ones.

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "stabrace/ast.hpp"

namespace stabrace {

struct GenBounds {
  unsigned max_methods = 4;
  /// Longest chain of nested calls, counting the outermost method.
  unsigned max_call_depth = 3;
  /// Statements per method, nested ones included.
  unsigned max_stmts = 12;
  unsigned max_arity = 2;
  unsigned max_path_len = 2;
  unsigned max_nesting = 2;
  std::vector<FieldName> fields{"f", "g"};
  std::vector<std::string> locals{"x", "y", "z"};
  /// Programs whose estimated trace count at `estimate_unroll` exceeds this
  /// for some method are redrawn.
  std::size_t max_traces = 4096;
  unsigned estimate_unroll = 2;
};

/// Upper bound on the number of enumerated traces of `m` when every loop
/// runs 0..loop_unroll times and allocation is canonical.
std::size_t estimate_traces(const Program& p, const Method& m, unsigned loop_unroll);

/// Deterministic in (seed, bounds). Every method is an entry.
Program generate_program(std::uint64_t seed, const GenBounds& bounds = {});

/// Per-program seed for the i-th program of a fuzz run.
std::uint64_t program_seed(std::uint64_t run_seed, std::size_t i);

/// Repeatedly applies the first single-step reduction (dropping an uncalled
/// method, a statement, a matched lock pair, or inlining a branch or loop
/// body) that keeps the program valid and still satisfies `fails`.
Program shrink(const Program& p, const std::function<bool(const Program&)>& fails);

/// Total number of statements, nested ones included, excluding the implicit
/// leading skips.
std::size_t program_size(const Program& p);

}  // namespace stabrace
