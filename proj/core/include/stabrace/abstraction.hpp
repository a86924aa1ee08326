#pragma once

// Abstraction of concrete traces into the analysis domain: fold the
// syntactic projection of each trace left to right, carrying a stack of
// formal-to-actual substitutions that mirrors the call stack, then join.

#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "stabrace/concrete.hpp"
#include "stabrace/domain.hpp"

namespace stabrace {

/// One frame maps formal index i (arg_i) to the actual expression of the
/// call, in the caller's namespace. `back()` is the innermost call.
using SubstFrame = std::map<unsigned, Expr>;
using SubstStack = std::vector<SubstFrame>;

/// Rewrites `e` through every frame, innermost first, into an expression
/// rooted at a formal of the outermost method. Empty when the expression
/// (or an intermediate actual) is rooted at a local.
std::optional<Expr> subst_expr(const Expr& e, const SubstStack& stack);

/// Indices of actuals that overlap another actual in the prefix order,
/// in either direction.
std::vector<std::size_t> self_overlapping(std::span<const Expr> actuals);

class PopOnEmpty : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Incremental form of the syntactic-trace fold.
class ExecFolder {
public:
  explicit ExecFolder(LockCap cap = {}) : cap_(cap) {}

  void step(const SimpleStmt& c);

  const AbstractState& state() const { return state_; }
  const SubstStack& substitutions() const { return stack_; }

private:
  void add_wobbly(const Expr& e);

  LockCap cap_;
  AbstractState state_;
  SubstStack stack_;
};

struct FoldResult {
  AbstractState state;
  SubstStack residual;
};

FoldResult exec_fold(std::span<const SimpleStmt> syntactic, LockCap cap = {});

/// Join of the folds of every trace, starting from bottom.
AbstractState alpha(std::span<const Trace> traces, LockCap cap = {});

/// Streaming accumulator for alpha over traces produced one at a time.
class AlphaAccumulator {
public:
  explicit AlphaAccumulator(LockCap cap = {}) : cap_(cap) {}
  void add(std::span<const SimpleStmt> syntactic);
  const AbstractState& result() const { return acc_; }
  std::size_t count() const { return count_; }

private:
  LockCap cap_;
  AbstractState acc_;
  std::size_t count_ = 0;
};

}  // namespace stabrace
