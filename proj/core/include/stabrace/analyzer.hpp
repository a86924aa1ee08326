#pragma once

// Compositional abstract interpreter. Each method is summarised once from
// bottom; call sites instantiate the callee summary by substituting actuals
// for formals and shifting lock contexts by the caller's lock count.

#include <map>
#include <optional>
#include <stdexcept>
#include <vector>

#include "stabrace/ast.hpp"
#include "stabrace/domain.hpp"

namespace stabrace {

class AnalysisError : public std::runtime_error {
public:
  enum class Kind { ArityMismatch, MissingSummary };
  AnalysisError(Kind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}
  Kind kind() const { return kind_; }

private:
  Kind kind_;
};

/// Deliberate analyzer defects for negative-control testing of the oracle.
enum class Mutation {
  None,
  /// Loops contribute nothing (the body is never analysed).
  SkipLoopBody,
  /// Calls do not add self-overlapping actuals to the wobbly set.
  DropCallOverlap,
};

struct AnalysisOptions {
  LockCap lock_cap;
  Mutation mutation = Mutation::None;
};

/// Where an access was first recorded.
struct AccessOrigin {
  MethodName method;
  SourcePos pos;
};

struct Summary {
  AbstractState state;
  std::map<AccessRecord, AccessOrigin> origins;
};

using SummaryTable = std::map<MethodName, Summary>;

/// `e` with each formal arg_i replaced by `actuals[i-1]`. Empty when the
/// result is rooted at a local or the formal has no actual.
std::optional<Expr> subst_actuals(const Expr& e, const std::vector<Expr>& actuals);

AbstractState transfer_simple(const SimpleStmt& c, const AbstractState& d,
                              const AnalysisOptions& opts = {});

class Analyzer {
public:
  Analyzer(const Program& p, AnalysisOptions opts = {});

  /// Summaries of every method, callees before callers.
  const SummaryTable& summaries() const { return table_; }
  const Summary& summary(const MethodName& m) const;

  AbstractState analyze_compound(const Block& b, const AbstractState& d) const;
  AbstractState apply_summary(const Method& callee, const std::vector<Expr>& actuals,
                              const AbstractState& d) const;

  /// Methods in reverse topological order of the call graph.
  const std::vector<MethodName>& order() const { return order_; }

private:
  AbstractState analyze(const Block& b, AbstractState d, const MethodName& owner,
                        std::map<AccessRecord, AccessOrigin>* origins) const;
  AbstractState call(const Method& callee, const std::vector<Expr>& actuals,
                     const AbstractState& d, const AccessOrigin& site,
                     std::map<AccessRecord, AccessOrigin>* origins) const;

  const Program& program_;
  AnalysisOptions opts_;
  std::vector<MethodName> order_;
  SummaryTable table_;
};

/// Requires an acyclic call graph.
std::vector<MethodName> reverse_topological_order(const Program& p);

SummaryTable summarize_program(const Program& p, const AnalysisOptions& opts = {});

/// Summary state of a method body analysed from bottom; convenience for
/// oracle comparisons.
AbstractState analyze_method(const Program& p, const MethodName& m,
                             const AnalysisOptions& opts = {});

}  // namespace stabrace
