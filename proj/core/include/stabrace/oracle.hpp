#pragma once

// Completeness check: the analyzer's result for a method body must equal
// the abstraction of its bounded concrete traces.

#include <string>
#include <vector>

#include "stabrace/analyzer.hpp"
#include "stabrace/concrete.hpp"

namespace stabrace {

struct OracleCheck {
  MethodName method;
  unsigned loop_unroll = 0;
  AbstractState analyzed;
  AbstractState abstracted;
  std::size_t traces = 0;

  bool ok() const { return analyzed == abstracted; }
  /// Componentwise differences, empty when ok.
  std::string diff() const { return describe_diff(abstracted, analyzed); }
};

/// One check per (method, unroll). Traces are enumerated from the
/// universal-node state over the program's fields.
std::vector<OracleCheck> oracle_check(const Program& p, const std::vector<MethodName>& methods,
                                      const std::vector<unsigned>& unrolls,
                                      const AnalysisOptions& opts = {},
                                      EnumBounds bounds = {});

}  // namespace stabrace
