#pragma once

// Property checks over random programs: analyzer completeness against the
// trace oracle, a witness for every strict report, and strict reports being
// a subset of relaxed ones.

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "stabrace/analyzer.hpp"
#include "stabrace/concrete.hpp"
#include "stabrace/generator.hpp"

namespace stabrace {

enum class FuzzFailureKind { Oracle, Witness, StrictNotSubset, Exception };

std::string_view to_string(FuzzFailureKind k);

struct FuzzFailure {
  FuzzFailureKind kind;
  std::uint64_t seed = 0;
  std::string detail;
  Program program;
  /// Smallest program found that still fails in the same way.
  Program shrunk;
};

struct FuzzOptions {
  std::uint64_t seed = 42;
  std::size_t n = 200;
  GenBounds gen;
  std::vector<unsigned> unrolls{1, 2};
  AnalysisOptions analysis;
  /// Bounds for witness search.
  EnumBounds witness_bounds;
  bool shrink = true;
  bool stop_on_failure = false;
};

struct ProgramStats {
  std::size_t oracle_checks = 0;
  std::size_t traces = 0;
  std::size_t strict_reports = 0;
  std::size_t relaxed_reports = 0;
  std::size_t witnesses = 0;
};

struct FuzzStats {
  std::size_t programs = 0;
  ProgramStats totals;
  std::vector<FuzzFailure> failures;
};

/// Runs every property on one program; the first failure, if any.
std::optional<FuzzFailure> check_program(const Program& p, const FuzzOptions& opts,
                                         ProgramStats* stats = nullptr);

/// `progress` is called after each program with its index.
FuzzStats run_fuzz(const FuzzOptions& opts,
                   const std::function<void(std::size_t)>& progress = {});

}  // namespace stabrace
