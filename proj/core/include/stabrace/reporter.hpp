#pragma once

#include <memory>
#include <optional>
#include <set>
#include <tuple>
#include <string>
#include <utility>
#include <vector>

#include "stabrace/analyzer.hpp"
#include "stabrace/domain.hpp"

namespace stabrace {

enum class ReportMode {
  /// Lock contexts sum to at most one. Every report has a concrete witness.
  Strict,
  /// At least one access is unprotected.
  Relaxed,
};

std::string_view to_string(ReportMode m);

struct WitnessTrace;

struct ReportedAccess {
  AccessRecord record;
  std::optional<AccessOrigin> origin;
};

struct RaceReport {
  MethodName method1;
  MethodName method2;
  /// The write goes in slot 1; for two accesses of the same kind in a
  /// self-pair, the smaller record does.
  ReportedAccess access1;
  ReportedAccess access2;
  std::vector<FieldName> field_seq;
  ReportMode mode = ReportMode::Strict;
  std::shared_ptr<const WitnessTrace> witness;

  /// Identity used for ordering and deduplication; ignores origins and
  /// witnesses.
  auto key() const {
    return std::tie(method1, method2, access1.record.path, access2.record.path,
                    access1.record.kind, access2.record.kind, access1.record.lock,
                    access2.record.lock);
  }
};

/// Ordered access pairs whose paths share a field sequence.
std::vector<std::pair<AccessRecord, AccessRecord>> candidates(const AbstractState& s1,
                                                              const AbstractState& s2);

/// No element of `wobbly` is a proper prefix of `path`.
bool stable(const Expr& path, const std::set<Expr>& wobbly);

bool lock_condition(ReportMode mode, unsigned l1, unsigned l2);

/// Race reports over every unordered pair of entry methods, self-pairs
/// included, sorted and deduplicated.
std::vector<RaceReport> report(const Program& p, const SummaryTable& table, ReportMode mode);

}  // namespace stabrace
