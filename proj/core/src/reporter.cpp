#include "stabrace/reporter.hpp"

#include <algorithm>

namespace stabrace {

std::string_view to_string(ReportMode m) {
  return m == ReportMode::Strict ? "strict" : "relaxed";
}

std::vector<std::pair<AccessRecord, AccessRecord>> candidates(const AbstractState& s1,
                                                              const AbstractState& s2) {
  std::vector<std::pair<AccessRecord, AccessRecord>> out;
  for (const AccessRecord& a : s1.accesses)
    for (const AccessRecord& b : s2.accesses)
      if (a.path.fields == b.path.fields) out.emplace_back(a, b);
  return out;
}

bool stable(const Expr& path, const std::set<Expr>& wobbly) {
  return std::none_of(wobbly.begin(), wobbly.end(),
                      [&](const Expr& e) { return is_proper_prefix(e, path); });
}

bool lock_condition(ReportMode mode, unsigned l1, unsigned l2) {
  if (mode == ReportMode::Strict) return l1 + l2 <= 1;
  return std::min(l1, l2) == 0;
}

namespace {

ReportedAccess with_origin(const Summary& s, const AccessRecord& a) {
  auto it = s.origins.find(a);
  if (it == s.origins.end()) return {a, std::nullopt};
  return {a, it->second};
}

}  // namespace

std::vector<RaceReport> report(const Program& p, const SummaryTable& table, ReportMode mode) {
  std::vector<MethodName> entries = p.entries;
  std::sort(entries.begin(), entries.end());
  entries.erase(std::unique(entries.begin(), entries.end()), entries.end());

  std::vector<RaceReport> out;
  for (std::size_t i = 0; i < entries.size(); ++i) {
    for (std::size_t j = i; j < entries.size(); ++j) {
      const Summary& s1 = table.at(entries[i]);
      const Summary& s2 = table.at(entries[j]);
      for (const auto& [a1, a2] : candidates(s1.state, s2.state)) {
        if (a1.kind == AccessKind::Read && a2.kind == AccessKind::Read) continue;
        if (!stable(a1.path, s1.state.wobbly) || !stable(a2.path, s2.state.wobbly)) continue;
        if (!lock_condition(mode, a1.lock, a2.lock)) continue;

        RaceReport r;
        r.method1 = entries[i];
        r.method2 = entries[j];
        r.access1 = with_origin(s1, a1);
        r.access2 = with_origin(s2, a2);
        r.field_seq = a1.path.fields;
        r.mode = mode;
        const bool swap_kinds =
            a1.kind == AccessKind::Read && a2.kind == AccessKind::Write;
        const bool swap_self = i == j && a1.kind == a2.kind && a2 < a1;
        if (swap_kinds || swap_self) {
          std::swap(r.method1, r.method2);
          std::swap(r.access1, r.access2);
        }
        out.push_back(std::move(r));
      }
    }
  }
  std::sort(out.begin(), out.end(),
            [](const RaceReport& a, const RaceReport& b) { return a.key() < b.key(); });
  out.erase(std::unique(out.begin(), out.end(),
                        [](const RaceReport& a, const RaceReport& b) {
                          return a.key() == b.key();
                        }),
            out.end());
  return out;
}

}  // namespace stabrace
