#include "stabrace/fuzz.hpp"

#include <algorithm>
#include <exception>

#include "stabrace/oracle.hpp"
#include "stabrace/reporter.hpp"
#include "stabrace/witness.hpp"

namespace stabrace {

std::string_view to_string(FuzzFailureKind k) {
  switch (k) {
    case FuzzFailureKind::Oracle: return "oracle";
    case FuzzFailureKind::Witness: return "witness";
    case FuzzFailureKind::StrictNotSubset: return "strict-not-subset";
    case FuzzFailureKind::Exception: return "exception";
  }
  return "?";
}

namespace {

std::optional<FuzzFailure> check_unguarded(const Program& p, const FuzzOptions& opts,
                                           ProgramStats& st) {
  auto fail = [&](FuzzFailureKind k, std::string detail) {
    return FuzzFailure{k, 0, std::move(detail), p, p};
  };

  for (const OracleCheck& c : oracle_check(p, p.order, opts.unrolls, opts.analysis)) {
    ++st.oracle_checks;
    st.traces += c.traces;
    if (!c.ok())
      return fail(FuzzFailureKind::Oracle, c.method + " at loop_unroll " +
                                               std::to_string(c.loop_unroll) + ":\n" + c.diff());
  }

  const SummaryTable table = summarize_program(p, opts.analysis);
  const auto strict = report(p, table, ReportMode::Strict);
  const auto relaxed = report(p, table, ReportMode::Relaxed);
  st.strict_reports += strict.size();
  st.relaxed_reports += relaxed.size();
  for (const RaceReport& r : strict) {
    const bool found = std::any_of(relaxed.begin(), relaxed.end(),
                                   [&](const RaceReport& q) { return q.key() == r.key(); });
    if (!found)
      return fail(FuzzFailureKind::StrictNotSubset,
                  r.method1 + " x " + r.method2 + " on " + to_string(r.access1.record.path));
  }

  EnumBounds wb = opts.witness_bounds;
  wb.lock_cap = opts.analysis.lock_cap;
  for (const RaceReport& r : strict) {
    Reconstruction rec = reconstruct(r, p, wb);
    if (!rec.ok())
      return fail(FuzzFailureKind::Witness, r.method1 + " x " + r.method2 + " (" +
                                                to_string(r.access1.record) + ", " +
                                                to_string(r.access2.record) + "): " + rec.failure);
    ++st.witnesses;
  }
  return std::nullopt;
}

}  // namespace

std::optional<FuzzFailure> check_program(const Program& p, const FuzzOptions& opts,
                                         ProgramStats* stats) {
  ProgramStats local;
  ProgramStats& st = stats ? *stats : local;
  try {
    return check_unguarded(p, opts, st);
  } catch (const std::exception& e) {
    return FuzzFailure{FuzzFailureKind::Exception, 0, e.what(), p, p};
  }
}

FuzzStats run_fuzz(const FuzzOptions& opts, const std::function<void(std::size_t)>& progress) {
  FuzzStats out;
  for (std::size_t i = 0; i < opts.n; ++i) {
    const std::uint64_t seed = program_seed(opts.seed, i);
    const Program p = generate_program(seed, opts.gen);
    ++out.programs;
    auto failure = check_program(p, opts, &out.totals);
    if (failure) {
      failure->seed = seed;
      if (opts.shrink) {
        const FuzzFailureKind kind = failure->kind;
        failure->shrunk = shrink(p, [&](const Program& q) {
          auto f = check_program(q, opts);
          return f && f->kind == kind;
        });
      }
      out.failures.push_back(std::move(*failure));
      if (opts.stop_on_failure) break;
    }
    if (progress) progress(i);
  }
  return out;
}

}  // namespace stabrace
