#include <chrono>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "json_io.hpp"
#include "stabrace/fuzz.hpp"
#include "stabrace/oracle.hpp"

using namespace stabrace;
using io::json;

namespace {

enum Exit { kClean = 0, kRaces = 1, kInvalid = 2, kViolation = 3 };

struct Settings {
  std::string file;
  std::string mode = "strict";
  std::vector<std::string> entries;
  unsigned loop_unroll = 2;
  std::vector<unsigned> oracle_unrolls{1, 2};
  unsigned lock_cap = LockCap::kDefault;
  bool json_out = false;
  bool witness = false;
  std::uint64_t seed = 42;
  std::size_t n = 200;
  std::string mutate = "none";
  std::string method;
};

struct InputError {
  json diag;
  std::string text;
};

Program load(const Settings& s) {
  std::ifstream in(s.file);
  if (!in)
    throw InputError{{{"error", "io"}, {"message", "cannot read " + s.file}},
                     s.file + ": cannot read file"};
  std::stringstream buf;
  buf << in.rdbuf();

  Program p;
  try {
    p = parse_program(buf.str());
  } catch (const ParseError& e) {
    throw InputError{io::to_json(e), s.file + ":" + std::to_string(e.pos().line) + ":" +
                                         std::to_string(e.pos().col) + ": error: " + e.what()};
  }
  auto violations = validate_all(p);
  if (!violations.empty()) {
    std::string text;
    for (const Violation& v : violations)
      text += s.file + ":" + std::to_string(v.pos.line) + ":" + std::to_string(v.pos.col) +
              ": " + std::string(to_string(v.kind)) + " in " + v.method + ": " + v.message + "\n";
    text.pop_back();
    throw InputError{io::to_json(violations), text};
  }
  if (!s.entries.empty()) {
    for (const std::string& e : s.entries)
      if (!p.has_method(e))
        throw InputError{{{"error", "entries"}, {"message", "unknown entry method " + e}},
                         "error: unknown entry method " + e};
    p.entries = s.entries;
  }
  return p;
}

AnalysisOptions analysis_options(const Settings& s) {
  AnalysisOptions o;
  o.lock_cap = LockCap(s.lock_cap);
  if (s.mutate == "skip-loop") o.mutation = Mutation::SkipLoopBody;
  if (s.mutate == "drop-overlap") o.mutation = Mutation::DropCallOverlap;
  return o;
}

EnumBounds enum_bounds(const Settings& s) {
  EnumBounds b;
  b.loop_unroll = s.loop_unroll;
  b.lock_cap = LockCap(s.lock_cap);
  return b;
}

void print_report_text(const RaceReport& r, bool with_witness) {
  auto field_seq = [&] {
    std::string out;
    for (const FieldName& f : r.field_seq) out += (out.empty() ? "" : ",") + f;
    return out;
  };
  std::cout << "race: " << r.method1 << " x " << r.method2 << " on [" << field_seq() << "]\n";
  for (const ReportedAccess* a : {&r.access1, &r.access2}) {
    std::cout << "  " << to_string(a->record);
    if (a->origin)
      std::cout << "  (" << a->origin->method << " " << a->origin->pos.line << ":"
                << a->origin->pos.col << ")";
    std::cout << "\n";
  }
  if (with_witness && r.witness) {
    const WitnessTrace& w = *r.witness;
    std::cout << "  witness: t1 runs " << w.method1 << ", t2 runs " << w.method2
              << ", both roots at l1\n";
    for (const auto& [t, c] : w.schedule) std::cout << "    " << to_string(t) << ": " << to_string(c) << "\n";
    std::cout << "    pending t1: " << to_string(w.succ1) << ", t2: " << to_string(w.succ2)
              << " at " << to_string(w.racy_addr) << "\n";
  }
}

int cmd_analyze(const Settings& s, bool force_witness) {
  const Program p = load(s);
  const ReportMode mode = s.mode == "relaxed" ? ReportMode::Relaxed : ReportMode::Strict;
  const SummaryTable table = summarize_program(p, analysis_options(s));
  std::vector<RaceReport> reports = report(p, table, mode);
  const bool show_witness = s.witness || force_witness;

  EnumBounds wb;
  wb.lock_cap = LockCap(s.lock_cap);
  std::vector<std::string> failures;
  if (mode == ReportMode::Strict || show_witness) {
    for (RaceReport& r : reports) {
      Reconstruction rec = reconstruct(r, p, wb);
      r.witness = rec.witness;
      if (!rec.ok() && mode == ReportMode::Strict)
        failures.push_back(r.method1 + " x " + r.method2 + ": " + rec.failure);
    }
  }

  if (s.json_out) {
    json arr = json::array();
    for (const RaceReport& r : reports) arr.push_back(io::to_json(r, show_witness));
    json out = {{"reports", arr}};
    if (!failures.empty()) out["witness_failures"] = failures;
    std::cout << out.dump(2) << "\n";
  } else {
    for (const RaceReport& r : reports) print_report_text(r, show_witness);
    std::cout << reports.size() << " race(s) reported (" << to_string(mode) << ")\n";
    for (const std::string& f : failures) std::cerr << "witness failure: " << f << "\n";
  }
  if (!failures.empty()) return kViolation;
  return reports.empty() ? kClean : kRaces;
}

int cmd_oracle_check(const Settings& s) {
  const Program p = load(s);
  const auto checks = oracle_check(p, p.entries, s.oracle_unrolls, analysis_options(s));
  bool all = true;
  json arr = json::array();
  for (const OracleCheck& c : checks) {
    all = all && c.ok();
    if (s.json_out) {
      json j = {{"method", c.method}, {"loop_unroll", c.loop_unroll},
                {"traces", c.traces}, {"pass", c.ok()}};
      if (!c.ok()) j["diff"] = c.diff();
      arr.push_back(j);
    } else {
      std::cout << (c.ok() ? "PASS " : "FAIL ") << c.method << " loop_unroll=" << c.loop_unroll
                << " traces=" << c.traces << "\n";
      if (!c.ok()) std::cout << c.diff();
    }
  }
  if (s.json_out) std::cout << json{{"checks", arr}, {"pass", all}}.dump(2) << "\n";
  return all ? kClean : kViolation;
}

int cmd_dump_summaries(const Settings& s) {
  const Program p = load(s);
  const SummaryTable table = summarize_program(p, analysis_options(s));
  for (const MethodName& m : p.order) std::cout << io::to_json(m, table.at(m).state).dump() << "\n";
  return kClean;
}

int cmd_dump_traces(const Settings& s) {
  const Program p = load(s);
  std::vector<MethodName> methods = p.entries;
  if (!s.method.empty()) {
    if (!p.has_method(s.method)) throw InputError{{{"error", "method"}}, "unknown method " + s.method};
    methods = {s.method};
  }
  const Config init = universal_config(p.fields());
  for (const MethodName& m : methods) {
    if (methods.size() > 1) std::cout << "# " << m << "\n";
    TraceEnumerator en(p, enum_bounds(s));
    en.for_each(p.method(m).body, init, [](const Trace& t, const Config&) {
      std::cout << to_string(t.commands) << "\n";
      return true;
    });
  }
  return kClean;
}

int cmd_fuzz(const Settings& s) {
  FuzzOptions o;
  o.seed = s.seed;
  o.n = s.n;
  o.analysis = analysis_options(s);
  const auto start = std::chrono::steady_clock::now();
  const FuzzStats st = run_fuzz(o);
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  if (s.json_out) {
    json fails = json::array();
    for (const FuzzFailure& f : st.failures)
      fails.push_back({{"kind", to_string(f.kind)}, {"seed", f.seed}, {"detail", f.detail},
                       {"program", to_source(f.program)}, {"shrunk", to_source(f.shrunk)}});
    std::cout << json{{"programs", st.programs},
                      {"oracle_checks", st.totals.oracle_checks},
                      {"traces", st.totals.traces},
                      {"strict_reports", st.totals.strict_reports},
                      {"relaxed_reports", st.totals.relaxed_reports},
                      {"witnesses", st.totals.witnesses},
                      {"failures", fails},
                      {"seconds", secs}}
                     .dump(2)
              << "\n";
  } else {
    std::cout << "programs: " << st.programs << "\n"
              << "oracle checks: " << st.totals.oracle_checks << " (" << st.totals.traces
              << " traces)\n"
              << "strict reports: " << st.totals.strict_reports
              << ", witnesses: " << st.totals.witnesses << "\n"
              << "relaxed reports: " << st.totals.relaxed_reports << "\n"
              << "failures: " << st.failures.size() << "\n"
              << "time: " << secs << " s\n";
    for (const FuzzFailure& f : st.failures) {
      std::cout << "\n" << to_string(f.kind) << " failure, program seed " << f.seed << "\n"
                << f.detail << "\nshrunk program:\n" << to_source(f.shrunk);
    }
  }
  return st.failures.empty() ? kClean : kViolation;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Compositional data-race detection for a small concurrent language"};
  app.require_subcommand(1);
  Settings s;

  auto file_opts = [&](CLI::App* sub) {
    sub->add_option("file", s.file, "Program source")->required()->check(CLI::ExistingFile);
    sub->add_option("--entries", s.entries, "Entry methods (default: all)")->delimiter(',');
    sub->add_option("--lock-cap", s.lock_cap, "Lock count cap")->check(CLI::PositiveNumber);
    sub->add_flag("--json", s.json_out, "JSON output");
  };
  auto mode_opt = [&](CLI::App* sub) {
    sub->add_option("--mode", s.mode, "Report mode")
        ->check(CLI::IsMember({"strict", "relaxed"}));
  };
  auto mutate_opt = [&](CLI::App* sub) {
    sub->add_option("--mutate", s.mutate)
        ->check(CLI::IsMember({"none", "skip-loop", "drop-overlap"}))
        ->group("");
  };

  auto* analyze = app.add_subcommand("analyze", "Report races between entry methods");
  file_opts(analyze);
  mode_opt(analyze);
  mutate_opt(analyze);
  analyze->add_flag("--witness", s.witness, "Print a concrete witness for each report");

  auto* witness = app.add_subcommand("witness", "Reconstruct concrete witnesses for reports");
  file_opts(witness);
  mode_opt(witness);

  auto* oracle = app.add_subcommand("oracle-check", "Compare analysis against bounded traces");
  file_opts(oracle);
  mutate_opt(oracle);
  oracle->add_option("--loop-unroll", s.oracle_unrolls, "Loop unroll bounds to check")
      ->capture_default_str();

  auto* summaries = app.add_subcommand("dump-summaries", "Print method summaries as JSON lines");
  file_opts(summaries);
  mutate_opt(summaries);

  auto* traces = app.add_subcommand("dump-traces", "Print enumerated syntactic traces");
  file_opts(traces);
  traces->add_option("--loop-unroll", s.loop_unroll, "Loop iterations explored");
  traces->add_option("--method", s.method, "Only this method");

  auto* fuzz = app.add_subcommand("fuzz", "Check properties on random programs");
  fuzz->add_option("--seed", s.seed, "Run seed");
  fuzz->add_option("--n", s.n, "Number of programs");
  fuzz->add_option("--lock-cap", s.lock_cap, "Lock count cap")->check(CLI::PositiveNumber);
  fuzz->add_flag("--json", s.json_out, "JSON output");
  mutate_opt(fuzz);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kClean : kInvalid;
  }

  try {
    if (*analyze) return cmd_analyze(s, false);
    if (*witness) return cmd_analyze(s, true);
    if (*oracle) return cmd_oracle_check(s);
    if (*summaries) return cmd_dump_summaries(s);
    if (*traces) return cmd_dump_traces(s);
    if (*fuzz) return cmd_fuzz(s);
  } catch (const InputError& e) {
    if (s.json_out)
      std::cout << e.diag.dump(2) << "\n";
    else
      std::cerr << e.text << "\n";
    return kInvalid;
  } catch (const BoundExceeded& e) {
    std::cerr << "bound exceeded: " << e.what() << "\n";
    return kViolation;
  }
  return kInvalid;
}
