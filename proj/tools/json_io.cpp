#include "json_io.hpp"

#include <stdexcept>

namespace stabrace::io {

json loc_json(Loc l) { return l.is_nil() ? json(nullptr) : json(l.id); }

namespace {

json frame_json(const Frame& f) {
  json bindings = json::object();
  for (const auto& [v, l] : f.bindings()) bindings[v.name()] = loc_json(l);
  return {{"fallback", loc_json(f.fallback())}, {"bindings", bindings}};
}

AccessKind kind_from_string(const std::string& s) {
  if (s == "read") return AccessKind::Read;
  if (s == "write") return AccessKind::Write;
  throw std::invalid_argument("unknown access kind: " + s);
}

}  // namespace

json to_json(const TwoThreadConfig& cfg) {
  json heap = json::array();
  for (const auto& [a, v] : cfg.heap.cells()) heap.push_back({a.loc.id, a.field, loc_json(v)});
  json stacks = json::array();
  for (const CallStack& st : cfg.stacks) {
    json frames = json::array();
    for (const Frame& f : st) frames.push_back(frame_json(f));
    stacks.push_back(frames);
  }
  return {{"heap", heap}, {"stacks", stacks}, {"locks", {cfg.locks[0], cfg.locks[1]}}};
}

json to_json(const WitnessTrace& w) {
  json schedule = json::array();
  for (const auto& [t, c] : w.schedule) schedule.push_back({to_string(t), to_string(c)});
  return {{"initial", to_json(w.initial)},
          {"schedule", schedule},
          {"racy_addr", {w.racy_addr.loc.id, w.racy_addr.field}},
          {"threads", {w.method1, w.method2}},
          {"pending", {to_string(w.succ1), to_string(w.succ2)}}};
}

json to_json(const RaceReport& r, bool with_witness) {
  json j = {{"method1", r.method1},
            {"method2", r.method2},
            {"path1", to_string(r.access1.record.path)},
            {"path2", to_string(r.access2.record.path)},
            {"kind1", to_string(r.access1.record.kind)},
            {"kind2", to_string(r.access2.record.kind)},
            {"lock1", r.access1.record.lock},
            {"lock2", r.access2.record.lock},
            {"mode", to_string(r.mode)}};
  if (with_witness && r.witness) j["witness"] = to_json(*r.witness);
  return j;
}

json to_json(const MethodName& m, const AbstractState& s) {
  json wobbly = json::array();
  for (const Expr& e : s.wobbly) wobbly.push_back(to_string(e));
  json accesses = json::array();
  for (const AccessRecord& a : s.accesses)
    accesses.push_back(
        {{"kind", to_string(a.kind)}, {"path", to_string(a.path)}, {"lock", a.lock}});
  return {{"method", m}, {"wobbly", wobbly}, {"lock_delta", s.lock}, {"accesses", accesses}};
}

json to_json(const ParseError& e) {
  json j = {{"error", "parse"},
            {"kind", to_string(e.kind())},
            {"line", e.pos().line},
            {"col", e.pos().col},
            {"message", e.what()}};
  if (!e.expected().empty()) j["expected"] = e.expected();
  return j;
}

json to_json(const std::vector<Violation>& vs) {
  json arr = json::array();
  for (const Violation& v : vs)
    arr.push_back({{"kind", to_string(v.kind)},
                   {"method", v.method},
                   {"line", v.pos.line},
                   {"col", v.pos.col},
                   {"message", v.message},
                   {"subjects", v.subjects}});
  return {{"error", "validation"}, {"violations", arr}};
}

Expr expr_from_string(const std::string& s) {
  std::vector<std::string> parts;
  std::size_t start = 0;
  for (;;) {
    const std::size_t dot = s.find('.', start);
    parts.push_back(s.substr(start, dot - start));
    if (dot == std::string::npos) break;
    start = dot + 1;
  }
  for (const std::string& p : parts)
    if (p.empty()) throw std::invalid_argument("malformed expression: " + s);
  return Expr(Var(parts.front()), std::vector<FieldName>(parts.begin() + 1, parts.end()));
}

RaceReport report_from_json(const json& j) {
  RaceReport r;
  r.method1 = j.at("method1").get<std::string>();
  r.method2 = j.at("method2").get<std::string>();
  r.access1.record = {kind_from_string(j.at("kind1").get<std::string>()),
                      expr_from_string(j.at("path1").get<std::string>()),
                      j.at("lock1").get<unsigned>()};
  r.access2.record = {kind_from_string(j.at("kind2").get<std::string>()),
                      expr_from_string(j.at("path2").get<std::string>()),
                      j.at("lock2").get<unsigned>()};
  r.field_seq = r.access1.record.path.fields;
  const std::string mode = j.at("mode").get<std::string>();
  if (mode != "strict" && mode != "relaxed") throw std::invalid_argument("unknown mode: " + mode);
  r.mode = mode == "strict" ? ReportMode::Strict : ReportMode::Relaxed;
  return r;
}

}  // namespace stabrace::io
