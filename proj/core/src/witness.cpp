#include "stabrace/witness.hpp"

#include <algorithm>

#include "stabrace/abstraction.hpp"

namespace stabrace {

TwoThreadConfig build_initial_state(const Var& root1, const Var& root2,
                                    const std::vector<FieldName>& fs,
                                    const std::set<FieldName>& field_set) {
  const std::uint32_t n = static_cast<std::uint32_t>(fs.size());
  std::set<FieldName> all = field_set;
  all.insert(fs.begin(), fs.end());
  Heap h;
  for (std::uint32_t j = 0; j <= n; ++j)
    for (const FieldName& f : all) h.set({Loc{j}, f}, Loc{0});
  for (std::uint32_t j = 1; j < n; ++j) h.set({Loc{j}, fs[j - 1]}, Loc{j + 1});

  TwoThreadConfig cfg;
  cfg.heap = std::move(h);
  Frame s1(Loc{0}), s2(Loc{0});
  s1.set(root1, Loc{n >= 1 ? 1u : 0u});
  s2.set(root2, Loc{n >= 1 ? 1u : 0u});
  cfg.stacks[0] = {s1};
  cfg.stacks[1] = {s2};
  return cfg;
}

std::vector<Address> footprint_domain(const Expr& path, const Frame& s, const Heap& h) {
  std::vector<Address> out;
  Loc cur = s.get(path.root);
  for (std::size_t i = 0; i < path.fields.size(); ++i) {
    if (cur.is_nil()) return {};
    Address a{cur, path.fields[i]};
    out.push_back(a);
    if (i + 1 == path.fields.size()) break;
    auto next = h.get(a);
    if (!next) return {};
    cur = *next;
  }
  return out;
}

namespace {

std::set<Loc> footprint_locs(const std::vector<Address>& dom) {
  std::set<Loc> out;
  for (const Address& a : dom) out.insert(a.loc);
  return out;
}

}  // namespace

bool is_disconnected(const Expr& path, const Frame& s, const Heap& h) {
  const auto dom = footprint_domain(path, s, h);
  if (dom.size() != path.fields.size() || dom.empty()) return false;
  const std::set<Loc> locs = footprint_locs(dom);
  if (locs.count(s.fallback())) return false;
  for (const auto& [v, l] : s.bindings())
    if (!(v == path.root) && locs.count(l)) return false;
  const std::set<Address> dom_set(dom.begin(), dom.end());
  for (const auto& [a, v] : h.cells())
    if (locs.count(v) && !dom_set.count(a)) return false;
  return true;
}

bool is_acyclic(const Expr& path, const Frame& s, const Heap& h) {
  const auto dom = footprint_domain(path, s, h);
  if (dom.size() != path.fields.size()) return false;
  for (std::size_t i = 0; i < dom.size(); ++i) {
    auto v = h.get(dom[i]);
    if (!v) continue;
    for (std::size_t j = 0; j <= i; ++j)
      if (*v == dom[j].loc) return false;
  }
  return true;
}

bool is_preserved(const Expr& path, const Frame& s, const Heap& h, const Frame& s2,
                  const Heap& h2) {
  if (s.get(path.root) != s2.get(path.root)) return false;
  const auto d1 = footprint_domain(path, s, h);
  const auto d2 = footprint_domain(path, s2, h2);
  if (d1 != d2 || d1.size() != path.fields.size()) return false;
  for (std::size_t i = 0; i + 1 < d1.size(); ++i)
    if (h.get(d1[i]) != h2.get(d1[i])) return false;
  return is_disconnected(path, s, h) && is_acyclic(path, s, h) &&
         is_disconnected(path, s2, h2) && is_acyclic(path, s2, h2);
}

std::optional<AccessPrefix> find_access_prefix(const Program& p, const Block& body,
                                               const Config& init, const AccessRecord& target,
                                               const EnumBounds& bounds) {
  TraceEnumerator en(p, bounds);
  std::optional<Trace> best;
  std::size_t best_len = 0;

  en.for_each(body, init, [&](const Trace& t, const Config&) {
    ExecFolder folder(bounds.lock_cap);
    const std::size_t limit = best ? std::min(best_len, t.commands.size()) : t.commands.size();
    for (std::size_t i = 0; i < limit; ++i) {
      const SimpleStmt& c = t.commands[i];
      const Expr* path = nullptr;
      AccessKind kind{};
      if (auto* l = std::get_if<cmd::Load>(&c)) {
        path = &l->src;
        kind = AccessKind::Read;
      } else if (auto* s = std::get_if<cmd::Store>(&c)) {
        path = &s->dst;
        kind = AccessKind::Write;
      }
      if (path && kind == target.kind && folder.state().lock == target.lock) {
        auto sub = subst_expr(*path, folder.substitutions());
        if (sub && *sub == target.path) {
          best = t;
          best_len = i;
          return true;
        }
      }
      folder.step(c);
    }
    return true;
  });
  if (!best) return std::nullopt;

  AccessPrefix out;
  out.trace = *best;
  const auto states = en.materialize(body, init, out.trace);
  out.prefix.assign(states.begin(), states.begin() + static_cast<std::ptrdiff_t>(best_len));
  out.config = best_len == 0 ? init : out.prefix.back().cfg;
  out.pending = out.trace.commands[best_len];
  const Expr& path = std::holds_alternative<cmd::Load>(out.pending)
                         ? std::get<cmd::Load>(out.pending).src
                         : std::get<cmd::Store>(out.pending).dst;
  auto addr = eval_address(path, out.config.stack.back(), out.config.heap);
  if (!addr) return std::nullopt;
  out.address = *addr;
  return out;
}

namespace {

bool preserved_along(const Expr& path, const Frame& s0, const Heap& h0,
                     const std::vector<ConcreteState>& prefix) {
  for (const ConcreteState& st : prefix) {
    if (st.cfg.stack.size() != 1) continue;
    if (!is_preserved(path, s0, h0, st.cfg.stack.front(), st.cfg.heap)) return false;
  }
  return true;
}

}  // namespace

Reconstruction reconstruct(const RaceReport& report, const Program& p,
                           const EnumBounds& bounds) {
  Reconstruction out;
  if (report.access1.record.path.fields != report.access2.record.path.fields) {
    out.failure = "racy paths have different field sequences";
    return out;
  }
  if (report.access1.record.path.fields.empty()) {
    out.failure = "racy path has no fields";
    return out;
  }

  // Thread 1 runs the unprotected access.
  bool flip = report.access1.record.lock != 0 && report.access2.record.lock == 0;
  const MethodName& m1 = flip ? report.method2 : report.method1;
  const MethodName& m2 = flip ? report.method1 : report.method2;
  const AccessRecord& a1 = flip ? report.access2.record : report.access1.record;
  const AccessRecord& a2 = flip ? report.access1.record : report.access2.record;
  if (a1.lock != 0) {
    out.failure = "neither access is unprotected";
    return out;
  }

  const std::set<FieldName> fields = p.fields();
  const TwoThreadConfig init =
      build_initial_state(a1.path.root, a2.path.root, a1.path.fields, fields);
  for (std::size_t t = 0; t < 2; ++t) {
    const Expr& path = t == 0 ? a1.path : a2.path;
    if (!is_disconnected(path, init.stacks[t].front(), init.heap) ||
        !is_acyclic(path, init.stacks[t].front(), init.heap)) {
      out.failure = "initial state is not disconnected and acyclic";
      return out;
    }
  }

  Config c1{init.stacks[0], init.heap, 0};
  auto pre1 = find_access_prefix(p, p.method(m1).body, c1, a1, bounds);
  if (!pre1) {
    out.failure = "no trace of " + m1 + " reaches " + to_string(a1.path);
    return out;
  }
  if (!preserved_along(a1.path, c1.stack.front(), c1.heap, pre1->prefix)) {
    out.failure = "path " + to_string(a1.path) + " not preserved in " + m1;
    return out;
  }

  Config c2{init.stacks[1], pre1->config.heap, 0};
  auto pre2 = find_access_prefix(p, p.method(m2).body, c2, a2, bounds);
  if (!pre2) {
    out.failure = "no trace of " + m2 + " reaches " + to_string(a2.path);
    return out;
  }
  if (!preserved_along(a2.path, c2.stack.front(), c2.heap, pre2->prefix)) {
    out.failure = "path " + to_string(a2.path) + " not preserved in " + m2;
    return out;
  }

  auto w = std::make_shared<WitnessTrace>();
  w->initial = init;
  for (const ConcreteState& st : pre1->prefix) w->schedule.emplace_back(ThreadId::T1, st.cmd);
  for (const ConcreteState& st : pre2->prefix) w->schedule.emplace_back(ThreadId::T2, st.cmd);
  w->succ1 = pre1->pending;
  w->succ2 = pre2->pending;
  w->method1 = m1;
  w->method2 = m2;
  w->racy_addr = pre1->address;
  w->final_heap = pre2->config.heap;

  if (!verify_witness(*w, p, bounds)) {
    out.failure = "schedule does not reproduce a race at " + to_string(w->racy_addr);
    return out;
  }
  out.witness = std::move(w);
  return out;
}

bool verify_witness(const WitnessTrace& w, const Program& p, const EnumBounds& bounds) {
  const StepEnv env = StepEnv::from(p, bounds);
  auto trace = replay_schedule(w.schedule, w.initial, env);
  if (!trace) return false;
  if (!(trace->final_config().heap == w.final_heap)) return false;
  auto ev = check_race(*trace, w.succ1, w.succ2, env);
  return ev && ev->address == w.racy_addr;
}

}  // namespace stabrace
