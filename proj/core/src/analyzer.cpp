#include "stabrace/analyzer.hpp"

#include <set>

#include "stabrace/abstraction.hpp"

namespace stabrace {

namespace {

void add_fml(std::set<Expr>& w, const Expr& e) {
  if (e.rooted_at_formal()) w.insert(e);
}

}  // namespace

std::optional<Expr> subst_actuals(const Expr& e, const std::vector<Expr>& actuals) {
  if (!e.root.is_formal()) return std::nullopt;
  const unsigned i = e.root.formal_index();
  if (i > actuals.size()) return std::nullopt;
  Expr out = actuals[i - 1].extended(e.fields);
  if (!out.rooted_at_formal()) return std::nullopt;
  return out;
}

AbstractState transfer_simple(const SimpleStmt& c, const AbstractState& d,
                              const AnalysisOptions& opts) {
  AbstractState out = d;
  if (auto* a = std::get_if<cmd::Assign>(&c)) {
    add_fml(out.wobbly, Expr(a->dst));
    add_fml(out.wobbly, Expr(a->src));
  } else if (auto* l = std::get_if<cmd::Load>(&c)) {
    add_fml(out.wobbly, Expr(l->dst));
    add_fml(out.wobbly, l->src);
    if (l->src.rooted_at_formal())
      out.accesses.insert({AccessKind::Read, l->src, d.lock});
  } else if (auto* s = std::get_if<cmd::Store>(&c)) {
    add_fml(out.wobbly, Expr(s->src));
    add_fml(out.wobbly, s->dst);
    if (s->dst.rooted_at_formal())
      out.accesses.insert({AccessKind::Write, s->dst, d.lock});
  } else if (auto* n = std::get_if<cmd::New>(&c)) {
    add_fml(out.wobbly, Expr(n->dst));
  } else if (std::holds_alternative<cmd::Lock>(c)) {
    out.lock = opts.lock_cap.incr(d.lock);
  } else if (std::holds_alternative<cmd::Unlock>(c)) {
    out.lock = LockCap::decr(d.lock);
  }
  return out;
}

std::vector<MethodName> reverse_topological_order(const Program& p) {
  std::vector<MethodName> out;
  std::map<MethodName, int> state;  // 0 unvisited, 1 on stack, 2 done
  auto visit = [&](auto&& self, const MethodName& m) -> void {
    int& st = state[m];
    if (st == 2) return;
    if (st == 1) throw std::logic_error("recursive call involving " + m);
    st = 1;
    for (const MethodName& n : callees(p.method(m))) self(self, n);
    state[m] = 2;
    out.push_back(m);
  };
  for (const MethodName& m : p.order) visit(visit, m);
  return out;
}

Analyzer::Analyzer(const Program& p, AnalysisOptions opts)
    : program_(p), opts_(opts), order_(reverse_topological_order(p)) {
  for (const MethodName& m : order_) {
    Summary s;
    s.state = analyze(p.method(m).body, AbstractState::bottom(), m, &s.origins);
    table_.emplace(m, std::move(s));
  }
}

const Summary& Analyzer::summary(const MethodName& m) const {
  auto it = table_.find(m);
  if (it == table_.end())
    throw AnalysisError(AnalysisError::Kind::MissingSummary, "no summary for method " + m);
  return it->second;
}

AbstractState Analyzer::analyze_compound(const Block& b, const AbstractState& d) const {
  return analyze(b, d, {}, nullptr);
}

AbstractState Analyzer::apply_summary(const Method& callee, const std::vector<Expr>& actuals,
                                      const AbstractState& d) const {
  return call(callee, actuals, d, {}, nullptr);
}

AbstractState Analyzer::analyze(const Block& b, AbstractState d, const MethodName& owner,
                                std::map<AccessRecord, AccessOrigin>* origins) const {
  for (const Stmt& s : b) {
    if (auto* c = std::get_if<SimpleStmt>(&s.node)) {
      AbstractState next = transfer_simple(*c, d, opts_);
      if (origins)
        for (const AccessRecord& a : next.accesses)
          if (!d.accesses.count(a)) origins->emplace(a, AccessOrigin{owner, s.pos});
      d = std::move(next);
    } else if (auto* i = std::get_if<IfStmt>(&s.node)) {
      AbstractState then_d = analyze(i->then_branch, d, owner, origins);
      AbstractState else_d = analyze(i->else_branch, d, owner, origins);
      d = join(then_d, else_d);
    } else if (auto* w = std::get_if<WhileStmt>(&s.node)) {
      if (opts_.mutation != Mutation::SkipLoopBody)
        join_into(d, analyze(w->body, d, owner, origins));
    } else if (auto* call_stmt = std::get_if<CallStmt>(&s.node)) {
      d = call(program_.method(call_stmt->callee), call_stmt->actuals, d,
               AccessOrigin{owner, s.pos}, origins);
    }
  }
  return d;
}

AbstractState Analyzer::call(const Method& callee, const std::vector<Expr>& actuals,
                             const AbstractState& d, const AccessOrigin& site,
                             std::map<AccessRecord, AccessOrigin>* origins) const {
  if (actuals.size() != callee.arity)
    throw AnalysisError(AnalysisError::Kind::ArityMismatch,
                        "method " + callee.name + " expects " + std::to_string(callee.arity) +
                            " argument(s), got " + std::to_string(actuals.size()));
  const Summary& sum = summary(callee.name);

  AbstractState out = d;
  if (opts_.mutation != Mutation::DropCallOverlap)
    for (std::size_t i : self_overlapping(actuals)) add_fml(out.wobbly, actuals[i]);
  for (const Expr& e : sum.state.wobbly)
    if (auto s = subst_actuals(e, actuals)) out.wobbly.insert(std::move(*s));
  out.lock = opts_.lock_cap.add(d.lock, sum.state.lock);
  for (const AccessRecord& a : sum.state.accesses) {
    auto path = subst_actuals(a.path, actuals);
    if (!path) continue;
    AccessRecord shifted{a.kind, std::move(*path), opts_.lock_cap.add(d.lock, a.lock)};
    if (origins && !out.accesses.count(shifted)) {
      auto o = sum.origins.find(a);
      origins->emplace(shifted, o != sum.origins.end() ? o->second : site);
    }
    out.accesses.insert(std::move(shifted));
  }
  return out;
}

SummaryTable summarize_program(const Program& p, const AnalysisOptions& opts) {
  return Analyzer(p, opts).summaries();
}

AbstractState analyze_method(const Program& p, const MethodName& m,
                             const AnalysisOptions& opts) {
  return Analyzer(p, opts).summary(m).state;
}

}  // namespace stabrace
