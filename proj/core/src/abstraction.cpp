#include "stabrace/abstraction.hpp"

namespace stabrace {

std::optional<Expr> subst_expr(const Expr& e, const SubstStack& stack) {
  Expr cur = e;
  for (auto frame = stack.rbegin(); frame != stack.rend(); ++frame) {
    if (!cur.root.is_formal()) return std::nullopt;
    auto it = frame->find(cur.root.formal_index());
    if (it == frame->end()) return std::nullopt;
    cur = it->second.extended(cur.fields);
  }
  if (!cur.root.is_formal()) return std::nullopt;
  return cur;
}

std::vector<std::size_t> self_overlapping(std::span<const Expr> actuals) {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < actuals.size(); ++i) {
    for (std::size_t j = 0; j < actuals.size(); ++j) {
      if (i == j) continue;
      if (is_prefix(actuals[i], actuals[j]) || is_prefix(actuals[j], actuals[i])) {
        out.push_back(i);
        break;
      }
    }
  }
  return out;
}

void ExecFolder::add_wobbly(const Expr& e) {
  if (auto s = subst_expr(e, stack_)) state_.wobbly.insert(std::move(*s));
}

void ExecFolder::step(const SimpleStmt& c) {
  if (auto* a = std::get_if<cmd::Assign>(&c)) {
    add_wobbly(Expr(a->dst));
    add_wobbly(Expr(a->src));
  } else if (auto* l = std::get_if<cmd::Load>(&c)) {
    add_wobbly(Expr(l->dst));
    add_wobbly(l->src);
    if (auto p = subst_expr(l->src, stack_))
      state_.accesses.insert({AccessKind::Read, std::move(*p), state_.lock});
  } else if (auto* s = std::get_if<cmd::Store>(&c)) {
    add_wobbly(Expr(s->src));
    add_wobbly(s->dst);
    if (auto p = subst_expr(s->dst, stack_))
      state_.accesses.insert({AccessKind::Write, std::move(*p), state_.lock});
  } else if (auto* n = std::get_if<cmd::New>(&c)) {
    add_wobbly(Expr(n->dst));
  } else if (std::holds_alternative<cmd::Lock>(c)) {
    state_.lock = cap_.incr(state_.lock);
  } else if (std::holds_alternative<cmd::Unlock>(c)) {
    state_.lock = LockCap::decr(state_.lock);
  } else if (auto* p = std::get_if<cmd::Push>(&c)) {
    for (std::size_t i : self_overlapping(p->actuals)) add_wobbly(p->actuals[i]);
    SubstFrame frame;
    for (std::size_t i = 0; i < p->actuals.size(); ++i)
      frame.emplace(static_cast<unsigned>(i + 1), p->actuals[i]);
    stack_.push_back(std::move(frame));
  } else if (std::holds_alternative<cmd::Pop>(c)) {
    if (stack_.empty()) throw PopOnEmpty("pop without a matching push in syntactic trace");
    stack_.pop_back();
  }
}

FoldResult exec_fold(std::span<const SimpleStmt> syntactic, LockCap cap) {
  ExecFolder folder(cap);
  for (const SimpleStmt& c : syntactic) folder.step(c);
  return {folder.state(), folder.substitutions()};
}

AbstractState alpha(std::span<const Trace> traces, LockCap cap) {
  AlphaAccumulator acc(cap);
  for (const Trace& t : traces) acc.add(t.commands);
  return acc.result();
}

void AlphaAccumulator::add(std::span<const SimpleStmt> syntactic) {
  join_into(acc_, exec_fold(syntactic, cap_).state);
  ++count_;
}

}  // namespace stabrace
