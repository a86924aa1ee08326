#include "stabrace/validate.hpp"

#include <algorithm>
#include <map>
#include <set>

namespace stabrace {

namespace {

void check_locking(const Method& m, const Block& b, SourcePos block_pos,
                   std::vector<Violation>& out) {
  int depth = 0;
  for (const Stmt& s : b) {
    if (auto* c = std::get_if<SimpleStmt>(&s.node)) {
      if (std::holds_alternative<cmd::Lock>(*c)) {
        ++depth;
      } else if (std::holds_alternative<cmd::Unlock>(*c)) {
        if (depth == 0) {
          out.push_back({ViolationKind::UnmatchedUnlock, m.name, s.pos,
                         "unlock() without a preceding lock() in the same block", {}});
        } else {
          --depth;
        }
      }
    } else if (auto* i = std::get_if<IfStmt>(&s.node)) {
      check_locking(m, i->then_branch, s.pos, out);
      check_locking(m, i->else_branch, s.pos, out);
    } else if (auto* w = std::get_if<WhileStmt>(&s.node)) {
      check_locking(m, w->body, s.pos, out);
    }
  }
  if (depth != 0)
    out.push_back({ViolationKind::UnbalancedBlock, m.name, block_pos,
                   std::to_string(depth) + " lock() left unreleased at end of block", {}});
}

void check_anf(const Method& m, const Block& b, std::vector<Violation>& out) {
  for (const Stmt& s : b) {
    if (auto* c = std::get_if<SimpleStmt>(&s.node)) {
      if (auto* st = std::get_if<cmd::Store>(c); st && st->src.is_formal()) {
        out.push_back({ViolationKind::AnfViolation, m.name, s.pos,
                       "store of formal '" + st->src.name() + "' into '" +
                           to_string(st->dst) + "'; rewrite as 't := " +
                           st->src.name() + "; " + to_string(st->dst) + " := t;'",
                       {st->src.name()}});
      }
    } else if (auto* i = std::get_if<IfStmt>(&s.node)) {
      check_anf(m, i->then_branch, out);
      check_anf(m, i->else_branch, out);
    } else if (auto* w = std::get_if<WhileStmt>(&s.node)) {
      check_anf(m, w->body, out);
    }
  }
}

class InitChecker {
public:
  InitChecker(const Method& m, std::vector<Violation>& out) : m_(m), out_(out) {}

  std::set<Var> run(const Block& b, std::set<Var> assigned) {
    for (const Stmt& s : b) {
      if (auto* c = std::get_if<SimpleStmt>(&s.node)) {
        simple(*c, s.pos, assigned);
      } else if (auto* i = std::get_if<IfStmt>(&s.node)) {
        std::set<Var> a = run(i->then_branch, assigned);
        std::set<Var> e = run(i->else_branch, assigned);
        std::set<Var> both;
        std::set_intersection(a.begin(), a.end(), e.begin(), e.end(),
                              std::inserter(both, both.end()));
        assigned = std::move(both);
      } else if (auto* w = std::get_if<WhileStmt>(&s.node)) {
        run(w->body, assigned);
      } else if (auto* call = std::get_if<CallStmt>(&s.node)) {
        for (const Expr& e : call->actuals) use(e.root, s.pos, assigned);
      }
    }
    return assigned;
  }

private:
  void use(const Var& v, SourcePos pos, const std::set<Var>& assigned) {
    if (v.is_formal() || assigned.count(v)) return;
    for (const Violation& prev : out_)
      if (prev.pos == pos && prev.subjects == std::vector<std::string>{v.name()}) return;
    out_.push_back({ViolationKind::UseBeforeInit, m_.name, pos,
                    "local '" + v.name() + "' may be read before it is assigned",
                    {v.name()}});
  }

  void simple(const SimpleStmt& c, SourcePos pos, std::set<Var>& assigned) {
    if (auto* a = std::get_if<cmd::Assign>(&c)) {
      use(a->src, pos, assigned);
      assigned.insert(a->dst);
    } else if (auto* l = std::get_if<cmd::Load>(&c)) {
      use(l->src.root, pos, assigned);
      assigned.insert(l->dst);
    } else if (auto* st = std::get_if<cmd::Store>(&c)) {
      use(st->dst.root, pos, assigned);
      use(st->src, pos, assigned);
    } else if (auto* n = std::get_if<cmd::New>(&c)) {
      assigned.insert(n->dst);
    }
  }

  const Method& m_;
  std::vector<Violation>& out_;
};

}  // namespace

std::string_view to_string(ViolationKind kind) {
  switch (kind) {
    case ViolationKind::UnmatchedUnlock: return "UnmatchedUnlock";
    case ViolationKind::UnbalancedBlock: return "UnbalancedBlock";
    case ViolationKind::AnfViolation: return "ANFViolation";
    case ViolationKind::UseBeforeInit: return "UseBeforeInit";
    case ViolationKind::RecursionCycle: return "RecursionCycle";
  }
  return "Violation";
}

std::vector<Violation> validate_balanced_locking(const Program& p) {
  std::vector<Violation> out;
  for (const MethodName& name : p.order) {
    const Method& m = p.method(name);
    check_locking(m, m.body, m.pos, out);
  }
  return out;
}

std::vector<Violation> validate_anf(const Program& p) {
  std::vector<Violation> out;
  for (const MethodName& name : p.order) {
    const Method& m = p.method(name);
    check_anf(m, m.body, out);
  }
  return out;
}

std::vector<Violation> validate_definite_init(const Program& p) {
  std::vector<Violation> out;
  for (const MethodName& name : p.order) {
    const Method& m = p.method(name);
    InitChecker(m, out).run(m.body, {});
  }
  return out;
}

std::vector<Violation> validate_no_recursion(const Program& p) {
  enum class Color { White, Gray, Black };
  std::map<MethodName, Color> color;
  for (const auto& [name, _] : p.methods) color[name] = Color::White;
  std::vector<MethodName> stack;
  std::vector<Violation> out;

  auto dfs = [&](auto&& self, const MethodName& m) -> bool {
    color[m] = Color::Gray;
    stack.push_back(m);
    for (const MethodName& n : callees(p.method(m))) {
      if (!p.has_method(n)) continue;
      if (color[n] == Color::Gray) {
        auto start = std::find(stack.begin(), stack.end(), n);
        std::vector<std::string> cycle(start, stack.end());
        std::string desc;
        for (const auto& c : cycle) desc += c + " -> ";
        desc += n;
        out.push_back({ViolationKind::RecursionCycle, n, p.method(n).pos,
                       "recursive call cycle: " + desc, cycle});
        return true;
      }
      if (color[n] == Color::White && self(self, n)) return true;
    }
    stack.pop_back();
    color[m] = Color::Black;
    return false;
  };

  for (const auto& [name, _] : p.methods)
    if (color[name] == Color::White && dfs(dfs, name)) break;
  return out;
}

std::vector<Violation> validate_all(const Program& p) {
  std::vector<Violation> out;
  for (auto* fn : {&validate_balanced_locking, &validate_anf,
                   &validate_definite_init, &validate_no_recursion}) {
    auto v = fn(p);
    out.insert(out.end(), std::make_move_iterator(v.begin()),
               std::make_move_iterator(v.end()));
  }
  return out;
}

}  // namespace stabrace
