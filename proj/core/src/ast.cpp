#include "stabrace/ast.hpp"

#include <algorithm>
#include <sstream>
#include <stdexcept>

namespace stabrace {

namespace {

unsigned parse_formal_index(const std::string& name) {
  if (name.size() < 4 || name.compare(0, 3, "arg") != 0) return 0;
  if (name[3] == '0') return 0;
  unsigned value = 0;
  for (std::size_t i = 3; i < name.size(); ++i) {
    const char c = name[i];
    if (c < '0' || c > '9') return 0;
    value = value * 10 + static_cast<unsigned>(c - '0');
    if (value > 1'000'000) return 0;
  }
  return value;
}

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

void join_exprs(std::ostream& os, const std::vector<Expr>& es) {
  for (std::size_t i = 0; i < es.size(); ++i) {
    if (i) os << ',';
    os << to_string(es[i]);
  }
}

void collect_fields(const Expr& e, std::set<FieldName>& out) {
  out.insert(e.fields.begin(), e.fields.end());
}

void collect_fields(const Block& b, std::set<FieldName>& out) {
  for (const Stmt& s : b) {
    std::visit(
        overloaded{
            [&](const SimpleStmt& c) {
              if (auto* l = std::get_if<cmd::Load>(&c)) collect_fields(l->src, out);
              if (auto* st = std::get_if<cmd::Store>(&c)) collect_fields(st->dst, out);
            },
            [&](const IfStmt& i) {
              collect_fields(i.then_branch, out);
              collect_fields(i.else_branch, out);
            },
            [&](const WhileStmt& w) { collect_fields(w.body, out); },
            [&](const CallStmt& c) {
              for (const Expr& e : c.actuals) collect_fields(e, out);
            },
        },
        s.node);
  }
}

void collect_callees(const Block& b, std::vector<MethodName>& out) {
  for (const Stmt& s : b) {
    if (auto* i = std::get_if<IfStmt>(&s.node)) {
      collect_callees(i->then_branch, out);
      collect_callees(i->else_branch, out);
    } else if (auto* w = std::get_if<WhileStmt>(&s.node)) {
      collect_callees(w->body, out);
    } else if (auto* c = std::get_if<CallStmt>(&s.node)) {
      if (std::find(out.begin(), out.end(), c->callee) == out.end())
        out.push_back(c->callee);
    }
  }
}

void print_block(std::ostream& os, const Block& b, std::size_t from, int indent);

void print_stmt(std::ostream& os, const Stmt& s, int indent) {
  const std::string pad(static_cast<std::size_t>(indent) * 2, ' ');
  std::visit(
      overloaded{
          [&](const SimpleStmt& c) {
            os << pad
               << std::visit(
                      overloaded{
                          [](const cmd::Skip&) -> std::string { return "skip"; },
                          [](const cmd::Assign& a) {
                            return a.dst.name() + " := " + a.src.name();
                          },
                          [](const cmd::Load& l) {
                            return l.dst.name() + " := " + to_string(l.src);
                          },
                          [](const cmd::Store& st) {
                            return to_string(st.dst) + " := " + st.src.name();
                          },
                          [](const cmd::New& n) { return n.dst.name() + " := new()"; },
                          [](const cmd::Lock&) -> std::string { return "lock()"; },
                          [](const cmd::Unlock&) -> std::string { return "unlock()"; },
                          [](const cmd::Push& p) { return to_string(SimpleStmt{p}); },
                          [](const cmd::Pop&) -> std::string { return "pop"; },
                      },
                      c)
               << ";\n";
          },
          [&](const IfStmt& i) {
            os << pad << "if * {\n";
            print_block(os, i.then_branch, 0, indent + 1);
            os << pad << "} else {\n";
            print_block(os, i.else_branch, 0, indent + 1);
            os << pad << "}\n";
          },
          [&](const WhileStmt& w) {
            os << pad << "while * {\n";
            print_block(os, w.body, 0, indent + 1);
            os << pad << "}\n";
          },
          [&](const CallStmt& c) {
            os << pad << c.callee << '(';
            for (std::size_t k = 0; k < c.actuals.size(); ++k) {
              if (k) os << ", ";
              os << to_string(c.actuals[k]);
            }
            os << ");\n";
          },
      },
      s.node);
}

void print_block(std::ostream& os, const Block& b, std::size_t from, int indent) {
  for (std::size_t i = from; i < b.size(); ++i) print_stmt(os, b[i], indent);
}

}  // namespace

Var::Var(std::string name)
    : name_(std::move(name)), formal_index_(parse_formal_index(name_)) {}

Var Var::formal(unsigned index) { return Var("arg" + std::to_string(index)); }

Expr Expr::extended(const std::vector<FieldName>& more) const {
  Expr out = *this;
  out.fields.insert(out.fields.end(), more.begin(), more.end());
  return out;
}

bool is_prefix(const Expr& a, const Expr& b) {
  if (a.root != b.root || a.fields.size() > b.fields.size()) return false;
  return std::equal(a.fields.begin(), a.fields.end(), b.fields.begin());
}

bool is_proper_prefix(const Expr& a, const Expr& b) {
  return a.fields.size() < b.fields.size() && is_prefix(a, b);
}

std::string to_string(const Expr& e) {
  std::string out = e.root.name();
  for (const FieldName& f : e.fields) {
    out += '.';
    out += f;
  }
  return out;
}

std::string to_string(const SimpleStmt& c) {
  return std::visit(
      overloaded{
          [](const cmd::Skip&) -> std::string { return "skip"; },
          [](const cmd::Assign& a) { return a.dst.name() + ":=" + a.src.name(); },
          [](const cmd::Load& l) { return l.dst.name() + ":=" + to_string(l.src); },
          [](const cmd::Store& s) { return to_string(s.dst) + ":=" + s.src.name(); },
          [](const cmd::New& n) { return n.dst.name() + ":=new()"; },
          [](const cmd::Lock&) -> std::string { return "lock()"; },
          [](const cmd::Unlock&) -> std::string { return "unlock()"; },
          [](const cmd::Push& p) {
            std::ostringstream os;
            os << "push(" << p.callee << ';';
            join_exprs(os, p.actuals);
            os << ')';
            return os.str();
          },
          [](const cmd::Pop&) -> std::string { return "pop"; },
      },
      c);
}

bool operator==(const Stmt& a, const Stmt& b) { return a.node == b.node; }
bool operator==(const IfStmt& a, const IfStmt& b) {
  return a.then_branch == b.then_branch && a.else_branch == b.else_branch;
}
bool operator==(const WhileStmt& a, const WhileStmt& b) { return a.body == b.body; }
bool operator==(const CallStmt& a, const CallStmt& b) {
  return a.callee == b.callee && a.actuals == b.actuals;
}

const Method& Program::method(const MethodName& name) const {
  auto it = methods.find(name);
  if (it == methods.end()) throw std::out_of_range("unknown method: " + name);
  return it->second;
}

std::set<FieldName> Program::fields() const {
  std::set<FieldName> out;
  for (const auto& [_, m] : methods) collect_fields(m.body, out);
  return out;
}

std::vector<MethodName> callees(const Method& m) {
  std::vector<MethodName> out;
  collect_callees(m.body, out);
  return out;
}

std::string to_source(const Method& m) {
  std::ostringstream os;
  os << "method " << m.name << '(';
  for (unsigned i = 1; i <= m.arity; ++i) {
    if (i > 1) os << ", ";
    os << "arg" << i;
  }
  os << ") {\n";
  std::size_t from = 0;
  if (!m.body.empty()) {
    if (auto* c = std::get_if<SimpleStmt>(&m.body.front().node);
        c && std::holds_alternative<cmd::Skip>(*c))
      from = 1;
  }
  print_block(os, m.body, from, 1);
  os << "}\n";
  return os.str();
}

std::string to_source(const Program& p) {
  std::string out;
  for (const MethodName& name : p.order) {
    if (!out.empty()) out += '\n';
    out += to_source(p.method(name));
  }
  return out;
}

}  // namespace stabrace
