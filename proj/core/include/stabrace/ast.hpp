#pragma once

// Abstract syntax of the analysed language: one implicit class, a single
// reentrant lock, nondeterministic branching and looping, and non-recursive
// methods whose formals are always named arg1..argn.

#include <compare>
#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <variant>
#include <vector>

namespace stabrace {

using FieldName = std::string;
using MethodName = std::string;

struct SourcePos {
  int line = 0;
  int col = 0;

  auto operator<=>(const SourcePos&) const = default;
};

/// A program variable. Identifiers of the form `argN` (N >= 1, no leading
/// zero) are formals; everything else is a local.
class Var {
public:
  Var() = default;
  explicit Var(std::string name);

  static Var formal(unsigned index);

  const std::string& name() const { return name_; }
  /// 1-based formal index, or 0 for a local.
  unsigned formal_index() const { return formal_index_; }
  bool is_formal() const { return formal_index_ != 0; }

  bool operator==(const Var& other) const { return name_ == other.name_; }
  std::strong_ordering operator<=>(const Var& other) const {
    return name_ <=> other.name_;
  }

private:
  std::string name_;
  unsigned formal_index_ = 0;
};

/// A variable followed by a (possibly empty) field sequence. With an empty
/// field sequence this is a bare variable; otherwise it is an access path.
struct Expr {
  Var root;
  std::vector<FieldName> fields;

  Expr() = default;
  Expr(Var r, std::vector<FieldName> fs = {})
      : root(std::move(r)), fields(std::move(fs)) {}

  bool is_var() const { return fields.empty(); }
  bool is_path() const { return !fields.empty(); }
  bool rooted_at_formal() const { return root.is_formal(); }

  /// This expression with `more` appended to its field sequence.
  Expr extended(const std::vector<FieldName>& more) const;

  bool operator==(const Expr&) const = default;
  auto operator<=>(const Expr&) const = default;
};

/// Reflexive prefix order: same root and `a.fields` is a prefix of
/// `b.fields`. A bare variable is a prefix of every path rooted at it.
bool is_prefix(const Expr& a, const Expr& b);
bool is_proper_prefix(const Expr& a, const Expr& b);

std::string to_string(const Expr& e);

// Simple statements. Push and Pop are runtime-only; the parser never
// produces them.
namespace cmd {
struct Skip {
  auto operator<=>(const Skip&) const = default;
};
struct Assign {
  Var dst;
  Var src;
  auto operator<=>(const Assign&) const = default;
};
struct Load {
  Var dst;
  Expr src;
  auto operator<=>(const Load&) const = default;
};
struct Store {
  Expr dst;
  Var src;
  auto operator<=>(const Store&) const = default;
};
struct New {
  Var dst;
  auto operator<=>(const New&) const = default;
};
struct Lock {
  auto operator<=>(const Lock&) const = default;
};
struct Unlock {
  auto operator<=>(const Unlock&) const = default;
};
struct Push {
  MethodName callee;
  std::vector<Expr> actuals;
  auto operator<=>(const Push&) const = default;
};
struct Pop {
  auto operator<=>(const Pop&) const = default;
};
}  // namespace cmd

using SimpleStmt = std::variant<cmd::Skip, cmd::Assign, cmd::Load, cmd::Store,
                                cmd::New, cmd::Lock, cmd::Unlock, cmd::Push,
                                cmd::Pop>;

/// Compact rendering used in trace dumps: `x:=arg1.f`, `push(m;e1,e2)`.
std::string to_string(const SimpleStmt& c);

struct Stmt;
using Block = std::vector<Stmt>;

struct IfStmt {
  Block then_branch;
  Block else_branch;
};

struct WhileStmt {
  Block body;
};

struct CallStmt {
  MethodName callee;
  std::vector<Expr> actuals;
};

struct Stmt {
  std::variant<SimpleStmt, IfStmt, WhileStmt, CallStmt> node;
  SourcePos pos;
};

/// Structural equality; source positions are ignored.
bool operator==(const Stmt& a, const Stmt& b);
bool operator==(const IfStmt& a, const IfStmt& b);
bool operator==(const WhileStmt& a, const WhileStmt& b);
bool operator==(const CallStmt& a, const CallStmt& b);

struct Method {
  MethodName name;
  unsigned arity = 0;
  /// Always starts with an implicit `skip`.
  Block body;
  SourcePos pos;

  bool operator==(const Method& o) const {
    return name == o.name && arity == o.arity && body == o.body;
  }
};

struct Program {
  std::map<MethodName, Method> methods;
  /// Declaration order of `methods`.
  std::vector<MethodName> order;
  /// Methods whose pairs are checked for races, in declaration order.
  std::vector<MethodName> entries;

  const Method& method(const MethodName& name) const;
  bool has_method(const MethodName& name) const {
    return methods.count(name) != 0;
  }
  /// Every field name occurring in some path of the program.
  std::set<FieldName> fields() const;

  bool operator==(const Program& o) const {
    return methods == o.methods && order == o.order && entries == o.entries;
  }
};

/// Callees of `m` in first-occurrence order.
std::vector<MethodName> callees(const Method& m);

/// Surface-syntax rendering. The implicit leading skip is omitted so that
/// parse(print(p)) == p.
std::string to_source(const Program& p);
std::string to_source(const Method& m);

}  // namespace stabrace
