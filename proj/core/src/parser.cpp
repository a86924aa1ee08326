#include "stabrace/parser.hpp"

#include <cctype>
#include <optional>
#include <vector>

namespace stabrace {

namespace {

enum class Tok {
  Ident,
  Assign,  // :=
  LParen,
  RParen,
  LBrace,
  RBrace,
  Semi,
  Comma,
  Dot,
  Star,
  End,
};

struct Token {
  Tok kind;
  std::string text;
  SourcePos pos;
};

const char* describe(Tok t) {
  switch (t) {
    case Tok::Ident: return "identifier";
    case Tok::Assign: return "':='";
    case Tok::LParen: return "'('";
    case Tok::RParen: return "')'";
    case Tok::LBrace: return "'{'";
    case Tok::RBrace: return "'}'";
    case Tok::Semi: return "';'";
    case Tok::Comma: return "','";
    case Tok::Dot: return "'.'";
    case Tok::Star: return "'*'";
    case Tok::End: return "end of input";
  }
  return "?";
}

std::vector<Token> lex(std::string_view src) {
  std::vector<Token> out;
  int line = 1;
  int col = 1;
  std::size_t i = 0;
  auto advance = [&](std::size_t n) {
    for (std::size_t k = 0; k < n; ++k, ++i) {
      if (src[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
  };
  while (i < src.size()) {
    const char c = src[i];
    if (std::isspace(static_cast<unsigned char>(c))) {
      advance(1);
      continue;
    }
    if (c == '/' && i + 1 < src.size() && src[i + 1] == '/') {
      while (i < src.size() && src[i] != '\n') advance(1);
      continue;
    }
    const SourcePos pos{line, col};
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::size_t j = i;
      while (j < src.size() &&
             (std::isalnum(static_cast<unsigned char>(src[j])) || src[j] == '_'))
        ++j;
      out.push_back({Tok::Ident, std::string(src.substr(i, j - i)), pos});
      advance(j - i);
      continue;
    }
    if (c == ':' && i + 1 < src.size() && src[i + 1] == '=') {
      out.push_back({Tok::Assign, ":=", pos});
      advance(2);
      continue;
    }
    Tok kind;
    switch (c) {
      case '(': kind = Tok::LParen; break;
      case ')': kind = Tok::RParen; break;
      case '{': kind = Tok::LBrace; break;
      case '}': kind = Tok::RBrace; break;
      case ';': kind = Tok::Semi; break;
      case ',': kind = Tok::Comma; break;
      case '.': kind = Tok::Dot; break;
      case '*': kind = Tok::Star; break;
      default:
        throw ParseError(ParseError::Kind::Syntax, pos, "token",
                         std::string("unexpected character '") + c + "'");
    }
    out.push_back({kind, std::string(1, c), pos});
    advance(1);
  }
  out.push_back({Tok::End, "", {line, col}});
  return out;
}

bool is_keyword(const std::string& s) {
  return s == "method" || s == "if" || s == "else" || s == "while" ||
         s == "skip" || s == "new" || s == "lock" || s == "unlock";
}

bool is_reserved(const std::string& s) { return s == "push" || s == "pop"; }

struct PendingCall {
  MethodName callee;
  std::size_t arity;
  SourcePos pos;
};

class Parser {
public:
  explicit Parser(std::vector<Token> toks) : toks_(std::move(toks)) {}

  Program parse() {
    Program p;
    do {
      Method m = parse_method();
      if (p.methods.count(m.name))
        throw ParseError(ParseError::Kind::DuplicateMethod, m.pos, "",
                         "method '" + m.name + "' defined twice");
      p.order.push_back(m.name);
      p.methods.emplace(m.name, std::move(m));
    } while (peek().kind != Tok::End);

    for (const PendingCall& c : calls_) {
      auto it = p.methods.find(c.callee);
      if (it == p.methods.end())
        throw ParseError(ParseError::Kind::UnknownMethod, c.pos, "",
                         "call to undefined method '" + c.callee + "'");
      if (it->second.arity != c.arity)
        throw ParseError(ParseError::Kind::ArityMismatch, c.pos, "",
                         "method '" + c.callee + "' expects " +
                             std::to_string(it->second.arity) +
                             " argument(s), got " + std::to_string(c.arity));
    }
    p.entries = p.order;
    return p;
  }

private:
  const Token& peek(std::size_t ahead = 0) const {
    const std::size_t k = std::min(pos_ + ahead, toks_.size() - 1);
    return toks_[k];
  }

  const Token& take() {
    const Token& t = toks_[pos_];
    if (pos_ + 1 < toks_.size()) ++pos_;
    return t;
  }

  [[noreturn]] void fail(const std::string& expected) const {
    const Token& t = peek();
    const std::string found = t.kind == Tok::End ? "end of input" : "'" + t.text + "'";
    throw ParseError(ParseError::Kind::Syntax, t.pos, expected,
                     "expected " + expected + ", found " + found);
  }

  const Token& expect(Tok kind) {
    if (peek().kind != kind) fail(describe(kind));
    return take();
  }

  void expect_word(const char* word) {
    if (peek().kind != Tok::Ident || peek().text != word)
      fail(std::string("'") + word + "'");
    take();
  }

  bool at_word(const char* word) const {
    return peek().kind == Tok::Ident && peek().text == word;
  }

  // A non-keyword identifier naming a variable or method.
  const Token& expect_name() {
    const Token& t = peek();
    if (t.kind != Tok::Ident) fail("identifier");
    if (is_reserved(t.text))
      throw ParseError(ParseError::Kind::ReservedConstruct, t.pos, "",
                       "'" + t.text + "' is a runtime-only command and may not appear in source");
    if (is_keyword(t.text)) fail("identifier");
    return take();
  }

  Var make_var(const Token& t) {
    Var v(t.text);
    if (v.is_formal() && v.formal_index() > arity_)
      throw ParseError(ParseError::Kind::FormalOutOfRange, t.pos, "",
                       "'" + t.text + "' exceeds arity " + std::to_string(arity_) +
                           " of method '" + current_ + "'");
    return v;
  }

  Method parse_method() {
    Method m;
    m.pos = peek().pos;
    expect_word("method");
    m.name = expect_name().text;
    current_ = m.name;
    expect(Tok::LParen);
    unsigned arity = 0;
    if (peek().kind != Tok::RParen) {
      for (;;) {
        const Token& t = expect_name();
        Var v(t.text);
        if (v.formal_index() != arity + 1)
          throw ParseError(ParseError::Kind::FormalOutOfRange, t.pos,
                           "arg" + std::to_string(arity + 1),
                           "formals must be arg1..argN in order");
        ++arity;
        if (peek().kind != Tok::Comma) break;
        take();
      }
    }
    expect(Tok::RParen);
    arity_ = arity;
    m.arity = arity;
    m.body.push_back(Stmt{SimpleStmt{cmd::Skip{}}, m.pos});
    Block rest = parse_block();
    for (Stmt& s : rest) m.body.push_back(std::move(s));
    return m;
  }

  Block parse_block() {
    expect(Tok::LBrace);
    Block out;
    while (peek().kind != Tok::RBrace) {
      if (peek().kind == Tok::End) fail("'}'");
      out.push_back(parse_stmt());
    }
    take();
    return out;
  }

  Expr parse_expr() {
    const Token& root = expect_name();
    Expr e(make_var(root));
    while (peek().kind == Tok::Dot) {
      take();
      const Token& f = peek();
      if (f.kind != Tok::Ident || is_keyword(f.text) || is_reserved(f.text))
        fail("field name");
      e.fields.push_back(take().text);
    }
    return e;
  }

  Stmt parse_stmt() {
    const SourcePos pos = peek().pos;
    if (at_word("if")) {
      take();
      expect(Tok::Star);
      IfStmt s;
      s.then_branch = parse_block();
      expect_word("else");
      s.else_branch = parse_block();
      return {std::move(s), pos};
    }
    if (at_word("while")) {
      take();
      expect(Tok::Star);
      WhileStmt s;
      s.body = parse_block();
      return {std::move(s), pos};
    }
    Stmt s{parse_simple_or_call(), pos};
    expect(Tok::Semi);
    return s;
  }

  std::variant<SimpleStmt, IfStmt, WhileStmt, CallStmt> parse_simple_or_call() {
    const SourcePos pos = peek().pos;
    if (at_word("skip")) {
      take();
      return SimpleStmt{cmd::Skip{}};
    }
    if (at_word("lock") || at_word("unlock")) {
      const bool lock = take().text == "lock";
      expect(Tok::LParen);
      expect(Tok::RParen);
      return lock ? SimpleStmt{cmd::Lock{}} : SimpleStmt{cmd::Unlock{}};
    }
    if (peek().kind == Tok::Ident && peek(1).kind == Tok::LParen &&
        !is_keyword(peek().text)) {
      const Token& name = expect_name();
      CallStmt call;
      call.callee = name.text;
      take();
      if (peek().kind != Tok::RParen) {
        for (;;) {
          call.actuals.push_back(parse_expr());
          if (peek().kind != Tok::Comma) break;
          take();
        }
      }
      expect(Tok::RParen);
      calls_.push_back({call.callee, call.actuals.size(), pos});
      return call;
    }

    Expr lhs = parse_expr();
    expect(Tok::Assign);
    if (at_word("new")) {
      take();
      expect(Tok::LParen);
      expect(Tok::RParen);
      if (!lhs.is_var())
        throw ParseError(ParseError::Kind::Syntax, pos, "variable",
                         "new() may only be assigned to a variable");
      return SimpleStmt{cmd::New{lhs.root}};
    }
    const SourcePos rhs_pos = peek().pos;
    Expr rhs = parse_expr();
    if (lhs.is_var() && rhs.is_var()) return SimpleStmt{cmd::Assign{lhs.root, rhs.root}};
    if (lhs.is_var()) return SimpleStmt{cmd::Load{lhs.root, std::move(rhs)}};
    if (rhs.is_var()) return SimpleStmt{cmd::Store{std::move(lhs), rhs.root}};
    throw ParseError(ParseError::Kind::Syntax, rhs_pos, "variable",
                     "path-to-path assignment is not a statement; load into a local first");
  }

  std::vector<Token> toks_;
  std::size_t pos_ = 0;
  unsigned arity_ = 0;
  std::string current_;
  std::vector<PendingCall> calls_;
};

}  // namespace

ParseError::ParseError(Kind kind, SourcePos pos, std::string expected,
                       std::string message)
    : std::runtime_error(std::to_string(pos.line) + ":" + std::to_string(pos.col) +
                         ": " + message),
      kind_(kind),
      pos_(pos),
      expected_(std::move(expected)) {}

std::string_view to_string(ParseError::Kind kind) {
  switch (kind) {
    case ParseError::Kind::Syntax: return "SyntaxError";
    case ParseError::Kind::ReservedConstruct: return "ReservedConstruct";
    case ParseError::Kind::FormalOutOfRange: return "FormalOutOfRange";
    case ParseError::Kind::UnknownMethod: return "UnknownMethod";
    case ParseError::Kind::ArityMismatch: return "ArityMismatch";
    case ParseError::Kind::DuplicateMethod: return "DuplicateMethod";
  }
  return "ParseError";
}

Program parse_program(std::string_view source) {
  return Parser(lex(source)).parse();
}

}  // namespace stabrace
