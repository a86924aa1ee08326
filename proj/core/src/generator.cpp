#include "stabrace/generator.hpp"

#include <algorithm>
#include <limits>
#include <random>
#include <set>
#include <stdexcept>

#include "stabrace/validate.hpp"

namespace stabrace {

namespace {

constexpr std::size_t kSaturated = std::numeric_limits<std::size_t>::max() / 4;

std::size_t sat_mul(std::size_t a, std::size_t b) {
  if (a == 0 || b == 0) return 0;
  if (a > kSaturated / b) return kSaturated;
  return a * b;
}

std::size_t sat_add(std::size_t a, std::size_t b) { return std::min(kSaturated, a + b); }

std::size_t estimate_block(const Program& p, const Block& b, unsigned u) {
  std::size_t n = 1;
  for (const Stmt& s : b) {
    std::size_t k = 1;
    if (auto* i = std::get_if<IfStmt>(&s.node)) {
      k = sat_add(estimate_block(p, i->then_branch, u), estimate_block(p, i->else_branch, u));
    } else if (auto* w = std::get_if<WhileStmt>(&s.node)) {
      const std::size_t body = estimate_block(p, w->body, u);
      std::size_t pow = 1;
      k = 0;
      for (unsigned it = 0; it <= u; ++it) {
        k = sat_add(k, pow);
        pow = sat_mul(pow, body);
      }
    } else if (auto* c = std::get_if<CallStmt>(&s.node)) {
      k = estimate_block(p, p.method(c->callee).body, u);
    }
    n = sat_mul(n, k);
  }
  return n;
}

Stmt simple(SimpleStmt c) { return Stmt{std::move(c), {}}; }

class Gen {
public:
  Gen(std::uint64_t seed, const GenBounds& b, const Program& prog, unsigned arity,
      std::vector<MethodName> callable)
      : rng_(seed), b_(b), prog_(prog), arity_(arity), callable_(std::move(callable)),
        budget_(b.max_stmts) {}

  Block body() {
    std::set<std::string> init;
    Block out{simple(cmd::Skip{})};
    // Methods are rarely empty, which keeps the corpus interesting.
    fill(out, init, 0, 0, 2 + pick(b_.max_stmts));
    return out;
  }

private:
  unsigned pick(std::size_t n) { return static_cast<unsigned>(rng_() % n); }
  bool chance(unsigned pct) { return pick(100) < pct; }

  std::vector<Var> scope(const std::set<std::string>& init) const {
    std::vector<Var> out;
    for (unsigned i = 1; i <= arity_; ++i) out.push_back(Var::formal(i));
    for (const std::string& l : init) out.emplace_back(l);
    return out;
  }

  Var dst() {
    if (arity_ > 0 && chance(10)) return Var::formal(1 + pick(arity_));
    return Var(b_.locals[pick(b_.locals.size())]);
  }

  static void define(std::set<std::string>& init, const Var& v) {
    if (!v.is_formal()) init.insert(v.name());
  }

  Expr path(const std::vector<Var>& sc) {
    std::vector<FieldName> fs;
    const unsigned len = 1 + pick(b_.max_path_len);
    for (unsigned i = 0; i < len; ++i) fs.push_back(b_.fields[pick(b_.fields.size())]);
    // Formal-rooted paths are the ones that can race.
    if (arity_ > 0 && chance(70)) return Expr(Var::formal(1 + pick(arity_)), std::move(fs));
    return Expr(sc[pick(sc.size())], std::move(fs));
  }

  unsigned kind() {
    static constexpr unsigned kWeights[] = {1, 3, 3, 2, 1, 1, 1, 2};
    unsigned total = 0;
    for (unsigned w : kWeights) total += w;
    unsigned r = pick(total);
    for (unsigned k = 0;; ++k) {
      if (r < kWeights[k]) return k;
      r -= kWeights[k];
    }
  }

  /// Appends up to `target` statements to `out`.
  void fill(Block& out, std::set<std::string>& init, unsigned nesting, unsigned locks,
            unsigned target) {
    for (unsigned made = 0; made < target && budget_ > 0; ++made) statement(out, init, nesting, locks);
  }

  void statement(Block& out, std::set<std::string>& init, unsigned nesting, unsigned locks) {
    const std::vector<Var> sc = scope(init);
    for (;;) {
      switch (kind()) {
        case 0:
          if (sc.empty()) continue;
          {
            Var d = dst();
            out.push_back(simple(cmd::Assign{d, sc[pick(sc.size())]}));
            define(init, d);
          }
          break;
        case 1:
          if (sc.empty()) continue;
          {
            Var d = dst();
            out.push_back(simple(cmd::Load{d, path(sc)}));
            define(init, d);
          }
          break;
        case 2: {
          if (sc.empty() || init.empty()) continue;
          std::vector<std::string> ls(init.begin(), init.end());
          out.push_back(simple(cmd::Store{path(sc), Var(ls[pick(ls.size())])}));
          break;
        }
        case 3: {
          Var d = dst();
          out.push_back(simple(cmd::New{d}));
          define(init, d);
          break;
        }
        case 4: {
          if (nesting >= b_.max_nesting || budget_ < 2) continue;
          --budget_;
          IfStmt i;
          std::set<std::string> ti = init, ei = init;
          fill(i.then_branch, ti, nesting + 1, 0, 1 + pick(3));
          fill(i.else_branch, ei, nesting + 1, 0, pick(3));
          std::set<std::string> both;
          std::set_intersection(ti.begin(), ti.end(), ei.begin(), ei.end(),
                                std::inserter(both, both.begin()));
          init = std::move(both);
          out.push_back(Stmt{std::move(i), {}});
          return;
        }
        case 5: {
          if (nesting >= b_.max_nesting || budget_ < 2) continue;
          --budget_;
          WhileStmt w;
          std::set<std::string> wi = init;
          fill(w.body, wi, nesting + 1, 0, 1 + pick(3));
          out.push_back(Stmt{std::move(w), {}});
          return;
        }
        case 6: {
          if (locks >= 2 || budget_ < 3) continue;
          budget_ -= 2;
          out.push_back(simple(cmd::Lock{}));
          fill(out, init, nesting, locks + 1, 1 + pick(3));
          out.push_back(simple(cmd::Unlock{}));
          return;
        }
        case 7: {
          if (callable_.empty()) continue;
          const Method& callee = prog_.method(callable_[pick(callable_.size())]);
          if (callee.arity > 0 && sc.empty()) continue;
          CallStmt c;
          c.callee = callee.name;
          for (unsigned i = 0; i < callee.arity; ++i)
            c.actuals.push_back(chance(50) ? Expr(sc[pick(sc.size())]) : path(sc));
          out.push_back(Stmt{std::move(c), {}});
          break;
        }
      }
      --budget_;
      return;
    }
  }

  std::mt19937_64 rng_;
  const GenBounds& b_;
  const Program& prog_;
  unsigned arity_;
  std::vector<MethodName> callable_;
  unsigned budget_;
};

Program draw(std::uint64_t seed, const GenBounds& b) {
  std::mt19937_64 rng(seed);
  const unsigned k = 1 + static_cast<unsigned>(rng() % b.max_methods);
  Program p;
  std::vector<unsigned> depth(k, 1);
  for (unsigned i = k; i-- > 0;) {
    Method m;
    m.name = "m" + std::to_string(i);
    m.arity = static_cast<unsigned>(rng() % (b.max_arity + 1));
    std::vector<MethodName> callable;
    for (unsigned j = i + 1; j < k; ++j)
      if (depth[j] < b.max_call_depth) callable.push_back("m" + std::to_string(j));
    m.body = Gen(rng(), b, p, m.arity, callable).body();
    for (const MethodName& c : callees(m))
      depth[i] = std::max(depth[i], 1 + depth[static_cast<unsigned>(std::stoul(c.substr(1)))]);
    p.methods.emplace(m.name, std::move(m));
  }
  for (unsigned i = 0; i < k; ++i) p.order.push_back("m" + std::to_string(i));
  p.entries = p.order;
  return p;
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// --- shrinking -------------------------------------------------------------

using BlockSink = std::function<void(Block)>;

void block_candidates(const Block& b, std::size_t first, const BlockSink& emit) {
  auto splice = [&](std::size_t i, const Block& inner) {
    Block out(b.begin(), b.begin() + static_cast<std::ptrdiff_t>(i));
    out.insert(out.end(), inner.begin(), inner.end());
    out.insert(out.end(), b.begin() + static_cast<std::ptrdiff_t>(i) + 1, b.end());
    emit(std::move(out));
  };
  for (std::size_t i = first; i < b.size(); ++i) {
    const Stmt& s = b[i];
    if (auto* c = std::get_if<SimpleStmt>(&s.node); c && std::holds_alternative<cmd::Lock>(*c)) {
      int depth = 0;
      for (std::size_t j = i + 1; j < b.size(); ++j) {
        auto* cj = std::get_if<SimpleStmt>(&b[j].node);
        if (!cj) continue;
        if (std::holds_alternative<cmd::Lock>(*cj)) ++depth;
        if (std::holds_alternative<cmd::Unlock>(*cj) && depth-- == 0) {
          Block out = b;
          out.erase(out.begin() + static_cast<std::ptrdiff_t>(j));
          out.erase(out.begin() + static_cast<std::ptrdiff_t>(i));
          emit(std::move(out));
          break;
        }
      }
    }
    splice(i, {});
    if (auto* is = std::get_if<IfStmt>(&s.node)) {
      splice(i, is->then_branch);
      splice(i, is->else_branch);
      block_candidates(is->then_branch, 0, [&](Block nb) {
        Block out = b;
        std::get<IfStmt>(out[i].node).then_branch = std::move(nb);
        emit(std::move(out));
      });
      block_candidates(is->else_branch, 0, [&](Block nb) {
        Block out = b;
        std::get<IfStmt>(out[i].node).else_branch = std::move(nb);
        emit(std::move(out));
      });
    } else if (auto* w = std::get_if<WhileStmt>(&s.node)) {
      splice(i, w->body);
      block_candidates(w->body, 0, [&](Block nb) {
        Block out = b;
        std::get<WhileStmt>(out[i].node).body = std::move(nb);
        emit(std::move(out));
      });
    }
  }
}

std::vector<Program> shrink_candidates(const Program& p) {
  std::vector<Program> out;
  if (p.order.size() > 1) {
    for (const MethodName& m : p.order) {
      bool called = false;
      for (const auto& [n, other] : p.methods)
        if (n != m) {
          auto cs = callees(other);
          called = called || std::find(cs.begin(), cs.end(), m) != cs.end();
        }
      if (called) continue;
      Program q = p;
      q.methods.erase(m);
      std::erase(q.order, m);
      std::erase(q.entries, m);
      if (!q.entries.empty()) out.push_back(std::move(q));
    }
  }
  for (const MethodName& m : p.order) {
    block_candidates(p.method(m).body, 1, [&](Block nb) {
      Program q = p;
      q.methods.at(m).body = std::move(nb);
      out.push_back(std::move(q));
    });
  }
  return out;
}

std::size_t block_size(const Block& b) {
  std::size_t n = 0;
  for (const Stmt& s : b) {
    ++n;
    if (auto* i = std::get_if<IfStmt>(&s.node))
      n += block_size(i->then_branch) + block_size(i->else_branch);
    else if (auto* w = std::get_if<WhileStmt>(&s.node))
      n += block_size(w->body);
  }
  return n;
}

}  // namespace

std::size_t estimate_traces(const Program& p, const Method& m, unsigned loop_unroll) {
  return estimate_block(p, m.body, loop_unroll);
}

std::uint64_t program_seed(std::uint64_t run_seed, std::size_t i) {
  return splitmix64(run_seed * 0x100000001b3ULL + i);
}

Program generate_program(std::uint64_t seed, const GenBounds& bounds) {
  if (bounds.max_methods == 0 || bounds.locals.empty() || bounds.fields.empty())
    throw std::invalid_argument("generator bounds admit no program");
  for (std::uint64_t attempt = 0;; ++attempt) {
    Program p = draw(splitmix64(seed + attempt * 0x9e3779b97f4a7c15ULL), bounds);
    bool small = true;
    for (const auto& [name, m] : p.methods)
      small = small && estimate_traces(p, m, bounds.estimate_unroll) <= bounds.max_traces;
    if (!small) continue;
    auto violations = validate_all(p);
    if (!violations.empty())
      throw std::logic_error("generated program is invalid: " + violations.front().message);
    return p;
  }
}

Program shrink(const Program& p, const std::function<bool(const Program&)>& fails) {
  Program cur = p;
  for (bool progress = true; progress;) {
    progress = false;
    for (Program& q : shrink_candidates(cur)) {
      if (!validate_all(q).empty()) continue;
      if (!fails(q)) continue;
      cur = std::move(q);
      progress = true;
      break;
    }
  }
  return cur;
}

std::size_t program_size(const Program& p) {
  std::size_t n = 0;
  for (const auto& [name, m] : p.methods) n += block_size(m.body) - (m.body.empty() ? 0 : 1);
  return n;
}

}  // namespace stabrace
