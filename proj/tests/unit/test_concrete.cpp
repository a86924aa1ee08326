#include <algorithm>
#include <set>

#include <doctest.h>

#include "stabrace/concrete.hpp"
#include "stabrace/generator.hpp"
#include "test_support.hpp"

using namespace stabrace;
using namespace stabrace::testing;

namespace {

using Commands = std::vector<SimpleStmt>;

// Syntactic traces of a block obtained by expanding the grammar directly,
// without running any state. Valid for programs that never get stuck.
std::vector<Commands> expand(const Program& p, const Block& b, unsigned unroll);

std::vector<Commands> concat(const std::vector<Commands>& xs, const std::vector<Commands>& ys) {
  std::vector<Commands> out;
  for (const Commands& x : xs)
    for (const Commands& y : ys) {
      Commands z = x;
      z.insert(z.end(), y.begin(), y.end());
      out.push_back(std::move(z));
    }
  return out;
}

std::vector<Commands> expand(const Program& p, const Block& b, unsigned unroll) {
  std::vector<Commands> acc{{}};
  for (const Stmt& s : b) {
    std::vector<Commands> here;
    if (auto* c = std::get_if<SimpleStmt>(&s.node)) {
      here = {{*c}};
    } else if (auto* i = std::get_if<IfStmt>(&s.node)) {
      here = expand(p, i->then_branch, unroll);
      auto e = expand(p, i->else_branch, unroll);
      here.insert(here.end(), e.begin(), e.end());
    } else if (auto* w = std::get_if<WhileStmt>(&s.node)) {
      std::vector<Commands> k{{}};
      const auto body = expand(p, w->body, unroll);
      for (unsigned it = 0; it <= unroll; ++it) {
        here.insert(here.end(), k.begin(), k.end());
        k = concat(k, body);
      }
    } else if (auto* call = std::get_if<CallStmt>(&s.node)) {
      auto inner = expand(p, p.method(call->callee).body, unroll);
      for (Commands& t : inner) {
        t.insert(t.begin(), cmd::Push{call->callee, call->actuals});
        t.push_back(cmd::Pop{});
      }
      here = std::move(inner);
    }
    acc = concat(acc, here);
  }
  return acc;
}

std::multiset<Commands> syntactic(const std::vector<Trace>& ts) {
  std::multiset<Commands> out;
  for (const Trace& t : ts) out.insert(t.commands);
  return out;
}

TwoThreadConfig two_thread_universal(const std::set<FieldName>& fields) {
  Config u = universal_config(fields);
  TwoThreadConfig cfg;
  cfg.stacks = {u.stack, u.stack};
  cfg.heap = u.heap;
  return cfg;
}

// Counts maximal weaves of two lock-annotated threads by brute force over
// every thread-choice word, tracking only the lock counts.
std::size_t brute_force_weaves(const Commands& t1, const Commands& t2) {
  auto delta = [](const SimpleStmt& c) {
    if (std::holds_alternative<cmd::Lock>(c)) return 1;
    if (std::holds_alternative<cmd::Unlock>(c)) return -1;
    return 0;
  };
  std::set<std::vector<int>> maximal;
  const std::size_t n = t1.size() + t2.size();
  for (std::size_t mask = 0; mask < (std::size_t{1} << n); ++mask) {
    std::vector<int> word;
    std::size_t i1 = 0, i2 = 0;
    int l1 = 0, l2 = 0;
    for (std::size_t k = 0; k < n; ++k) {
      const int t = (mask >> k) & 1;
      const Commands& me = t == 0 ? t1 : t2;
      std::size_t& i = t == 0 ? i1 : i2;
      int& lm = t == 0 ? l1 : l2;
      const int lo = t == 0 ? l2 : l1;
      if (i == me.size()) break;
      const int next = lm + delta(me[i]);
      if (!(lo == 0 || (lm == 0 && next == 0))) break;
      lm = next;
      ++i;
      word.push_back(t);
    }
    // Maximal: no thread can take another step.
    auto can = [&](int t) {
      const Commands& me = t == 0 ? t1 : t2;
      const std::size_t i = t == 0 ? i1 : i2;
      const int lm = t == 0 ? l1 : l2, lo = t == 0 ? l2 : l1;
      if (i == me.size()) return false;
      const int next = lm + delta(me[i]);
      return lo == 0 || (lm == 0 && next == 0);
    };
    if (!can(0) && !can(1)) maximal.insert(word);
  }
  return maximal.size();
}

}  // namespace

TEST_CASE("eval_address follows the path") {
  Frame s(Loc::nil());
  s.set(Var("x"), Loc{1});
  Heap h;
  h.set({Loc{1}, "f"}, Loc{2});
  CHECK(eval_address(E("x.f"), s, h) == Address{Loc{1}, "f"});
  // The address of x.f.g exists once x.f is defined; its value does not.
  CHECK(eval_address(E("x.f.g"), s, h) == Address{Loc{2}, "g"});
  CHECK_FALSE(eval_expr(E("x.f.g"), s, h).has_value());
  CHECK_FALSE(eval_address(E("x.f.g.f"), s, h).has_value());
  h.set({Loc{2}, "g"}, Loc{1});
  CHECK(eval_expr(E("x.f.g"), s, h) == Loc{1});
  CHECK(eval_address(E("x.f.g.f"), s, h) == Address{Loc{1}, "f"});

  CHECK(eval_address(E("y.f"), s, h) == Address{Loc::nil(), "f"});
  CHECK_FALSE(eval_expr(E("y.f"), s, h).has_value());
}

TEST_CASE("step_simple") {
  StepEnv env;
  env.fields = {"f", "g"};
  Config cfg = universal_config(env.fields);

  SUBCASE("unlock with no lock held is stuck") { CHECK(step_simple(cmd::Unlock{}, cfg, env).empty()); }
  SUBCASE("lock is reentrant") {
    cfg.locks = 1;
    auto next = step_simple(cmd::Lock{}, cfg, env);
    REQUIRE(next.size() == 1);
    CHECK(next[0].locks == 2);
  }
  SUBCASE("new allocates a self-looped fresh location") {
    auto next = step_simple(cmd::New{Var("x")}, cfg, env);
    REQUIRE(next.size() == 1);
    const Loc l = next[0].stack.back().get(Var("x"));
    CHECK(l == Loc{1});
    CHECK(next[0].heap.get({l, "f"}) == l);
    CHECK(next[0].heap.get({l, "g"}) == l);
    CHECK(is_well_behaved(next[0].stack, next[0].heap));
  }
  SUBCASE("non-canonical allocation branches") {
    env.canonical_alloc = false;
    env.alloc_width = 3;
    CHECK(step_simple(cmd::New{Var("x")}, cfg, env).size() == 3);
  }
  SUBCASE("load through nil is stuck") {
    cfg.stack.back() = Frame(Loc::nil());
    CHECK(step_simple(cmd::Load{Var("x"), E("y.f")}, cfg, env).empty());
  }
  SUBCASE("skip changes nothing") {
    auto next = step_simple(cmd::Skip{}, cfg, env);
    REQUIRE(next.size() == 1);
    CHECK(next[0] == cfg);
  }
  SUBCASE("push binds formals in a fresh frame and pop drops it") {
    cfg.stack.back().set(Var("y"), Loc{0});
    auto pushed = step_simple(cmd::Push{"m", {E("y"), E("y.f")}}, cfg, env);
    REQUIRE(pushed.size() == 1);
    REQUIRE(pushed[0].stack.size() == 2);
    CHECK(pushed[0].stack.back().get(Var("arg1")) == Loc{0});
    CHECK(pushed[0].stack.back().get(Var("arg2")) == Loc{0});
    CHECK(pushed[0].stack.back().get(Var("x")).is_nil());
    auto popped = step_simple(cmd::Pop{}, pushed[0], env);
    REQUIRE(popped.size() == 1);
    CHECK(popped[0] == cfg);
  }
}

TEST_CASE("straight-line body has one trace") {
  Program p = parse_program("method m(){ x := y; }");
  Config init;
  Frame s(Loc{0});
  s.set(Var("y"), Loc{3});
  init.stack = {s};
  init.heap.set({Loc{0}, "f"}, Loc{0});
  init.heap.set({Loc{3}, "f"}, Loc{0});
  TraceEnumerator en(p, {});
  auto traces = en.enumerate(p.method("m").body, init);
  REQUIRE(traces.size() == 1);
  auto states = en.materialize(p.method("m").body, init, traces[0]);
  REQUIRE(states.size() == 2);
  CHECK(states.back().cfg.stack.back().get(Var("x")) == Loc{3});
}

TEST_CASE("branch and loop trace counts match direct expansion") {
  Program p = parse_program(
      "method a(){ if * { x := new(); } else { x := new(); x := new(); } }\n"
      "method b(){ while * { x := new(); } }\n");
  const Config init = universal_config(p.fields());

  auto a = enumerate_traces(p, p.method("a").body, init, {});
  REQUIRE(a.size() == 2);
  std::multiset<std::size_t> lengths{a[0].commands.size(), a[1].commands.size()};
  CHECK(lengths == std::multiset<std::size_t>{2, 3});
  const auto ea = expand(p, p.method("a").body, 2);
  CHECK(syntactic(a) == std::multiset<Commands>(ea.begin(), ea.end()));

  auto b = enumerate_traces(p, p.method("b").body, init, {});
  CHECK(b.size() == 3);
  const auto eb = expand(p, p.method("b").body, 2);
  CHECK(syntactic(b) == std::multiset<Commands>(eb.begin(), eb.end()));

  EnumBounds one;
  one.loop_unroll = 1;
  CHECK(enumerate_traces(p, p.method("b").body, init, one).size() == 2);
}

TEST_CASE("calls emit push, callee body, pop") {
  Program p = parse_program(
      "method m(arg1){ n(arg1.f, arg1); }\n"
      "method n(arg1, arg2){ x := arg1.g; }\n");
  auto ts = enumerate_traces(p, p.method("m").body, universal_config(p.fields()), {});
  REQUIRE(ts.size() == 1);
  CHECK(to_string(ts[0].commands) == "skip; push(n;arg1.f,arg1); skip; x:=arg1.g; pop");
}

TEST_CASE("enumeration order is lexicographic over choices") {
  Program p = parse_program("method m(){ if * { x := new(); } else { skip; } while * { skip; } }");
  auto ts = enumerate_traces(p, p.method("m").body, universal_config(p.fields()), {});
  for (std::size_t i = 1; i < ts.size(); ++i) CHECK(ts[i - 1].choices < ts[i].choices);
}

TEST_CASE("trace length bound") {
  Program p = parse_program("method m(){ while * { x := new(); x := new(); } }");
  EnumBounds b;
  b.max_trace_len = 3;
  CHECK_THROWS_AS(enumerate_traces(p, p.method("m").body, universal_config({}), b),
                  BoundExceeded);
}

TEST_CASE("enumerated traces are well-formed, well-behaved and heap-monotone") {
  GenBounds gb;
  gb.max_traces = 300;
  for (std::uint64_t seed = 0; seed < 40; ++seed) {
    Program p = generate_program(seed, gb);
    const Config init = universal_config(p.fields());
    EnumBounds bounds;
    const StepEnv env = StepEnv::from(p, bounds);
    for (const MethodName& m : p.order) {
      TraceEnumerator en(p, bounds);
      for (const Trace& t : en.enumerate(p.method(m).body, init)) {
        auto states = en.materialize(p.method(m).body, init, t);
        REQUIRE(states.size() == t.commands.size());
        const Config* prev = &init;
        for (const ConcreteState& st : states) {
          auto succ = step_simple(st.cmd, *prev, env);
          CHECK(std::find(succ.begin(), succ.end(), st.cfg) != succ.end());
          CHECK(is_well_behaved(st.cfg.stack, st.cfg.heap));
          for (const auto& [a, v] : prev->heap.cells()) CHECK(st.cfg.heap.contains(a));
          prev = &st.cfg;
        }
      }
    }
  }
}

TEST_CASE("interleavings of two lock-free two-step threads") {
  Program p = parse_program("method m(arg1){ x := arg1.f; y := new(); }");
  const Commands t{cmd::Load{Var("x"), E("arg1.f")}, cmd::New{Var("y")}};
  const StepEnv env = StepEnv::from(p, {});
  auto weaves = interleave(t, t, two_thread_universal(p.fields()), env);
  CHECK(brute_force_weaves(t, t) == 6);
  CHECK(weaves.size() == 6);
  std::set<std::vector<ThreadId>> orders;
  for (const ConcurrentTrace& w : weaves) {
    CHECK(w.states.size() == 4);
    std::vector<ThreadId> o;
    for (const ConcurrentState& s : w.states) o.push_back(s.thread);
    orders.insert(o);
  }
  CHECK(orders.size() == 6);
}

TEST_CASE("interleavings of two lock-wrapped threads") {
  Program p = parse_program("method m(arg1){ lock(); x := arg1.f; unlock(); }");
  const Commands t{cmd::Lock{}, cmd::Load{Var("x"), E("arg1.f")}, cmd::Unlock{}};
  const StepEnv env = StepEnv::from(p, {});
  auto weaves = interleave(t, t, two_thread_universal(p.fields()), env);
  CHECK(brute_force_weaves(t, t) == 2);
  CHECK(weaves.size() == 2);
  for (const ConcurrentTrace& w : weaves) {
    CHECK(w.states.size() == 6);
    for (const ConcurrentState& s : w.states) CHECK(std::min(s.cfg.locks[0], s.cfg.locks[1]) == 0);
  }
}

TEST_CASE("mixed lock usage matches the brute-force weave count") {
  Program p = parse_program("method m(arg1){ lock(); x := arg1.f; unlock(); y := new(); }");
  const Commands t1{cmd::Lock{}, cmd::Load{Var("x"), E("arg1.f")}, cmd::Unlock{}, cmd::New{Var("y")}};
  const Commands t2{cmd::New{Var("z")}, cmd::Load{Var("x"), E("arg1.f")}};
  const StepEnv env = StepEnv::from(p, {});
  CHECK(interleave(t1, t2, two_thread_universal(p.fields()), env).size() ==
        brute_force_weaves(t1, t2));
}

TEST_CASE("interleaving with an empty thread") {
  Program p = parse_program("method m(arg1){ x := arg1.f; y := new(); }");
  const Commands t{cmd::Load{Var("x"), E("arg1.f")}, cmd::New{Var("y")}};
  auto weaves = interleave(t, {}, two_thread_universal(p.fields()), StepEnv::from(p, {}));
  REQUIRE(weaves.size() == 1);
  REQUIRE(weaves[0].states.size() == 2);
  for (const ConcurrentState& s : weaves[0].states) CHECK(s.thread == ThreadId::T1);
}

TEST_CASE("replay_schedule rejects a step forbidden by the lock") {
  Program p = parse_program("method m(){ skip; }");
  const StepEnv env = StepEnv::from(p, {});
  const TwoThreadConfig init = two_thread_universal({"f"});
  CHECK(replay_schedule({{ThreadId::T1, cmd::Lock{}}, {ThreadId::T2, cmd::Lock{}}}, init, env) ==
        std::nullopt);
  CHECK(replay_schedule({{ThreadId::T1, cmd::Lock{}}, {ThreadId::T2, cmd::Skip{}}}, init, env)
            .has_value());
}

TEST_CASE("check_race") {
  StepEnv env;
  env.fields = {"f", "g"};
  TwoThreadConfig init = two_thread_universal(env.fields);
  init.heap.set({Loc{1}, "f"}, Loc{0});
  init.heap.set({Loc{1}, "g"}, Loc{0});
  init.stacks[0].back().set(Var("arg1"), Loc{1});
  init.stacks[1].back().set(Var("arg1"), Loc{1});
  const ConcurrentTrace prefix{init, {}};

  SUBCASE("write/write at the same address") {
    auto ev = check_race(prefix, cmd::Store{E("arg1.f"), Var("y")},
                         cmd::Store{E("arg1.f"), Var("y")}, env);
    REQUIRE(ev.has_value());
    CHECK(ev->address == Address{Loc{1}, "f"});
    CHECK(ev->kind1 == AccessKind::Write);
    CHECK(ev->kind2 == AccessKind::Write);
  }
  SUBCASE("write/read") {
    auto ev = check_race(prefix, cmd::Store{E("arg1.f"), Var("y")},
                         cmd::Load{Var("x"), E("arg1.f")}, env);
    REQUIRE(ev.has_value());
    CHECK(ev->kind2 == AccessKind::Read);
  }
  SUBCASE("read/read is not a race") {
    CHECK_FALSE(check_race(prefix, cmd::Load{Var("x"), E("arg1.f")},
                           cmd::Load{Var("x"), E("arg1.f")}, env));
  }
  SUBCASE("different addresses are not a race") {
    CHECK_FALSE(check_race(prefix, cmd::Store{E("arg1.f"), Var("y")},
                           cmd::Store{E("arg1.g"), Var("y")}, env));
  }
  SUBCASE("an unprotected access may run while the other thread holds the lock") {
    auto held = replay_schedule({{ThreadId::T2, cmd::Lock{}}}, init, env);
    REQUIRE(held.has_value());
    CHECK(check_race(*held, cmd::Store{E("arg1.f"), Var("y")}, cmd::Load{Var("x"), E("arg1.f")},
                     env));
  }
}
