#include <doctest.h>

#include "stabrace/abstraction.hpp"
#include "stabrace/analyzer.hpp"
#include "stabrace/oracle.hpp"
#include "test_support.hpp"

using namespace stabrace;
using namespace stabrace::testing;

namespace {

AbstractState state(std::set<Expr> w, unsigned l, std::set<AccessRecord> a) {
  return AbstractState{std::move(w), l, std::move(a)};
}

}  // namespace

TEST_CASE("lock arithmetic") {
  LockCap cap;
  CHECK(cap.value() == 255);
  CHECK(cap.add(0, 1) == 1);
  CHECK(cap.add(255, 1) == 255);
  CHECK(LockCap(3).add(2, 2) == 3);
  CHECK(LockCap::decr(0) == 0);
  CHECK(LockCap::decr(2) == 1);
  CHECK_THROWS(LockCap(0));
}

TEST_CASE("join") {
  const AbstractState d = state({E("arg1")}, 1, {R("arg1.f", 0)});
  CHECK(join(AbstractState::bottom(), d) == d);
  CHECK(join(d, d) == d);
  const AbstractState a = state({E("arg1")}, 1, {R("arg1.f", 0)});
  const AbstractState b = state({E("arg2")}, 2, {W("arg2.g", 1)});
  CHECK(join(a, b) == state({E("arg1"), E("arg2")}, 2, {R("arg1.f", 0), W("arg2.g", 1)}));
  CHECK(leq(a, join(a, b)));
  CHECK_FALSE(leq(join(a, b), a));
}

TEST_CASE("transfer_simple") {
  CHECK(transfer_simple(cmd::Load{Var("x"), E("arg1.f")}, AbstractState::bottom()) ==
        state({E("arg1.f")}, 0, {R("arg1.f", 0)}));
  CHECK(transfer_simple(cmd::New{Var("arg1")}, AbstractState::bottom()) ==
        state({E("arg1")}, 0, {}));
  CHECK(transfer_simple(cmd::Lock{}, AbstractState::bottom()) == state({}, 1, {}));
  CHECK(transfer_simple(cmd::Assign{Var("x"), Var("arg2")}, AbstractState::bottom()) ==
        state({E("arg2")}, 0, {}));
  CHECK(transfer_simple(cmd::Store{E("y.f"), Var("x")}, AbstractState::bottom()) ==
        AbstractState::bottom());
}

TEST_CASE("compound statements") {
  Program p = parse_program(
      "method a(arg1){ y := new(); if * { x := arg1.f; } else { arg1.f := y; } }\n"
      "method b(arg1){ while * { lock(); x := arg1.f; unlock(); } }\n");
  Analyzer an(p);
  const AbstractState a = an.summary("a").state;
  CHECK(a.accesses == std::set<AccessRecord>{R("arg1.f", 0), W("arg1.f", 0)});
  const AbstractState b = an.summary("b").state;
  CHECK(b.accesses == std::set<AccessRecord>{R("arg1.f", 1)});
  CHECK(b.lock == 0);

  // Balanced bodies leave the incoming lock count alone.
  const AbstractState from = state({}, 3, {});
  CHECK(an.analyze_compound(p.method("b").body, from).lock == 3);
  CHECK(an.analyze_compound(p.method("b").body, from).accesses ==
        std::set<AccessRecord>{R("arg1.f", 4)});
}

TEST_CASE("apply_summary on the Wurble helper") {
  Program p = fixture("wurble.il");
  Analyzer an(p);
  const AbstractState zwup = an.summary("zwup").state;
  CHECK(zwup.accesses == std::set<AccessRecord>{R("arg1.x.g", 1), W("arg1.g.f", 0)});
  CHECK(zwup.wobbly.count(E("arg1")));
  CHECK(zwup.lock == 0);

  const AbstractState call = an.apply_summary(p.method("zwup"), {E("arg1.x")}, AbstractState::bottom());
  CHECK(call.accesses == std::set<AccessRecord>{R("arg1.x.x.g", 1), W("arg1.x.g.f", 0)});
  CHECK(call.wobbly.count(E("arg1.x")));
  CHECK(call.lock == 0);
  CHECK(an.summary("qwop").state == call);

  // Caller lock context shifts callee accesses.
  const AbstractState locked = an.apply_summary(p.method("zwup"), {E("arg1.x")}, state({}, 1, {}));
  CHECK(locked.accesses == std::set<AccessRecord>{R("arg1.x.x.g", 2), W("arg1.x.g.f", 1)});
  CHECK(locked.lock == 1);
}

TEST_CASE("apply_summary with overlapping and local actuals") {
  Program p = parse_program(
      "method n(arg1, arg2){ x := arg2.h; }\n"
      "method m(arg1){ y := new(); n(arg1.f, arg1.f.g); n(y, y.f); }\n");
  Analyzer an(p);
  const AbstractState d = an.apply_summary(p.method("n"), {E("arg1.f"), E("arg1.f.g")},
                                           AbstractState::bottom());
  CHECK(d.wobbly.count(E("arg1.f")));
  CHECK(d.wobbly.count(E("arg1.f.g")));
  CHECK(d.accesses == std::set<AccessRecord>{R("arg1.f.g.h", 0)});

  // Local-rooted actuals contribute nothing.
  const AbstractState l = an.apply_summary(p.method("n"), {E("y"), E("y.f")}, AbstractState::bottom());
  CHECK(l == AbstractState::bottom());

  CHECK_THROWS_AS(an.apply_summary(p.method("n"), {E("arg1")}, AbstractState::bottom()),
                  AnalysisError);
}

TEST_CASE("fixture summaries") {
  Program dodo = fixture("dodo.il");
  Analyzer d(dodo);
  CHECK(d.summary("zap").state == state({E("arg1.dee")}, 0, {R("arg1.dee", 1)}));
  CHECK(d.summary("zup").state == state({E("arg1.dee")}, 0, {W("arg1.dee", 0)}));

  Program burble = fixture("burble.il");
  Analyzer b(burble);
  CHECK(b.summary("beps").state == state({E("arg1"), E("arg1.f")}, 0, {W("arg1.f", 0)}));
  CHECK_THROWS_AS(b.summary("nope"), AnalysisError);
}

TEST_CASE("summaries are computed callees first") {
  Program p = parse_program(
      "method a(){ b(); c(); }\n"
      "method b(){ c(); }\n"
      "method c(){ skip; }\n");
  CHECK(reverse_topological_order(p) == std::vector<MethodName>{"c", "b", "a"});
}

TEST_CASE("oracle agrees on the fixtures") {
  for (const char* f : {"dodo.il", "burble.il", "wurble.il"}) {
    Program p = fixture(f);
    for (const OracleCheck& c : oracle_check(p, p.order, {1, 2})) CHECK_MESSAGE(c.ok(), c.diff());
  }
}

TEST_CASE("oracle catches a broken analyzer") {
  Program p = parse_program("method m(arg1){ while * { x := arg1.f; } }");
  AnalysisOptions broken;
  broken.mutation = Mutation::SkipLoopBody;
  auto checks = oracle_check(p, {"m"}, {1}, broken);
  REQUIRE(checks.size() == 1);
  CHECK_FALSE(checks[0].ok());
  CHECK(checks[0].diff().find("A missing read arg1.f @0") != std::string::npos);

  Program q = parse_program(
      "method m(arg1){ n(arg1, arg1.f); }\n"
      "method n(arg1, arg2){ skip; }\n");
  AnalysisOptions no_overlap;
  no_overlap.mutation = Mutation::DropCallOverlap;
  CHECK_FALSE(oracle_check(q, {"m"}, {1}, no_overlap)[0].ok());
  CHECK(oracle_check(q, {"m"}, {1})[0].ok());
}

TEST_CASE("loop unrolling: zero may differ from one, one equals two") {
  Program p = parse_program("method m(arg1){ while * { lock(); x := arg1.f; unlock(); } }");
  auto checks = oracle_check(p, {"m"}, {0, 1, 2});
  REQUIRE(checks.size() == 3);
  CHECK_FALSE(checks[0].ok());
  CHECK(checks[1].ok());
  CHECK(checks[2].ok());
  CHECK(checks[1].abstracted == checks[2].abstracted);
}
