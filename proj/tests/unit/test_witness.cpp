#include <doctest.h>

#include "stabrace/witness.hpp"
#include "test_support.hpp"

using namespace stabrace;
using namespace stabrace::testing;

namespace {

RaceReport find_report(const Program& p, const MethodName& m1, const MethodName& m2) {
  for (RaceReport& r : report(p, summarize_program(p), ReportMode::Strict))
    if (r.method1 == m1 && r.method2 == m2) return r;
  FAIL("no report " << m1 << " x " << m2);
  return {};
}

}  // namespace

TEST_CASE("initial state for a single field") {
  const TwoThreadConfig c = build_initial_state(Var("arg1"), Var("arg1"), {"f"}, {"f"});
  CHECK(c.heap.get({Loc{0}, "f"}) == Loc{0});
  CHECK(c.heap.get({Loc{1}, "f"}) == Loc{0});
  CHECK(c.heap.cells().size() == 2);
  CHECK(c.stacks[0].size() == 1);
  CHECK(c.stacks[0].back().get(Var("arg1")) == Loc{1});
  CHECK(c.stacks[1].back().get(Var("arg1")) == Loc{1});
  CHECK(c.stacks[0].back().get(Var("x")) == Loc{0});
  CHECK(c.locks == std::array<unsigned, 2>{0, 0});
  CHECK(eval_address(E("arg1.f"), c.stacks[0].back(), c.heap) == Address{Loc{1}, "f"});
  CHECK(eval_address(E("arg1.f"), c.stacks[1].back(), c.heap) == Address{Loc{1}, "f"});
}

TEST_CASE("initial state for a two-field chain") {
  const TwoThreadConfig c = build_initial_state(Var("arg1"), Var("arg2"), {"f", "g"}, {"f", "g"});
  CHECK(c.heap.get({Loc{1}, "f"}) == Loc{2});
  CHECK(c.heap.get({Loc{1}, "g"}) == Loc{0});
  CHECK(c.heap.get({Loc{2}, "g"}) == Loc{0});
  CHECK(c.heap.get({Loc{2}, "f"}) == Loc{0});
  CHECK(c.heap.get({Loc{0}, "f"}) == Loc{0});
  CHECK(c.heap.get({Loc{0}, "g"}) == Loc{0});

  const Frame& s1 = c.stacks[0].back();
  const Frame& s2 = c.stacks[1].back();
  CHECK(eval_address(E("arg1.f.g"), s1, c.heap) == eval_address(E("arg2.f.g"), s2, c.heap));
  CHECK(eval_address(E("arg1.f.g"), s1, c.heap) == Address{Loc{2}, "g"});
  CHECK(is_disconnected(E("arg1.f.g"), s1, c.heap));
  CHECK(is_acyclic(E("arg1.f.g"), s1, c.heap));
  CHECK(is_disconnected(E("arg2.f.g"), s2, c.heap));
  CHECK(is_acyclic(E("arg2.f.g"), s2, c.heap));
  CHECK(is_well_behaved(c.stacks[0], c.heap));
  CHECK(is_well_behaved(c.stacks[1], c.heap));
}

TEST_CASE("disconnectedness and acyclicity detect sharing and cycles") {
  Frame s(Loc{0});
  s.set(Var("arg1"), Loc{1});
  Heap h;
  h.set({Loc{0}, "f"}, Loc{0});
  h.set({Loc{1}, "f"}, Loc{1});
  CHECK_FALSE(is_acyclic(E("arg1.f.f"), s, h));
  h.set({Loc{1}, "f"}, Loc{0});
  CHECK(is_acyclic(E("arg1.f"), s, h));
  CHECK(is_disconnected(E("arg1.f"), s, h));
  s.set(Var("x"), Loc{1});
  CHECK_FALSE(is_disconnected(E("arg1.f"), s, h));
  s.set(Var("x"), Loc{0});
  h.set({Loc{0}, "g"}, Loc{1});
  CHECK_FALSE(is_disconnected(E("arg1.f"), s, h));
}

TEST_CASE("find_access_prefix") {
  Program p = fixture("dodo.il");
  const TwoThreadConfig c = build_initial_state(Var("arg1"), Var("arg1"), {"dee"}, p.fields());
  const Config init{c.stacks[0], c.heap, 0};

  auto zup = find_access_prefix(p, p.method("zup").body, init, W("arg1.dee", 0), {});
  REQUIRE(zup.has_value());
  REQUIRE(zup->prefix.size() == 2);
  CHECK(std::holds_alternative<cmd::Skip>(zup->prefix[0].cmd));
  CHECK(std::holds_alternative<cmd::New>(zup->prefix[1].cmd));
  CHECK(std::holds_alternative<cmd::Store>(zup->pending));
  CHECK(zup->address == Address{Loc{1}, "dee"});

  auto zap = find_access_prefix(p, p.method("zap").body, init, R("arg1.dee", 1), {});
  REQUIRE(zap.has_value());
  REQUIRE(zap->prefix.size() == 2);
  CHECK(std::holds_alternative<cmd::Lock>(zap->prefix.back().cmd));
  CHECK(zap->config.locks == 1);

  CHECK_FALSE(find_access_prefix(p, p.method("zap").body, init, R("arg1.dee", 0), {}));
  CHECK_FALSE(find_access_prefix(p, p.method("zap").body, init, W("arg1.dee", 1), {}));
}

TEST_CASE("find_access_prefix takes the shortest prefix across traces") {
  Program p = parse_program(
      "method m(arg1){ if * { x := new(); y := new(); arg1.f := y; } else { z := new(); arg1.f := z; } }");
  const TwoThreadConfig c = build_initial_state(Var("arg1"), Var("arg1"), {"f"}, p.fields());
  auto pre = find_access_prefix(p, p.method("m").body, {c.stacks[0], c.heap, 0}, W("arg1.f", 0), {});
  REQUIRE(pre.has_value());
  CHECK(pre->prefix.size() == 2);
}

TEST_CASE("find_access_prefix inside a callee") {
  Program p = parse_program(
      "method m(arg1){ n(arg1.g); }\n"
      "method n(arg1){ y := new(); arg1.f := y; }\n");
  const TwoThreadConfig c = build_initial_state(Var("arg1"), Var("arg1"), {"g", "f"}, p.fields());
  auto pre = find_access_prefix(p, p.method("m").body, {c.stacks[0], c.heap, 0}, W("arg1.g.f", 0), {});
  REQUIRE(pre.has_value());
  CHECK(pre->config.stack.size() == 2);
  CHECK(pre->address == Address{Loc{2}, "f"});
}

TEST_CASE("reconstruct the Dodo race") {
  Program p = fixture("dodo.il");
  const RaceReport r = find_report(p, "zup", "zap");
  Reconstruction rec = reconstruct(r, p);
  REQUIRE_MESSAGE(rec.ok(), rec.failure);
  const WitnessTrace& w = *rec.witness;
  CHECK(w.method1 == "zup");
  CHECK(w.method2 == "zap");
  CHECK(w.racy_addr == Address{Loc{1}, "dee"});
  REQUIRE(w.schedule.size() == 4);
  CHECK(w.schedule[0].first == ThreadId::T1);
  CHECK(w.schedule[1].first == ThreadId::T1);
  CHECK(w.schedule[2].first == ThreadId::T2);
  CHECK(std::holds_alternative<cmd::Lock>(w.schedule[3].second));
  CHECK(std::holds_alternative<cmd::Store>(w.succ1));
  CHECK(std::holds_alternative<cmd::Load>(w.succ2));
  CHECK(verify_witness(w, p));

  // Replaying is bit-for-bit deterministic.
  auto trace = replay_schedule(w.schedule, w.initial, StepEnv::from(p, {}));
  REQUIRE(trace.has_value());
  CHECK(trace->final_config().heap == w.final_heap);
}

TEST_CASE("reconstruct the Burble race") {
  Program p = fixture("burble.il");
  Reconstruction rec = reconstruct(find_report(p, "reps", "meps"), p);
  REQUIRE_MESSAGE(rec.ok(), rec.failure);
  CHECK(rec.witness->racy_addr == Address{Loc{1}, "f"});
  Reconstruction self = reconstruct(find_report(p, "reps", "reps"), p);
  REQUIRE_MESSAGE(self.ok(), self.failure);
}

TEST_CASE("reconstruct orders the unprotected access first") {
  Program p = parse_program(
      "method r(arg1){ x := arg1.f; }\n"
      "method w(arg1){ y := new(); lock(); arg1.f := y; unlock(); }\n");
  RaceReport r = find_report(p, "w", "r");
  CHECK(r.access1.record.lock == 1);
  Reconstruction rec = reconstruct(r, p);
  REQUIRE_MESSAGE(rec.ok(), rec.failure);
  CHECK(rec.witness->method1 == "r");
  CHECK(rec.witness->method2 == "w");
}

TEST_CASE("a fabricated report has no witness") {
  Program p = fixture("dodo.il");
  RaceReport r = find_report(p, "zup", "zap");
  r.access2.record = W("arg1.dee", 0);  // zap never writes
  Reconstruction rec = reconstruct(r, p);
  CHECK_FALSE(rec.ok());
  CHECK_FALSE(rec.failure.empty());

  RaceReport both_locked = find_report(p, "zup", "zap");
  both_locked.access1.record.lock = 1;
  CHECK_FALSE(reconstruct(both_locked, p).ok());
}

TEST_CASE("a tampered witness fails verification") {
  Program p = fixture("dodo.il");
  Reconstruction rec = reconstruct(find_report(p, "zup", "zap"), p);
  REQUIRE(rec.ok());
  WitnessTrace w = *rec.witness;
  w.racy_addr = Address{Loc{0}, "dee"};
  CHECK_FALSE(verify_witness(w, p));
  w = *rec.witness;
  w.schedule.push_back({ThreadId::T1, cmd::Unlock{}});
  CHECK_FALSE(verify_witness(w, p));
}
