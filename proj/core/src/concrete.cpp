#include "stabrace/concrete.hpp"

#include <algorithm>

namespace stabrace {

namespace {

// Executes a command in place; false when stuck. `alloc` is the location
// new() binds.
bool apply(const SimpleStmt& c, Config& cfg, const StepEnv& env, Loc alloc) {
  if (cfg.stack.empty()) return false;
  Frame& top = cfg.stack.back();
  if (std::holds_alternative<cmd::Skip>(c)) return true;
  if (auto* a = std::get_if<cmd::Assign>(&c)) {
    top.set(a->dst, top.get(a->src));
    return true;
  }
  if (auto* l = std::get_if<cmd::Load>(&c)) {
    auto addr = eval_address(l->src, top, cfg.heap);
    if (!addr) return false;
    auto v = cfg.heap.get(*addr);
    if (!v) return false;
    top.set(l->dst, *v);
    return true;
  }
  if (auto* s = std::get_if<cmd::Store>(&c)) {
    auto addr = eval_address(s->dst, top, cfg.heap);
    if (!addr || !cfg.heap.contains(*addr)) return false;
    cfg.heap.set(*addr, top.get(s->src));
    return true;
  }
  if (auto* n = std::get_if<cmd::New>(&c)) {
    top.set(n->dst, alloc);
    for (const FieldName& f : env.fields) cfg.heap.set({alloc, f}, alloc);
    return true;
  }
  if (std::holds_alternative<cmd::Lock>(c)) {
    cfg.locks = env.lock_cap.incr(cfg.locks);
    return true;
  }
  if (std::holds_alternative<cmd::Unlock>(c)) {
    if (cfg.locks == 0) return false;
    --cfg.locks;
    return true;
  }
  if (auto* p = std::get_if<cmd::Push>(&c)) {
    Frame callee;
    for (std::size_t i = 0; i < p->actuals.size(); ++i) {
      auto v = eval_expr(p->actuals[i], top, cfg.heap);
      if (!v) return false;
      callee.set(Var::formal(static_cast<unsigned>(i + 1)), *v);
    }
    cfg.stack.push_back(std::move(callee));
    return true;
  }
  if (std::holds_alternative<cmd::Pop>(c)) {
    if (cfg.stack.size() < 2) return false;
    cfg.stack.pop_back();
    return true;
  }
  return false;
}

bool allocates(const SimpleStmt& c) { return std::holds_alternative<cmd::New>(c); }

}  // namespace

std::string to_string(Loc l) {
  return l.is_nil() ? std::string("nil") : "l" + std::to_string(l.id);
}

std::string to_string(const Address& a) {
  return "(" + to_string(a.loc) + "," + a.field + ")";
}

void Heap::set(const Address& a, Loc value) {
  if (a.loc.is_nil()) throw std::logic_error("heap cell at nil location");
  cells_[a] = value;
}

std::set<Loc> Heap::locations() const {
  std::set<Loc> out;
  for (const auto& [addr, _] : cells_) out.insert(addr.loc);
  return out;
}

std::vector<Loc> Heap::fresh_locations(unsigned count) const {
  const std::set<Loc> used = locations();
  std::vector<Loc> out;
  for (std::uint32_t id = 0; out.size() < count; ++id)
    if (!used.count(Loc{id})) out.push_back(Loc{id});
  return out;
}

std::optional<Address> eval_address(const Expr& path, const Frame& s, const Heap& h) {
  if (path.fields.empty()) return std::nullopt;
  Address addr{s.get(path.root), path.fields.front()};
  for (std::size_t i = 1; i < path.fields.size(); ++i) {
    auto next = h.get(addr);
    if (!next) return std::nullopt;
    addr = Address{*next, path.fields[i]};
  }
  return addr;
}

std::optional<Loc> eval_expr(const Expr& e, const Frame& s, const Heap& h) {
  if (e.is_var()) return s.get(e.root);
  auto addr = eval_address(e, s, h);
  if (!addr) return std::nullopt;
  return h.get(*addr);
}

bool is_well_behaved(const CallStack& stack, const Heap& h) {
  const std::set<Loc> locs = h.locations();
  for (const Frame& f : stack) {
    if (!f.fallback().is_nil() && !locs.count(f.fallback())) return false;
    for (const auto& [_, l] : f.bindings())
      if (!locs.count(l)) return false;
  }
  for (const auto& [_, v] : h.cells())
    if (!locs.count(v)) return false;
  return true;
}

Config universal_config(const std::set<FieldName>& fields) {
  Config cfg;
  cfg.stack.emplace_back(Loc{0});
  for (const FieldName& f : fields) cfg.heap.set({Loc{0}, f}, Loc{0});
  return cfg;
}

StepEnv StepEnv::from(const Program& p, const EnumBounds& b) {
  return StepEnv{p.fields(), b.lock_cap, b.canonical_alloc, b.alloc_width};
}

std::vector<Config> step_simple(const SimpleStmt& c, const Config& cfg, const StepEnv& env) {
  std::vector<Config> out;
  if (allocates(c)) {
    const unsigned width = env.canonical_alloc ? 1 : std::max(1u, env.alloc_width);
    for (Loc l : cfg.heap.fresh_locations(width)) {
      Config next = cfg;
      if (apply(c, next, env, l)) out.push_back(std::move(next));
    }
    return out;
  }
  Config next = cfg;
  if (apply(c, next, env, Loc::nil())) out.push_back(std::move(next));
  return out;
}

std::string to_string(const std::vector<SimpleStmt>& syntactic) {
  std::string out;
  for (std::size_t i = 0; i < syntactic.size(); ++i) {
    if (i) out += "; ";
    out += to_string(syntactic[i]);
  }
  return out;
}

// ---------------------------------------------------------------------------

TraceEnumerator::TraceEnumerator(const Program& p, EnumBounds bounds)
    : program_(p), bounds_(bounds), env_(StepEnv::from(p, bounds)) {}

void TraceEnumerator::for_each(const Block& body, const Config& init, const Visitor& visit) {
  commands_.clear();
  choices_.clear();
  stopped_ = false;
  Config cfg = init;
  exec_block(body, 0, cfg, [&](Config& final_cfg) {
    if (!visit(Trace{commands_, choices_}, final_cfg)) stopped_ = true;
  });
}

std::vector<Trace> TraceEnumerator::enumerate(const Block& body, const Config& init) {
  std::vector<Trace> out;
  for_each(body, init, [&](const Trace& t, const Config&) {
    out.push_back(t);
    return true;
  });
  return out;
}

std::vector<ConcreteState> TraceEnumerator::materialize(const Block& body, const Config& init,
                                                        const Trace& trace) {
  std::vector<ConcreteState> states;
  std::vector<ConcreteState> result;
  bool found = false;
  states_ = &states;
  forced_ = &trace.choices;
  try {
    for_each(body, init, [&](const Trace& t, const Config&) {
      found = t.commands == trace.commands;
      result = states;
      return false;
    });
  } catch (...) {
    states_ = nullptr;
    forced_ = nullptr;
    throw;
  }
  states_ = nullptr;
  forced_ = nullptr;
  if (!found) throw std::logic_error("trace does not replay from the given state");
  return result;
}

void TraceEnumerator::choose(std::uint32_t n, Config& cfg,
                             const std::function<void(std::uint32_t, Config&)>& alt) {
  if (stopped_) return;
  if (forced_) {
    if (choices_.size() >= forced_->size()) return;
    const std::uint32_t idx = (*forced_)[choices_.size()];
    if (idx >= n) return;
    choices_.push_back(idx);
    alt(idx, cfg);
    choices_.pop_back();
    return;
  }
  for (std::uint32_t idx = 0; idx < n && !stopped_; ++idx) {
    choices_.push_back(idx);
    if (idx + 1 < n) {
      Config copy = cfg;
      alt(idx, copy);
    } else {
      alt(idx, cfg);
    }
    choices_.pop_back();
  }
}

void TraceEnumerator::emit(const SimpleStmt& c, const Config& cfg, const Cont& k, Config& next) {
  commands_.push_back(c);
  if (commands_.size() > bounds_.max_trace_len) {
    commands_.pop_back();
    throw BoundExceeded("trace exceeds max_trace_len = " +
                        std::to_string(bounds_.max_trace_len));
  }
  if (states_) states_->push_back({c, cfg});
  k(next);
  if (states_) states_->pop_back();
  commands_.pop_back();
}

void TraceEnumerator::exec_simple(const SimpleStmt& c, Config& cfg, const Cont& k) {
  if (stopped_) return;
  if (allocates(c)) {
    const unsigned width = env_.canonical_alloc ? 1 : std::max(1u, env_.alloc_width);
    const std::vector<Loc> fresh = cfg.heap.fresh_locations(width);
    auto run = [&](std::uint32_t idx, Config& local) {
      apply(c, local, env_, fresh[idx]);
      emit(c, local, k, local);
    };
    if (width == 1) {
      run(0, cfg);
    } else {
      choose(width, cfg, run);
    }
    return;
  }
  if (!apply(c, cfg, env_, Loc::nil())) {
    ++stuck_;
    return;
  }
  emit(c, cfg, k, cfg);
}

void TraceEnumerator::exec_block(const Block& b, std::size_t i, Config& cfg, const Cont& k) {
  if (stopped_) return;
  if (i == b.size()) {
    k(cfg);
    return;
  }
  const Stmt& s = b[i];
  const Cont next = [this, &b, i, &k](Config& c) { exec_block(b, i + 1, c, k); };
  if (auto* c = std::get_if<SimpleStmt>(&s.node)) {
    exec_simple(*c, cfg, next);
  } else if (auto* branch = std::get_if<IfStmt>(&s.node)) {
    choose(2, cfg, [&](std::uint32_t idx, Config& local) {
      exec_block(idx == 0 ? branch->then_branch : branch->else_branch, 0, local, next);
    });
  } else if (auto* loop = std::get_if<WhileStmt>(&s.node)) {
    exec_while(*loop, 0, cfg, next);
  } else if (auto* call = std::get_if<CallStmt>(&s.node)) {
    exec_call(*call, cfg, next);
  }
}

void TraceEnumerator::exec_while(const WhileStmt& w, unsigned iter, Config& cfg, const Cont& k) {
  const std::uint32_t n = iter < bounds_.loop_unroll ? 2 : 1;
  choose(n, cfg, [&](std::uint32_t idx, Config& local) {
    if (idx == 0) {
      k(local);
    } else {
      exec_block(w.body, 0, local,
                 [this, &w, iter, &k](Config& c) { exec_while(w, iter + 1, c, k); });
    }
  });
}

void TraceEnumerator::exec_call(const CallStmt& call, Config& cfg, const Cont& k) {
  const Method& callee = program_.method(call.callee);
  const SimpleStmt push = cmd::Push{call.callee, call.actuals};
  if (!apply(push, cfg, env_, Loc::nil())) {
    ++stuck_;
    return;
  }
  emit(push, cfg, [&](Config& in_callee) {
    exec_block(callee.body, 0, in_callee, [&](Config& done) {
      static const SimpleStmt pop = cmd::Pop{};
      if (!apply(pop, done, env_, Loc::nil())) {
        ++stuck_;
        return;
      }
      emit(pop, done, k, done);
    });
  }, cfg);
}

std::vector<Trace> enumerate_traces(const Program& p, const Block& body, const Config& init,
                                    const EnumBounds& bounds) {
  return TraceEnumerator(p, bounds).enumerate(body, init);
}

// ---------------------------------------------------------------------------

const char* to_string(ThreadId t) { return t == ThreadId::T1 ? "t1" : "t2"; }

std::vector<std::pair<ThreadId, SimpleStmt>> ConcurrentTrace::schedule() const {
  std::vector<std::pair<ThreadId, SimpleStmt>> out;
  out.reserve(states.size());
  for (const ConcurrentState& s : states) out.emplace_back(s.thread, s.cmd);
  return out;
}

std::vector<TwoThreadConfig> step_thread(ThreadId t, const SimpleStmt& c,
                                         const TwoThreadConfig& cfg, const StepEnv& env) {
  const std::size_t me = index(t);
  const std::size_t them = index(other(t));
  Config single{cfg.stacks[me], cfg.heap, cfg.locks[me]};
  std::vector<TwoThreadConfig> out;
  for (Config& next : step_simple(c, single, env)) {
    const bool allowed =
        cfg.locks[them] == 0 || (cfg.locks[me] == 0 && next.locks == 0);
    if (!allowed) continue;
    TwoThreadConfig joined = cfg;
    joined.stacks[me] = std::move(next.stack);
    joined.heap = std::move(next.heap);
    joined.locks[me] = next.locks;
    out.push_back(std::move(joined));
  }
  return out;
}

std::vector<ConcurrentTrace> interleave(const std::vector<SimpleStmt>& t1,
                                        const std::vector<SimpleStmt>& t2,
                                        const TwoThreadConfig& init, const StepEnv& env) {
  std::vector<ConcurrentTrace> out;
  ConcurrentTrace current{init, {}};
  auto dfs = [&](auto&& self, std::size_t i, std::size_t j) -> void {
    const TwoThreadConfig cfg = current.final_config();
    bool stepped = false;
    if (i < t1.size()) {
      for (TwoThreadConfig& next : step_thread(ThreadId::T1, t1[i], cfg, env)) {
        stepped = true;
        current.states.push_back({ThreadId::T1, t1[i], std::move(next)});
        self(self, i + 1, j);
        current.states.pop_back();
      }
    }
    if (j < t2.size()) {
      for (TwoThreadConfig& next : step_thread(ThreadId::T2, t2[j], cfg, env)) {
        stepped = true;
        current.states.push_back({ThreadId::T2, t2[j], std::move(next)});
        self(self, i, j + 1);
        current.states.pop_back();
      }
    }
    if (!stepped) out.push_back(current);
  };
  dfs(dfs, 0, 0);
  return out;
}

std::optional<ConcurrentTrace> replay_schedule(
    const std::vector<std::pair<ThreadId, SimpleStmt>>& schedule, const TwoThreadConfig& init,
    const StepEnv& env) {
  ConcurrentTrace trace{init, {}};
  for (const auto& [thread, c] : schedule) {
    auto next = step_thread(thread, c, trace.final_config(), env);
    if (next.empty()) return std::nullopt;
    trace.states.push_back({thread, c, std::move(next.front())});
  }
  return trace;
}

namespace {

struct AccessView {
  AccessKind kind;
  const Expr* path;
};

std::optional<AccessView> access_of(const SimpleStmt& c) {
  if (auto* l = std::get_if<cmd::Load>(&c)) return AccessView{AccessKind::Read, &l->src};
  if (auto* s = std::get_if<cmd::Store>(&c)) return AccessView{AccessKind::Write, &s->dst};
  return std::nullopt;
}

}  // namespace

std::optional<RaceEvidence> check_race(const ConcurrentTrace& prefix, const SimpleStmt& succ1,
                                       const SimpleStmt& succ2, const StepEnv& env) {
  const auto a1 = access_of(succ1);
  const auto a2 = access_of(succ2);
  if (!a1 || !a2) return std::nullopt;
  if (a1->kind == AccessKind::Read && a2->kind == AccessKind::Read) return std::nullopt;

  const TwoThreadConfig& cfg = prefix.final_config();
  if (cfg.stacks[0].empty() || cfg.stacks[1].empty()) return std::nullopt;
  if (step_thread(ThreadId::T1, succ1, cfg, env).empty() ||
      step_thread(ThreadId::T2, succ2, cfg, env).empty())
    return std::nullopt;

  const auto addr1 = eval_address(*a1->path, cfg.stacks[0].back(), cfg.heap);
  const auto addr2 = eval_address(*a2->path, cfg.stacks[1].back(), cfg.heap);
  if (!addr1 || !addr2 || *addr1 != *addr2) return std::nullopt;
  return RaceEvidence{*addr1, a1->kind, a2->kind, *a1->path, *a2->path};
}

}  // namespace stabrace
