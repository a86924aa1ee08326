#pragma once

// Concrete trace-collecting semantics: single-thread execution with an
// explicit call stack, bounded enumeration of traces, two-thread
// interleaving with a single reentrant lock, and the race predicate.
// This is the ground truth the analyzer is checked against.

#include <array>
#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "stabrace/ast.hpp"
#include "stabrace/domain.hpp"

namespace stabrace {

struct Loc {
  static constexpr std::uint32_t kNil = std::numeric_limits<std::uint32_t>::max();

  std::uint32_t id = kNil;

  static constexpr Loc nil() { return Loc{}; }
  constexpr bool is_nil() const { return id == kNil; }

  auto operator<=>(const Loc&) const = default;
};

std::string to_string(Loc l);

struct Address {
  Loc loc;
  FieldName field;

  auto operator<=>(const Address&) const = default;
  bool operator==(const Address&) const = default;
};

std::string to_string(const Address& a);

/// A total map from variables to locations. Variables without an explicit
/// binding read as `fallback` (nil for a freshly pushed frame).
class Frame {
public:
  Frame() = default;
  explicit Frame(Loc fallback) : fallback_(fallback) {}

  Loc get(const Var& v) const {
    auto it = bindings_.find(v);
    return it == bindings_.end() ? fallback_ : it->second;
  }
  void set(const Var& v, Loc l) { bindings_[v] = l; }

  Loc fallback() const { return fallback_; }
  const std::map<Var, Loc>& bindings() const { return bindings_; }

  bool operator==(const Frame&) const = default;

private:
  std::map<Var, Loc> bindings_;
  Loc fallback_ = Loc::nil();
};

/// Current frame is `back()`.
using CallStack = std::vector<Frame>;

/// Finite partial map from addresses to locations. Never defined on an
/// address whose location is nil.
class Heap {
public:
  std::optional<Loc> get(const Address& a) const {
    auto it = cells_.find(a);
    if (it == cells_.end()) return std::nullopt;
    return it->second;
  }
  bool contains(const Address& a) const { return cells_.count(a) != 0; }
  void set(const Address& a, Loc value);

  /// Locations owning at least one cell.
  std::set<Loc> locations() const;
  /// The `count` least location ids that own no cell.
  std::vector<Loc> fresh_locations(unsigned count) const;

  const std::map<Address, Loc>& cells() const { return cells_; }

  bool operator==(const Heap&) const = default;

private:
  std::map<Address, Loc> cells_;
};

struct Config {
  CallStack stack;
  Heap heap;
  unsigned locks = 0;

  bool operator==(const Config&) const = default;
};

struct ConcreteState {
  SimpleStmt cmd;
  Config cfg;
};

/// Resolves the address a path denotes: (s(x), f) for `x.f`, and
/// (h(addr(p)), f) for `p.f`. Empty when an intermediate cell is undefined.
std::optional<Address> eval_address(const Expr& path, const Frame& s, const Heap& h);
/// Value of an expression; empty when a path's address is not in the heap.
std::optional<Loc> eval_expr(const Expr& e, const Frame& s, const Heap& h);

/// Every stack binding (including non-nil fallbacks) and every heap value
/// lies in Loc(h). Nil fallbacks of pushed frames are allowed: definite
/// initialisation keeps them from ever being read.
bool is_well_behaved(const CallStack& stack, const Heap& h);

/// The universal-node state: every variable bound to l0 and h(l0, f) = l0
/// for every field.
Config universal_config(const std::set<FieldName>& fields);

struct EnumBounds {
  unsigned loop_unroll = 2;
  std::size_t max_trace_len = 10'000;
  /// new() deterministically takes the least unused location id.
  bool canonical_alloc = true;
  /// Number of candidate locations new() branches over when not canonical.
  unsigned alloc_width = 2;
  LockCap lock_cap;
};

struct StepEnv {
  std::set<FieldName> fields;
  LockCap lock_cap;
  bool canonical_alloc = true;
  unsigned alloc_width = 2;

  static StepEnv from(const Program& p, const EnumBounds& b);
};

/// One step of a simple (or runtime push/pop) command. Empty when stuck.
/// Push binds arg_i to the value of the i-th actual in a fresh nil frame.
std::vector<Config> step_simple(const SimpleStmt& c, const Config& cfg, const StepEnv& env);

class BoundExceeded : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// A trace stored as its syntactic projection plus the nondeterministic
/// choices (branch, loop, allocation) that produced it. Full states are
/// rematerialized by replaying the choices.
struct Trace {
  std::vector<SimpleStmt> commands;
  std::vector<std::uint32_t> choices;

  bool operator==(const Trace&) const = default;
};

std::string to_string(const std::vector<SimpleStmt>& syntactic);

/// Bounded exploration of the trace-collecting semantics. Both branches of
/// every `if *` are taken, every `while *` runs 0..loop_unroll times, calls
/// emit push, the callee body, then pop. Traces are produced in
/// lexicographic order of their choice sequences.
class TraceEnumerator {
public:
  /// Return false to stop the enumeration.
  using Visitor = std::function<bool(const Trace&, const Config& final_cfg)>;

  TraceEnumerator(const Program& p, EnumBounds bounds);

  void for_each(const Block& body, const Config& init, const Visitor& visit);
  std::vector<Trace> enumerate(const Block& body, const Config& init);
  /// Replays `trace` from `init`; the result has one state per command.
  std::vector<ConcreteState> materialize(const Block& body, const Config& init,
                                         const Trace& trace);

  /// Prefixes abandoned because a command was stuck, over all runs so far.
  std::size_t stuck_prefixes() const { return stuck_; }

  const StepEnv& env() const { return env_; }

private:
  using Cont = std::function<void(Config&)>;

  void exec_block(const Block& b, std::size_t i, Config& cfg, const Cont& k);
  void exec_simple(const SimpleStmt& c, Config& cfg, const Cont& k);
  void exec_while(const WhileStmt& w, unsigned iter, Config& cfg, const Cont& k);
  void exec_call(const CallStmt& call, Config& cfg, const Cont& k);
  void emit(const SimpleStmt& c, const Config& cfg, const Cont& k, Config& next);
  /// Runs `alt(i, cfg)` for each alternative, or only the forced one.
  void choose(std::uint32_t n, Config& cfg,
              const std::function<void(std::uint32_t, Config&)>& alt);

  const Program& program_;
  EnumBounds bounds_;
  StepEnv env_;
  std::size_t stuck_ = 0;

  std::vector<SimpleStmt> commands_;
  std::vector<std::uint32_t> choices_;
  std::vector<ConcreteState>* states_ = nullptr;
  const std::vector<std::uint32_t>* forced_ = nullptr;
  bool stopped_ = false;
};

std::vector<Trace> enumerate_traces(const Program& p, const Block& body,
                                    const Config& init, const EnumBounds& bounds);

// ---------------------------------------------------------------------------
// Two threads.

enum class ThreadId : std::uint8_t { T1 = 0, T2 = 1 };

inline std::size_t index(ThreadId t) { return static_cast<std::size_t>(t); }
inline ThreadId other(ThreadId t) { return t == ThreadId::T1 ? ThreadId::T2 : ThreadId::T1; }
const char* to_string(ThreadId t);

struct TwoThreadConfig {
  std::array<CallStack, 2> stacks;
  Heap heap;
  std::array<unsigned, 2> locks{0, 0};

  bool operator==(const TwoThreadConfig&) const = default;
};

struct ConcurrentState {
  ThreadId thread;
  SimpleStmt cmd;
  TwoThreadConfig cfg;
};

struct ConcurrentTrace {
  TwoThreadConfig initial;
  std::vector<ConcurrentState> states;

  const TwoThreadConfig& final_config() const {
    return states.empty() ? initial : states.back().cfg;
  }
  std::vector<std::pair<ThreadId, SimpleStmt>> schedule() const;
};

/// Thread `t` executes `c` against the shared heap. Empty when the command
/// is stuck or the lock side condition forbids the step: the other thread
/// must hold no lock, or this thread must hold none before and after.
std::vector<TwoThreadConfig> step_thread(ThreadId t, const SimpleStmt& c,
                                         const TwoThreadConfig& cfg, const StepEnv& env);

/// Maximal weaves of two command sequences from `init`, re-executing each
/// pending command against the current shared heap. A weave is maximal when
/// both sequences are exhausted or neither thread can step. Every prefix of
/// a returned weave is itself a valid concurrent trace.
std::vector<ConcurrentTrace> interleave(const std::vector<SimpleStmt>& t1,
                                        const std::vector<SimpleStmt>& t2,
                                        const TwoThreadConfig& init, const StepEnv& env);

/// Executes a fixed schedule; empty if some step is stuck or forbidden.
std::optional<ConcurrentTrace> replay_schedule(
    const std::vector<std::pair<ThreadId, SimpleStmt>>& schedule,
    const TwoThreadConfig& init, const StepEnv& env);

struct RaceEvidence {
  Address address;
  AccessKind kind1;
  AccessKind kind2;
  Expr path1;
  Expr path2;
};

/// Both `succ1` (thread 1) and `succ2` (thread 2) can extend `prefix`, they
/// access paths resolving to the same address in the final shared state,
/// and at least one of them is a store.
std::optional<RaceEvidence> check_race(const ConcurrentTrace& prefix, const SimpleStmt& succ1,
                                       const SimpleStmt& succ2, const StepEnv& env);

}  // namespace stabrace
