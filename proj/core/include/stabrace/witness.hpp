#pragma once

// Concrete witnesses for strict-mode reports. The two racing methods start
// from a chain-shaped heap in which both racy paths resolve to the same
// address; the thread whose access is unprotected runs up to its access,
// then the other thread runs up to its own, and the pending pair is checked
// against the race predicate.

#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "stabrace/concrete.hpp"
#include "stabrace/reporter.hpp"

namespace stabrace {

struct WitnessTrace {
  TwoThreadConfig initial;
  std::vector<std::pair<ThreadId, SimpleStmt>> schedule;
  Address racy_addr;
  /// Pending accesses of thread 1 and thread 2 after the schedule.
  SimpleStmt succ1;
  SimpleStmt succ2;
  /// Method run by thread 1 and thread 2.
  MethodName method1;
  MethodName method2;
  /// Shared heap after the schedule.
  Heap final_heap;
};

/// Chain heap for field sequence f1..fn: distinct l0..ln, both roots bound
/// to l1, every other variable to l0, h(l0, f) = l0, h(lj, fj) = l(j+1),
/// remaining fields of each lj point to l0. Both lock counts are zero.
TwoThreadConfig build_initial_state(const Var& root1, const Var& root2,
                                    const std::vector<FieldName>& fs,
                                    const std::set<FieldName>& field_set);

/// Addresses of every nonempty prefix of `path`, shortest first; empty if
/// some intermediate cell is undefined.
std::vector<Address> footprint_domain(const Expr& path, const Frame& s, const Heap& h);
bool is_disconnected(const Expr& path, const Frame& s, const Heap& h);
bool is_acyclic(const Expr& path, const Frame& s, const Heap& h);
/// Root binding, footprint domain and every footprint cell except the last
/// agree between the two states, and the path is disconnected and acyclic
/// in both.
bool is_preserved(const Expr& path, const Frame& s, const Heap& h, const Frame& s2,
                  const Heap& h2);

struct AccessPrefix {
  Trace trace;
  /// States strictly before the access.
  std::vector<ConcreteState> prefix;
  /// Configuration at the end of the prefix.
  Config config;
  /// The access command as written, in the callee frame it executes in.
  SimpleStmt pending;
  Address address;
};

/// Shortest prefix, over all enumerated traces of `body` from `init`, that
/// ends right before a load/store whose path, substituted back to the
/// method's formals, is `target.path` at lock context `target.lock`.
std::optional<AccessPrefix> find_access_prefix(const Program& p, const Block& body,
                                               const Config& init, const AccessRecord& target,
                                               const EnumBounds& bounds);

struct Reconstruction {
  std::shared_ptr<const WitnessTrace> witness;
  std::string failure;

  bool ok() const { return witness != nullptr; }
};

Reconstruction reconstruct(const RaceReport& report, const Program& p,
                           const EnumBounds& bounds = {});

/// Replays the schedule and re-checks the race predicate and final heap.
bool verify_witness(const WitnessTrace& w, const Program& p, const EnumBounds& bounds = {});

}  // namespace stabrace
