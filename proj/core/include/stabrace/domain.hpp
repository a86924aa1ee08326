#pragma once

// The analysis domain: wobbly expressions, a capped lock count, and the set
// of recorded accesses with the lock count at which each occurred. Shared
// by the analyzer and by the abstraction of concrete traces.

#include <set>
#include <string>
#include <string_view>

#include "stabrace/ast.hpp"

namespace stabrace {

enum class AccessKind { Read, Write };

std::string_view to_string(AccessKind k);

struct AccessRecord {
  AccessKind kind = AccessKind::Read;
  Expr path;
  unsigned lock = 0;

  auto operator<=>(const AccessRecord&) const = default;
  bool operator==(const AccessRecord&) const = default;
};

std::string to_string(const AccessRecord& a);

/// Saturating lock arithmetic with cap `value` (at least 1).
class LockCap {
public:
  static constexpr unsigned kDefault = 255;

  constexpr LockCap() = default;
  explicit LockCap(unsigned value);

  unsigned value() const { return value_; }
  unsigned add(unsigned l, unsigned r) const {
    const unsigned long long sum = static_cast<unsigned long long>(l) + r;
    return sum < value_ ? static_cast<unsigned>(sum) : value_;
  }
  unsigned incr(unsigned l) const { return add(l, 1); }
  static unsigned decr(unsigned l) { return l == 0 ? 0 : l - 1; }

private:
  unsigned value_ = kDefault;
};

struct AbstractState {
  std::set<Expr> wobbly;
  unsigned lock = 0;
  std::set<AccessRecord> accesses;

  static AbstractState bottom() { return {}; }

  bool operator==(const AbstractState&) const = default;
};

/// Componentwise union / max / union.
AbstractState join(const AbstractState& a, const AbstractState& b);
void join_into(AbstractState& into, const AbstractState& other);
/// Componentwise subset / <= / subset.
bool leq(const AbstractState& a, const AbstractState& b);

/// Human-readable W/L/A rendering, one component per line.
std::string to_string(const AbstractState& d);
/// Lines describing how `expected` and `actual` differ; empty when equal.
std::string describe_diff(const AbstractState& expected, const AbstractState& actual);

}  // namespace stabrace
