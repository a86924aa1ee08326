#include "stabrace/domain.hpp"

#include <algorithm>
#include <sstream>
#include <stdexcept>

namespace stabrace {

std::string_view to_string(AccessKind k) {
  return k == AccessKind::Read ? "read" : "write";
}

std::string to_string(const AccessRecord& a) {
  return std::string(to_string(a.kind)) + " " + to_string(a.path) + " @" +
         std::to_string(a.lock);
}

LockCap::LockCap(unsigned value) : value_(value) {
  if (value == 0) throw std::invalid_argument("lock cap must be positive");
}

AbstractState join(const AbstractState& a, const AbstractState& b) {
  AbstractState out = a;
  join_into(out, b);
  return out;
}

void join_into(AbstractState& into, const AbstractState& other) {
  into.wobbly.insert(other.wobbly.begin(), other.wobbly.end());
  into.lock = std::max(into.lock, other.lock);
  into.accesses.insert(other.accesses.begin(), other.accesses.end());
}

bool leq(const AbstractState& a, const AbstractState& b) {
  return a.lock <= b.lock &&
         std::includes(b.wobbly.begin(), b.wobbly.end(), a.wobbly.begin(), a.wobbly.end()) &&
         std::includes(b.accesses.begin(), b.accesses.end(), a.accesses.begin(),
                       a.accesses.end());
}

std::string to_string(const AbstractState& d) {
  std::ostringstream os;
  os << "W = {";
  bool first = true;
  for (const Expr& e : d.wobbly) {
    os << (first ? "" : ", ") << to_string(e);
    first = false;
  }
  os << "}\nL = " << d.lock << "\nA = {";
  first = true;
  for (const AccessRecord& a : d.accesses) {
    os << (first ? "" : ", ") << to_string(a);
    first = false;
  }
  os << "}";
  return os.str();
}

std::string describe_diff(const AbstractState& expected, const AbstractState& actual) {
  std::ostringstream os;
  for (const Expr& e : expected.wobbly)
    if (!actual.wobbly.count(e)) os << "  W missing " << to_string(e) << '\n';
  for (const Expr& e : actual.wobbly)
    if (!expected.wobbly.count(e)) os << "  W extra   " << to_string(e) << '\n';
  if (expected.lock != actual.lock)
    os << "  L " << expected.lock << " vs " << actual.lock << '\n';
  for (const AccessRecord& a : expected.accesses)
    if (!actual.accesses.count(a)) os << "  A missing " << to_string(a) << '\n';
  for (const AccessRecord& a : actual.accesses)
    if (!expected.accesses.count(a)) os << "  A extra   " << to_string(a) << '\n';
  return os.str();
}

}  // namespace stabrace
