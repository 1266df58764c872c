#include "ngs/value.hpp"

#include <charconv>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace ngs {
namespace {

using Wide = __int128;

Value from_wide(Wide num, Wide den) {
  if (den < 0) {
    num = -num;
    den = -den;
  }
  Wide a = num < 0 ? -num : num;
  Wide b = den;
  while (b != 0) {
    const Wide t = a % b;
    a = b;
    b = t;
  }
  const Wide g = a == 0 ? 1 : a;
  num /= g;
  den /= g;
  constexpr Wide kMax = std::numeric_limits<std::int64_t>::max();
  if (num > kMax || num < -kMax || den > kMax) throw std::overflow_error("rational overflow");
  return Value::fraction(static_cast<std::int64_t>(num), static_cast<std::int64_t>(den));
}

std::int64_t parse_int(std::string_view text) {
  std::int64_t out = 0;
  const auto* first = text.data();
  const auto* last = text.data() + text.size();
  if (first != last && *first == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, last, out);
  if (ec != std::errc{} || ptr != last || first == last) {
    throw std::invalid_argument("bad rational component '" + std::string(text) + "'");
  }
  return out;
}

}  // namespace

Value Value::fraction(std::int64_t num, std::int64_t den) {
  if (den == 0) throw std::domain_error("zero denominator");
  if (den < 0) {
    num = -num;
    den = -den;
  }
  const std::int64_t g = std::gcd(num, den);
  Value v;
  v.num_ = num / g;
  v.den_ = den / g;
  return v;
}

Value Value::parse(std::string_view text) {
  const auto slash = text.find('/');
  if (slash == std::string_view::npos) return Value(parse_int(text));
  return fraction(parse_int(text.substr(0, slash)), parse_int(text.substr(slash + 1)));
}

std::string Value::to_string() const {
  if (den_ == 1) return std::to_string(num_);
  return std::to_string(num_) + "/" + std::to_string(den_);
}

Value operator+(const Value& a, const Value& b) {
  return from_wide(Wide(a.num_) * b.den_ + Wide(b.num_) * a.den_, Wide(a.den_) * b.den_);
}

Value operator-(const Value& a, const Value& b) {
  return from_wide(Wide(a.num_) * b.den_ - Wide(b.num_) * a.den_, Wide(a.den_) * b.den_);
}

Value operator*(const Value& a, const Value& b) {
  return from_wide(Wide(a.num_) * b.num_, Wide(a.den_) * b.den_);
}

Value Value::operator-() const { return fraction(-num_, den_); }

std::strong_ordering operator<=>(const Value& a, const Value& b) {
  return Wide(a.num_) * b.den_ <=> Wide(b.num_) * a.den_;
}

std::optional<Value> checked_divide(const Value& a, const Value& b) {
  if (b.is_zero()) return std::nullopt;
  return from_wide(Wide(a.num()) * b.den(), Wide(a.den()) * b.num());
}

std::optional<Value> apply_operator(Symbol op, const Value& lhs, const Value& rhs) {
  switch (op) {
    case Symbol::Plus: return lhs + rhs;
    case Symbol::Minus: return lhs - rhs;
    case Symbol::Times: return lhs * rhs;
    case Symbol::Divide: return checked_divide(lhs, rhs);
    default: throw std::invalid_argument("apply_operator: not an operator");
  }
}

std::ostream& operator<<(std::ostream& os, const Value& v) { return os << v.to_string(); }

}  // namespace ngs
