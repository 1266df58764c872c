#pragma once

#include <compare>
#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>

#include "ngs/symbol.hpp"

namespace ngs {

/// Exact rational number kept in lowest terms with a positive denominator.
/// Arithmetic throws std::overflow_error if a result leaves the int64 range.
class Value {
 public:
  constexpr Value() = default;
  constexpr Value(std::int64_t integer) : num_(integer) {}  // NOLINT(implicit)

  /// Throws std::domain_error when den == 0.
  static Value fraction(std::int64_t num, std::int64_t den);

  /// Parses "n" or "n/d".
  static Value parse(std::string_view text);

  std::int64_t num() const { return num_; }
  std::int64_t den() const { return den_; }
  bool is_integer() const { return den_ == 1; }
  bool is_zero() const { return num_ == 0; }

  /// Rendered as "num/den", or "num" when den == 1.
  std::string to_string() const;
  double to_double() const { return static_cast<double>(num_) / static_cast<double>(den_); }

  friend Value operator+(const Value& a, const Value& b);
  friend Value operator-(const Value& a, const Value& b);
  friend Value operator*(const Value& a, const Value& b);
  Value operator-() const;

  friend bool operator==(const Value& a, const Value& b) = default;
  friend std::strong_ordering operator<=>(const Value& a, const Value& b);

 private:
  std::int64_t num_ = 0;
  std::int64_t den_ = 1;
};

/// nullopt signals division by zero.
std::optional<Value> checked_divide(const Value& a, const Value& b);

/// Applies an operator symbol; nullopt signals division by zero.
/// Throws std::invalid_argument if `op` is a digit.
std::optional<Value> apply_operator(Symbol op, const Value& lhs, const Value& rhs);

std::ostream& operator<<(std::ostream& os, const Value& v);

}  // namespace ngs
