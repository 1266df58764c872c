#include <limits>
#include <random>
#include <set>

#include "doctest.h"
#include "ngs/symbol.hpp"
#include "ngs/value.hpp"

using namespace ngs;

TEST_CASE("glyphs round trip for every symbol") {
  std::set<char> seen;
  for (int i = 0; i < kNumSymbols; ++i) {
    const Symbol s = symbol_from_id(i);
    CHECK(id(s) == i);
    CHECK(symbol_from_glyph(std::string(1, glyph(s))) == s);
    seen.insert(glyph(s));
  }
  CHECK(seen.size() == kNumSymbols);
  CHECK_THROWS_AS(symbol_from_id(14), std::out_of_range);
  CHECK_THROWS_AS(symbol_from_id(-1), std::out_of_range);
}

TEST_CASE("categories split ten digits from four operators") {
  int digits = 0;
  for (int i = 0; i < kNumSymbols; ++i) digits += is_digit(symbol_from_id(i));
  CHECK(digits == kNumDigits);
  for (Symbol op : kOperators) CHECK(category(op) == SymbolCategory::Operator);
  CHECK(digit_value(digit_symbol(7)) == 7);
}

TEST_CASE("parse_symbols accepts ascii and unicode operators") {
  CHECK(parse_symbols("2+3*4") == SymbolString{Symbol::D2, Symbol::Plus, Symbol::D3, Symbol::Times, Symbol::D4});
  CHECK(parse_symbols("8 ÷ 2 − 1 × 3") == parse_symbols("8/2-1*3"));
  CHECK(to_string(parse_symbols("9/3")) == "9/3");
  CHECK_THROWS_AS(parse_symbols("2^3"), std::invalid_argument);
  CHECK(hamming_distance(parse_symbols("1+2"), parse_symbols("1*3")) == 2);
}

TEST_CASE("values stay reduced with a positive denominator") {
  const Value v = Value::fraction(6, -4);
  CHECK(v.num() == -3);
  CHECK(v.den() == 2);
  CHECK(v.to_string() == "-3/2");
  CHECK(Value::parse("-3/2") == v);
  CHECK(Value::parse("12") == Value(12));
  CHECK_THROWS_AS(Value::fraction(1, 0), std::domain_error);
  CHECK_THROWS(Value::parse("1/0"));
  CHECK_THROWS(Value::parse("abc"));
}

TEST_CASE("rational arithmetic agrees with long double on random operands") {
  std::mt19937_64 rng(7);
  std::uniform_int_distribution<int> num(-50, 50), den(1, 12);
  for (int t = 0; t < 2000; ++t) {
    const Value a = Value::fraction(num(rng), den(rng));
    const Value b = Value::fraction(num(rng), den(rng));
    const long double x = static_cast<long double>(a.num()) / a.den();
    const long double y = static_cast<long double>(b.num()) / b.den();
    CHECK(std::abs((a + b).to_double() - static_cast<double>(x + y)) < 1e-12);
    CHECK(std::abs((a - b).to_double() - static_cast<double>(x - y)) < 1e-12);
    CHECK(std::abs((a * b).to_double() - static_cast<double>(x * y)) < 1e-12);
    const auto q = checked_divide(a, b);
    CHECK(q.has_value() == !b.is_zero());
    if (q) CHECK(*q * b == a);
    CHECK(((a < b) == (x < y)));
  }
}

TEST_CASE("apply_operator follows the symbol and reports division by zero") {
  CHECK(apply_operator(Symbol::Plus, 2, 3) == Value(5));
  CHECK(apply_operator(Symbol::Minus, 2, 3) == Value(-1));
  CHECK(apply_operator(Symbol::Times, 2, 3) == Value(6));
  CHECK(apply_operator(Symbol::Divide, 2, 3) == Value::fraction(2, 3));
  CHECK_FALSE(apply_operator(Symbol::Divide, 2, 0).has_value());
  CHECK_THROWS_AS(apply_operator(Symbol::D1, 2, 3), std::invalid_argument);
}

TEST_CASE("overflow is detected instead of wrapping") {
  const Value big(std::numeric_limits<std::int64_t>::max());
  CHECK_THROWS_AS(big + Value(1), std::overflow_error);
  CHECK_THROWS_AS(big * Value(2), std::overflow_error);
}
