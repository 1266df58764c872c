#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace ngs {

inline constexpr int kNumSymbols = 14;
inline constexpr int kNumDigits = 10;
inline constexpr int kNumOperators = 4;

// Ids 0-9 are the digits, 10-13 the operators + - * / in that order. The
// order is fixed everywhere: probability columns, files, and logs.
enum class Symbol : std::uint8_t {
  D0 = 0, D1, D2, D3, D4, D5, D6, D7, D8, D9,
  Plus = 10, Minus = 11, Times = 12, Divide = 13,
};

enum class SymbolCategory { Digit, Operator };

using SymbolString = std::vector<Symbol>;

constexpr int id(Symbol s) { return static_cast<int>(s); }

constexpr bool is_digit(Symbol s) { return id(s) < kNumDigits; }
constexpr bool is_operator(Symbol s) { return !is_digit(s); }

constexpr SymbolCategory category(Symbol s) {
  return is_digit(s) ? SymbolCategory::Digit : SymbolCategory::Operator;
}

constexpr Symbol digit_symbol(int d) { return static_cast<Symbol>(d); }
constexpr int digit_value(Symbol s) { return id(s); }

inline constexpr std::array<Symbol, kNumOperators> kOperators = {
    Symbol::Plus, Symbol::Minus, Symbol::Times, Symbol::Divide};

/// Throws std::out_of_range for ids outside [0, 13].
Symbol symbol_from_id(int id);

/// ASCII glyph: '0'..'9', '+', '-', '*', '/'.
char glyph(Symbol s);

/// Accepts the ASCII glyphs plus the typographic forms "−", "×", "÷".
std::optional<Symbol> symbol_from_glyph(std::string_view token);

std::string to_string(std::span<const Symbol> z);

/// Parses a formula such as "2+3*4" or "2+3×4"; whitespace is ignored.
/// Throws std::invalid_argument on an unknown glyph.
SymbolString parse_symbols(std::string_view text);

int hamming_distance(std::span<const Symbol> a, std::span<const Symbol> b);

}  // namespace ngs
