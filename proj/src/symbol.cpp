#include "ngs/symbol.hpp"

#include <stdexcept>

namespace ngs {

Symbol symbol_from_id(int value) {
  if (value < 0 || value >= kNumSymbols) {
    throw std::out_of_range("symbol id out of range: " + std::to_string(value));
  }
  return static_cast<Symbol>(value);
}

char glyph(Symbol s) {
  static constexpr std::array<char, kNumSymbols> kGlyphs = {
      '0', '1', '2', '3', '4', '5', '6', '7', '8', '9', '+', '-', '*', '/'};
  return kGlyphs[static_cast<std::size_t>(id(s))];
}

std::optional<Symbol> symbol_from_glyph(std::string_view token) {
  if (token.size() == 1) {
    const char c = token[0];
    if (c >= '0' && c <= '9') return digit_symbol(c - '0');
    switch (c) {
      case '+': return Symbol::Plus;
      case '-': return Symbol::Minus;
      case '*': return Symbol::Times;
      case '/': return Symbol::Divide;
      default: return std::nullopt;
    }
  }
  if (token == "−") return Symbol::Minus;
  if (token == "×") return Symbol::Times;
  if (token == "÷") return Symbol::Divide;
  return std::nullopt;
}

std::string to_string(std::span<const Symbol> z) {
  std::string out;
  out.reserve(z.size());
  for (Symbol s : z) out.push_back(glyph(s));
  return out;
}

SymbolString parse_symbols(std::string_view text) {
  SymbolString out;
  std::size_t i = 0;
  while (i < text.size()) {
    const auto c = static_cast<unsigned char>(text[i]);
    if (c == ' ' || c == '\t') {
      ++i;
      continue;
    }
    // UTF-8 lead byte decides how many bytes the glyph spans.
    std::size_t width = 1;
    if (c >= 0xF0) width = 4;
    else if (c >= 0xE0) width = 3;
    else if (c >= 0xC0) width = 2;
    const auto token = text.substr(i, width);
    const auto sym = symbol_from_glyph(token);
    if (!sym) throw std::invalid_argument("unknown glyph '" + std::string(token) + "'");
    out.push_back(*sym);
    i += width;
  }
  return out;
}

int hamming_distance(std::span<const Symbol> a, std::span<const Symbol> b) {
  if (a.size() != b.size()) throw std::invalid_argument("hamming_distance: length mismatch");
  int d = 0;
  for (std::size_t i = 0; i < a.size(); ++i) d += a[i] != b[i] ? 1 : 0;
  return d;
}

}  // namespace ngs
