#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "ngs/symbol.hpp"

namespace ngs {

/// One element of a production's right side: a nonterminal id or a terminal.
struct GrammarItem {
  enum class Kind { Nonterminal, Terminal };
  Kind kind;
  int nonterminal = -1;
  Symbol terminal = Symbol::D0;

  static GrammarItem nt(int index) { return {Kind::Nonterminal, index, Symbol::D0}; }
  static GrammarItem term(Symbol s) { return {Kind::Terminal, -1, s}; }
  bool is_terminal() const { return kind == Kind::Terminal; }
  friend bool operator==(const GrammarItem&, const GrammarItem&) = default;
};

struct Rule {
  int lhs;
  std::vector<GrammarItem> rhs;

  bool is_unit() const { return rhs.size() == 1 && !rhs[0].is_terminal(); }
};

/// A context-free grammar over the 14-symbol alphabet. Immutable once built.
class Grammar {
 public:
  /// Validates every rule against the nonterminal table. Throws
  /// std::invalid_argument on an unknown id, an empty production, or a bad start.
  Grammar(std::vector<std::string> nonterminals, std::vector<Rule> rules, int start);

  /// Parses the plain-text rule list: one `LHS -> RHS1 RHS2 ...` production per
  /// line, `#` starts a comment. Tokens that are symbol glyphs are terminals;
  /// every other token names a nonterminal. The first LHS is the start symbol.
  static Grammar from_text(std::string_view text);

  std::string to_text() const;

  const std::vector<std::string>& nonterminals() const { return nonterminals_; }
  const std::vector<Rule>& rules() const { return rules_; }
  int start() const { return start_; }
  int num_nonterminals() const { return static_cast<int>(nonterminals_.size()); }

  /// Throws std::out_of_range if the name is unknown.
  int nonterminal_id(std::string_view name) const;
  std::string rule_to_string(int rule) const;

 private:
  std::vector<std::string> nonterminals_;
  std::vector<Rule> rules_;
  int start_;
};

/// The built-in arithmetic grammar in text form.
extern const std::string_view kArithmeticGrammarText;

/// S -> Expression; Expression -> Term | Expression + Term | Expression - Term;
/// Term -> Factor | Term * Factor | Term / Factor; Factor -> 0 | ... | 9.
Grammar load_arithmetic_grammar();

inline constexpr int kMaxEnumerationLength = 7;

/// Every string of exactly `length` symbols derivable from `g`, in
/// lexicographic id order. Works from the source rules directly, so it serves
/// as an oracle for the CNF transform. Throws std::invalid_argument when
/// length is outside [1, kMaxEnumerationLength].
std::vector<SymbolString> enumerate_language(const Grammar& g, int length);

}  // namespace ngs
