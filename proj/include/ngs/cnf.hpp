#pragma once

#include <span>
#include <string>
#include <vector>

#include "ngs/grammar.hpp"

namespace ngs {

/// Where a CNF rule came from, so parse trees can be rebuilt in the shape of
/// the source grammar.
enum class CnfRole {
  Whole,         // the entire right side of `source_rule`
  Head,          // top piece of a binarized long rule
  Tail,          // a fresh continuation nonterminal of a binarized long rule
  TerminalWrap,  // fresh nonterminal standing for a terminal inside a long rule
};

struct CnfRule {
  int lhs = -1;
  bool lexical = false;
  int left = -1;   // binary: B in A -> B C
  int right = -1;  // binary: C in A -> B C
  Symbol terminal = Symbol::D0;  // lexical: a in A -> a

  CnfRole role = CnfRole::Whole;
  int source_rule = -1;          // -1 for TerminalWrap rules
  std::vector<int> unit_chain;   // collapsed source unit rules, outermost first
};

/// Chomsky Normal Form grammar: only A -> B C and A -> a. Nonterminal ids
/// [0, source.num_nonterminals()) coincide with the source grammar; fresh
/// helper nonterminals follow. Helper names are deterministic in rule order.
class CnfGrammar {
 public:
  const Grammar& source() const { return source_; }
  const std::vector<std::string>& nonterminals() const { return nonterminals_; }
  int num_nonterminals() const { return static_cast<int>(nonterminals_.size()); }
  const std::vector<CnfRule>& rules() const { return rules_; }
  int start() const { return source_.start(); }

  /// Binary rule ids in ascending order.
  const std::vector<int>& binary_rules() const { return binary_; }
  /// Lexical rule ids for a terminal, ascending.
  const std::vector<int>& lexical_rules(Symbol s) const { return lexical_[static_cast<std::size_t>(id(s))]; }

 private:
  friend CnfGrammar binarize(const Grammar& g);
  explicit CnfGrammar(Grammar source) : source_(std::move(source)) {}

  Grammar source_;
  std::vector<std::string> nonterminals_;
  std::vector<CnfRule> rules_;
  std::vector<int> binary_;
  std::vector<std::vector<int>> lexical_ = std::vector<std::vector<int>>(kNumSymbols);
};

/// Terminal wrapping, binarization of long rules, then unit-rule collapse with
/// provenance. The source grammar has no empty productions by construction.
CnfGrammar binarize(const Grammar& g);

/// CYK recognition. Throws std::invalid_argument on an empty string.
bool accepts(const CnfGrammar& g, std::span<const Symbol> z);

}  // namespace ngs
