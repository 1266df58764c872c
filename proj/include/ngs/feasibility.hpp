#pragma once

#include <array>
#include <bitset>
#include <map>
#include <memory>
#include <mutex>
#include <random>

#include "ngs/grammar.hpp"
#include "ngs/parsing.hpp"

namespace ngs {

using SymbolMask = std::bitset<kNumSymbols>;

/// Minimal deterministic automaton over the strings of L(G) with one fixed
/// length. A symbol is admissible after a prefix iff some completion of
/// prefix + symbol lies in L(G).
class FeasibilityAutomaton {
 public:
  static constexpr int kDead = -1;

  /// Throws std::invalid_argument for lengths outside [1, kMaxEnumerationLength].
  static FeasibilityAutomaton build(const Grammar& g, int length);

  int length() const { return length_; }
  int initial() const { return initial_; }
  int num_states() const { return static_cast<int>(next_.size()); }
  bool empty() const { return initial_ == kDead; }

  /// kDead when the symbol is not admissible in that state.
  int next(int state, Symbol s) const { return next_[static_cast<std::size_t>(state)][static_cast<std::size_t>(id(s))]; }
  SymbolMask admissible(int state) const { return masks_[static_cast<std::size_t>(state)]; }
  /// Admissible set after a given prefix (empty mask if the prefix is dead).
  SymbolMask admissible_after(std::span<const Symbol> prefix) const;

 private:
  int length_ = 0;
  int initial_ = kDead;
  std::vector<std::array<int, kNumSymbols>> next_;
  std::vector<SymbolMask> masks_;
};

/// Lazily builds and caches one automaton per length; safe for concurrent use.
class FeasibilityCache {
 public:
  explicit FeasibilityCache(Grammar g) : grammar_(std::move(g)) {}
  const FeasibilityAutomaton& get(int length) const;

 private:
  Grammar grammar_;
  mutable std::mutex mutex_;
  mutable std::map<int, std::unique_ptr<FeasibilityAutomaton>> cache_;
};

/// Samples left to right, renormalizing each row over the admissible set.
/// The result always lies in L(G). Throws std::invalid_argument when the
/// automaton's language is empty or its length differs from pm's.
SymbolString constrained_sample(const FeasibilityAutomaton& fa, const ProbMatrix& pm, std::mt19937_64& rng);

}  // namespace ngs
