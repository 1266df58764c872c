#include "ngs/feasibility.hpp"

#include <stdexcept>

namespace ngs {
namespace {

struct Builder {
  const std::vector<SymbolString>& strings;
  std::map<std::array<int, kNumSymbols>, int> interned;
  std::vector<std::array<int, kNumSymbols>> states;

  // State for the suffix sets of strings[lo, hi) sharing a prefix of `depth`.
  int build(std::size_t lo, std::size_t hi, std::size_t depth) {
    std::array<int, kNumSymbols> next;
    next.fill(FeasibilityAutomaton::kDead);
    if (depth < strings[lo].size()) {
      std::size_t i = lo;
      while (i < hi) {
        const Symbol s = strings[i][depth];
        std::size_t j = i;
        while (j < hi && strings[j][depth] == s) ++j;
        next[static_cast<std::size_t>(id(s))] = build(i, j, depth + 1);
        i = j;
      }
    }
    const auto [it, inserted] = interned.try_emplace(next, static_cast<int>(states.size()));
    if (inserted) states.push_back(next);
    return it->second;
  }
};

}  // namespace

FeasibilityAutomaton FeasibilityAutomaton::build(const Grammar& g, int length) {
  const std::vector<SymbolString> strings = enumerate_language(g, length);
  FeasibilityAutomaton fa;
  fa.length_ = length;
  if (strings.empty()) return fa;
  Builder b{strings, {}, {}};
  fa.initial_ = b.build(0, strings.size(), 0);
  fa.next_ = std::move(b.states);
  fa.masks_.resize(fa.next_.size());
  for (std::size_t st = 0; st < fa.next_.size(); ++st) {
    for (int s = 0; s < kNumSymbols; ++s) fa.masks_[st][static_cast<std::size_t>(s)] = fa.next_[st][static_cast<std::size_t>(s)] != kDead;
  }
  return fa;
}

SymbolMask FeasibilityAutomaton::admissible_after(std::span<const Symbol> prefix) const {
  int state = initial_;
  for (Symbol s : prefix) {
    if (state == kDead) return {};
    state = next(state, s);
  }
  return state == kDead ? SymbolMask{} : admissible(state);
}

const FeasibilityAutomaton& FeasibilityCache::get(int length) const {
  std::lock_guard lock(mutex_);
  auto& slot = cache_[length];
  if (!slot) slot = std::make_unique<FeasibilityAutomaton>(FeasibilityAutomaton::build(grammar_, length));
  return *slot;
}

SymbolString constrained_sample(const FeasibilityAutomaton& fa, const ProbMatrix& pm, std::mt19937_64& rng) {
  if (fa.empty()) throw std::invalid_argument("constrained_sample: no valid string of this length");
  if (fa.length() != pm.length()) throw std::invalid_argument("constrained_sample: length mismatch");
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  SymbolString z;
  z.reserve(static_cast<std::size_t>(pm.length()));
  int state = fa.initial();
  for (int i = 0; i < pm.length(); ++i) {
    const SymbolMask mask = fa.admissible(state);
    double total = 0.0;
    for (int s = 0; s < kNumSymbols; ++s) {
      if (mask[static_cast<std::size_t>(s)]) total += pm.row(i)[static_cast<std::size_t>(s)];
    }
    int chosen = -1;
    if (total > 0.0) {
      double u = unit(rng) * total;
      for (int s = 0; s < kNumSymbols; ++s) {
        const double p = pm.row(i)[static_cast<std::size_t>(s)];
        if (!mask[static_cast<std::size_t>(s)] || p <= 0.0) continue;
        chosen = s;
        u -= p;
        if (u < 0.0) break;
      }
    } else {
      // All admissible mass is zero: fall back to a uniform admissible choice.
      std::vector<int> options;
      for (int s = 0; s < kNumSymbols; ++s) {
        if (mask[static_cast<std::size_t>(s)]) options.push_back(s);
      }
      chosen = options[std::uniform_int_distribution<std::size_t>(0, options.size() - 1)(rng)];
    }
    const Symbol sym = static_cast<Symbol>(chosen);
    z.push_back(sym);
    state = fa.next(state, sym);
  }
  return z;
}

}  // namespace ngs
