#pragma once

#include <iosfwd>
#include <optional>
#include <span>
#include <variant>
#include <vector>

#include "ngs/parsing.hpp"
#include "ngs/reasoning.hpp"
#include "ngs/rng.hpp"

namespace ngs {

struct MbsConfig {
  int steps = 10;       // T
  double lambda = 0.5;  // probability of proposing a 1-step back-search
  double beta = 1.0;    // Poisson mean of the random-walk distance

  /// Throws std::invalid_argument unless 0 <= lambda <= 1, steps >= 1, beta > 0.
  void validate() const;
};

/// Expected value of a node: a rational for value-carrying nodes, a symbol
/// for a leaf substitution, or unconstrained (monostate) for a subtree whose
/// value cannot be solved for but whose operators may still be swapped.
using Expected = std::variant<std::monostate, Value, Symbol>;

struct Correction {
  int node = -1;
  Expected expected;
  double priority = 0.0;
};

/// Visiting priority of changing `node` to `expected`:
///   (1 - p(A)) / p(A) for an internal node, p(A) the product of its leaf probabilities;
///   p(alpha) / p(A) for a leaf, alpha a Symbol (or a Value naming a digit).
/// Throws std::invalid_argument for a leaf target outside the alphabet.
double priority(const ReasoningTree& rt, int node, const Expected& expected, const ProbMatrix& pm);

/// Expected values for `child` given its parent's expected value.
/// Value-carrying children solve the parent's equation exactly; digit leaves
/// survive only as integers in [0, 9] different from the current digit;
/// operator leaves keep every other operator under which the whole modified
/// formula executes to `y`. Infeasible targets are dropped, never thrown.
std::vector<Correction> solve(const ReasoningTree& rt, int child, const Expected& parent_expected,
                              const Value& y, const ProbMatrix& pm, const CnfGrammar& g);

/// Best-first search down the reasoning tree for the most probable single
/// symbol substitution that makes the formula execute to y. Equal priorities
/// pop in insertion order. Throws std::invalid_argument if rt already
/// evaluates to y.
std::optional<SymbolString> one_step_backsearch(const ReasoningTree& rt, const Value& y,
                                                const ProbMatrix& pm, const CnfGrammar& g);

/// Draws d ~ Poisson(beta) truncated to [1, l] and substitutes d distinct
/// uniformly chosen positions, each by a different symbol of the same category.
SymbolString random_walk_proposal(std::span<const Symbol> z, double beta, Rng& rng);

/// g(to | from) for the proposal above; 0 if unreachable in one move.
double proposal_probability(std::span<const Symbol> from, std::span<const Symbol> to, double beta);

/// Proposal followed by Metropolis acceptance with ratio p(z*|x) / p(z|x).
SymbolString random_walk_step(std::span<const Symbol> z, const ProbMatrix& pm, double beta, Rng& rng,
                              bool* accepted = nullptr);

/// Metropolis-Hastings chain mixing 1-step back-search (probability lambda)
/// and random walks. A 1-BS step on a state that already executes to y keeps
/// it; a 1-BS step that finds nothing falls back to a random walk. Returns the
/// state after cfg.steps steps. With `trace`, writes one CSV line per step:
/// `step,proposal_kind,z,accepted,in_Q`.
SymbolString multi_step_backsearch(std::span<const Symbol> z0, const Value& y, const ProbMatrix& pm,
                                   const MbsConfig& cfg, const CnfGrammar& g, Rng& rng,
                                   std::ostream* trace = nullptr);

}  // namespace ngs
