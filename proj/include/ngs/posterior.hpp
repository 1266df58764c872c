#pragma once

#include <stdexcept>
#include <vector>

#include "ngs/cnf.hpp"
#include "ngs/parsing.hpp"
#include "ngs/value.hpp"

namespace ngs {

/// The answer cannot be produced by any formula of the given length.
class EmptySupport : public std::runtime_error {
 public:
  EmptySupport() : std::runtime_error("no formula of this length executes to the answer") {}
};

/// p(z | x, y) over the strings of L(G) with pm's length, by enumeration.
struct Posterior {
  std::vector<SymbolString> support;  // strings executing to y, in enumeration order
  std::vector<double> probs;          // normalized over support
  /// Mass of the support under the model, with the model restricted to L(G):
  /// C = sum over Q of p(z|x) / sum over L(G) of p(z|x).
  double mass = 0.0;
};

/// Throws EmptySupport when no string executes to y, std::invalid_argument
/// when the length is too long to enumerate.
Posterior exact_posterior(const CnfGrammar& g, const ProbMatrix& pm, const Value& y);

struct KlResult {
  double kl = 0.0;           // by direct enumeration of both distributions
  double closed_form = 0.0;  // log(1 + eps / C) - log(1 + eps)
};

/// KL(p || p') where p is the exact posterior and p' smooths the likelihood
/// indicator to 1[f(z) = y] + eps over all of L(G). Throws as exact_posterior,
/// and std::invalid_argument unless eps > 0.
KlResult kl_smoothed(const CnfGrammar& g, const ProbMatrix& pm, const Value& y, double epsilon);

}  // namespace ngs
