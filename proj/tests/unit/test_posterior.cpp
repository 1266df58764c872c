#include <cmath>
#include <random>

#include "../oracles.hpp"
#include "doctest.h"
#include "ngs/perception.hpp"
#include "ngs/posterior.hpp"
#include "ngs/reasoning.hpp"

using namespace ngs;

namespace {

const CnfGrammar& arithmetic() {
  static const CnfGrammar cnf = binarize(load_arithmetic_grammar());
  return cnf;
}

}  // namespace

TEST_CASE("posterior of a single digit is a point mass") {
  const Posterior p = exact_posterior(arithmetic(), ProbMatrix::uniform(1), Value(7));
  REQUIRE(p.support.size() == 1);
  CHECK(to_string(p.support[0]) == "7");
  CHECK(p.probs[0] == doctest::Approx(1.0));
  CHECK(p.mass == doctest::Approx(0.1));
}

TEST_CASE("uniform posterior over every formula reaching the answer") {
  const Posterior p = exact_posterior(arithmetic(), ProbMatrix::uniform(3), Value(3));
  std::size_t want = 0;
  for (const auto& z : oracle::all_valid(3)) want += oracle::shunting_yard(z) == Value(3);
  CHECK(p.support.size() == want);
  for (double q : p.probs) CHECK(q == doctest::Approx(1.0 / static_cast<double>(want)));
  CHECK(p.mass == doctest::Approx(static_cast<double>(want) / 400));
  CHECK_THROWS_AS(exact_posterior(arithmetic(), ProbMatrix::uniform(3), Value(1000)), EmptySupport);
}

TEST_CASE("posterior weights follow the model") {
  std::mt19937_64 rng(5);
  const ProbMatrix pm = oracle::random_pm(3, rng);
  const Posterior p = exact_posterior(arithmetic(), pm, Value(6));
  double norm = 0.0;
  for (const auto& z : p.support) norm += std::exp(oracle::log_prob(pm, z));
  for (std::size_t k = 0; k < p.support.size(); ++k) {
    CHECK(oracle::shunting_yard(p.support[k]) == Value(6));
    CHECK(p.probs[k] == doctest::Approx(std::exp(oracle::log_prob(pm, p.support[k])) / norm));
  }
}

TEST_CASE("smoothed-posterior KL matches its closed form") {
  std::mt19937_64 rng(31);
  for (int t = 0; t < 20; ++t) {
    const ProbMatrix pm = oracle::random_pm(3, rng);
    const SymbolString z = oracle::random_valid(3, rng);
    const auto y = oracle::shunting_yard(z);
    if (!y) continue;
    for (double eps : {1e-3, 1e-4, 1e-5}) {
      const KlResult r = kl_smoothed(arithmetic(), pm, *y, eps);
      CHECK(std::abs(r.kl - r.closed_form) <= 1e-9);
      CHECK(r.kl >= 0.0);
    }
  }
}

TEST_CASE("KL vanishes when the support holds all the mass") {
  const ProbMatrix pm = ProbMatrix::one_hot(parse_symbols("2*4"));
  for (double eps : {1e-1, 1e-3}) {
    const KlResult r = kl_smoothed(arithmetic(), pm, Value(8), eps);
    CHECK(std::abs(r.kl) < 1e-15);
    CHECK(std::abs(r.closed_form) < 1e-15);
  }
  CHECK_THROWS_AS(kl_smoothed(arithmetic(), pm, Value(8), 0.0), std::invalid_argument);
  CHECK_THROWS_AS(kl_smoothed(arithmetic(), pm, Value(9), 1e-3), EmptySupport);
}

TEST_CASE("averaged posterior-sample gradients approach the exact expectation") {
  std::mt19937_64 rng(77);
  const auto model = PerceptionModel::random({Architecture::Linear, 16, 0}, 5, 0.5);
  std::normal_distribution<double> n(0.0, 1.0);
  std::vector<double> data(3 * 16);
  for (double& v : data) v = n(rng);
  const FeatureSeq x(16, data);
  const Posterior post = exact_posterior(arithmetic(), model.forward(x), Value(4));

  const std::size_t dim = model.params().size();
  Gradient exact(dim, 0.0);
  for (std::size_t k = 0; k < post.support.size(); ++k) model.accumulate_nll_gradient(x, post.support[k], post.probs[k], exact);

  std::vector<Gradient> per_string;
  for (const auto& z : post.support) per_string.push_back(model.nll_gradient(x, z));
  std::discrete_distribution<std::size_t> draw(post.probs.begin(), post.probs.end());
  const int samples = 10000;
  std::vector<double> sum(dim, 0.0), sq(dim, 0.0);
  for (int s = 0; s < samples; ++s) {
    const Gradient& g = per_string[draw(rng)];
    for (std::size_t c = 0; c < dim; ++c) {
      sum[c] += g[c];
      sq[c] += g[c] * g[c];
    }
  }
  int outside = 0;
  for (std::size_t c = 0; c < dim; ++c) {
    const double mean = sum[c] / samples;
    const double var = std::max(0.0, sq[c] / samples - mean * mean);
    const double se = std::sqrt(var / samples);
    outside += std::abs(mean - exact[c]) > 4 * se + 1e-12;
  }
  CHECK(outside == 0);
}
