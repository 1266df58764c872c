#include <cmath>
#include <random>
#include <sstream>

#include "../oracles.hpp"
#include "doctest.h"
#include "ngs/perception.hpp"

using namespace ngs;

namespace {

FeatureSeq random_features(int len, int dim, std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  std::vector<double> data(static_cast<std::size_t>(len * dim));
  for (double& v : data) v = n(rng);
  return FeatureSeq(dim, std::move(data));
}

double nll(const PerceptionModel& m, const FeatureSeq& x, const SymbolString& z) {
  return -m.forward(x).log_prob(z);
}

// Max over coordinates of |analytic - numeric| / max(|analytic|, |numeric|, 1e-6).
double max_relative_error(PerceptionModel m, const FeatureSeq& x, const SymbolString& z) {
  const Gradient g = m.nll_gradient(x, z);
  const double h = 1e-5;
  double worst = 0.0;
  auto p = m.mutable_params();
  for (std::size_t k = 0; k < p.size(); ++k) {
    const double keep = p[k];
    p[k] = keep + h;
    const double up = nll(m, x, z);
    p[k] = keep - h;
    const double down = nll(m, x, z);
    p[k] = keep;
    const double numeric = (up - down) / (2 * h);
    const double denom = std::max({std::abs(g[k]), std::abs(numeric), 1e-6});
    worst = std::max(worst, std::abs(g[k] - numeric) / denom);
  }
  return worst;
}

}  // namespace

TEST_CASE("parameter counts per architecture") {
  CHECK(ModelShape{Architecture::Linear, 16, 0}.num_params() == 14 * 16 + 14);
  CHECK(ModelShape{Architecture::Mlp, 16, 8}.num_params() == 8 * 16 + 8 + 14 * 8 + 14);
  CHECK(parse_architecture("mlp") == Architecture::Mlp);
  CHECK_THROWS_AS(parse_architecture("cnn"), std::invalid_argument);
}

TEST_CASE("forward yields normalized rows and checks the feature dimension") {
  std::mt19937_64 rng(1);
  const auto m = PerceptionModel::random({Architecture::Mlp, 16, 8}, 3, 0.5);
  const FeatureSeq x = random_features(5, 16, rng);
  const ProbMatrix pm = m.forward(x);
  CHECK(pm.length() == 5);
  for (int i = 0; i < 5; ++i) {
    double s = 0.0;
    for (double p : pm.row(i)) {
      CHECK(p > 0.0);
      s += p;
    }
    CHECK(s == doctest::Approx(1.0).epsilon(1e-12));
  }
  CHECK_THROWS_AS(m.forward(random_features(2, 15, rng)), std::invalid_argument);
}

TEST_CASE("zero model is uniform and huge scores are clamped") {
  std::mt19937_64 rng(2);
  const auto z = PerceptionModel::zeros({Architecture::Linear, 16, 0});
  const ProbMatrix pm = z.forward(random_features(1, 16, rng));
  CHECK(pm(0, Symbol::D4) == doctest::Approx(1.0 / 14));

  auto big = PerceptionModel::zeros({Architecture::Linear, 16, 0});
  big.mutable_params()[0] = 1e6;  // W[0][0]
  std::vector<double> v(16, 0.0);
  v[0] = 1.0;
  const ProbMatrix q = big.forward(FeatureSeq(16, v));
  CHECK(q(0, Symbol::D1) > 0.0);
  CHECK(q(0, Symbol::D1) >= std::exp(-100.0) / 14);
}

TEST_CASE("analytic gradients match central differences on both architectures") {
  std::mt19937_64 rng(9);
  for (int t = 0; t < 10; ++t) {
    const int len = 1 + 2 * (t % 4);
    const ModelShape shape = t % 2 ? ModelShape{Architecture::Mlp, 16, 6} : ModelShape{Architecture::Linear, 16, 0};
    const auto m = PerceptionModel::random(shape, static_cast<std::uint64_t>(t), 0.5);
    const FeatureSeq x = random_features(len, 16, rng);
    const SymbolString z = oracle::random_valid(len, rng);
    CHECK(max_relative_error(m, x, z) <= 1e-4);
  }
}

TEST_CASE("accumulate_nll_gradient scales and adds") {
  std::mt19937_64 rng(4);
  const auto m = PerceptionModel::random({Architecture::Linear, 16, 0}, 1);
  const FeatureSeq x = random_features(3, 16, rng);
  const SymbolString z = parse_symbols("1+2");
  const Gradient g = m.nll_gradient(x, z);
  Gradient acc(g.size(), 1.0);
  m.accumulate_nll_gradient(x, z, -0.5, acc);
  for (std::size_t k = 0; k < g.size(); ++k) CHECK(acc[k] == doctest::Approx(1.0 - 0.5 * g[k]));
}

TEST_CASE("a small update on a label raises its probability") {
  std::mt19937_64 rng(6);
  auto m = PerceptionModel::random({Architecture::Mlp, 16, 8}, 2);
  const FeatureSeq x = random_features(3, 16, rng);
  const SymbolString z = parse_symbols("7*3");
  const double before = m.forward(x).log_prob(z);
  m.apply_update(m.nll_gradient(x, z));
  CHECK(m.forward(x).log_prob(z) > before);
  CHECK(m.optimizer_steps() == 1);
}

TEST_CASE("checkpoints round trip exactly, optimizer state included") {
  std::mt19937_64 rng(8);
  auto m = PerceptionModel::random({Architecture::Mlp, 16, 5}, 4);
  const FeatureSeq x = random_features(5, 16, rng);
  const SymbolString z = parse_symbols("1+2*3");
  for (int k = 0; k < 3; ++k) m.apply_update(m.nll_gradient(x, z));
  std::stringstream ss;
  m.save(ss);
  auto back = PerceptionModel::load(ss);
  CHECK(back == m);
  m.apply_update(m.nll_gradient(x, z));
  back.apply_update(back.nll_gradient(x, z));
  CHECK(back == m);

  std::stringstream bad("not-a-model 1\n");
  CHECK_THROWS(PerceptionModel::load(bad));
}
