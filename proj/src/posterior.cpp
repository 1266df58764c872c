#include "ngs/posterior.hpp"

#include <cmath>

#include "ngs/grammar.hpp"
#include "ngs/reasoning.hpp"

namespace ngs {

namespace {

struct Enumerated {
  std::vector<double> prior;  // p(z|x) renormalized over L(G)
  std::vector<bool> in_q;
  std::vector<SymbolString> strings;
};

Enumerated enumerate(const CnfGrammar& g, const ProbMatrix& pm, const Value& y) {
  Enumerated e;
  e.strings = enumerate_language(g.source(), pm.length());
  e.prior.reserve(e.strings.size());
  double total = 0.0;
  for (const SymbolString& z : e.strings) {
    const double p = std::exp(pm.log_prob(z));
    e.prior.push_back(p);
    total += p;
    const auto v = execute(g, z);
    e.in_q.push_back(v && *v == y);
  }
  for (double& p : e.prior) p /= total;
  return e;
}

}  // namespace

Posterior exact_posterior(const CnfGrammar& g, const ProbMatrix& pm, const Value& y) {
  const Enumerated e = enumerate(g, pm, y);
  Posterior post;
  for (std::size_t k = 0; k < e.strings.size(); ++k) {
    if (!e.in_q[k]) continue;
    post.support.push_back(e.strings[k]);
    post.probs.push_back(e.prior[k]);
    post.mass += e.prior[k];
  }
  if (post.support.empty()) throw EmptySupport();
  for (double& p : post.probs) p /= post.mass;
  return post;
}

KlResult kl_smoothed(const CnfGrammar& g, const ProbMatrix& pm, const Value& y, double epsilon) {
  if (!(epsilon > 0.0)) throw std::invalid_argument("epsilon must be > 0");
  const Enumerated e = enumerate(g, pm, y);
  double c = 0.0;
  for (std::size_t k = 0; k < e.strings.size(); ++k) {
    if (e.in_q[k]) c += e.prior[k];
  }
  if (c <= 0.0) throw EmptySupport();
  // KL(p || p') with p(z) = p(z|x) 1[z in Q] / C and
  // p'(z) = p(z|x) (1[z in Q] + eps) / (C + eps). Strings outside Q carry no
  // mass under p and contribute nothing.
  double kl = 0.0;
  for (std::size_t k = 0; k < e.strings.size(); ++k) {
    if (!e.in_q[k] || e.prior[k] == 0.0) continue;
    const double exact = e.prior[k] / c;
    const double smoothed = e.prior[k] * (1.0 + epsilon) / (c + epsilon);
    kl += exact * std::log(exact / smoothed);
  }
  KlResult r;
  r.kl = kl;
  r.closed_form = std::log1p(epsilon / c) - std::log1p(epsilon);
  return r;
}

}  // namespace ngs
