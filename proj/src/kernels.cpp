#include "ngs/kernels.hpp"

#include "ngs/reasoning.hpp"

namespace ngs {

Gradient accumulate_gradient(const PerceptionModel& model, std::span<const GradientTerm> terms, Execution exec) {
  const std::size_t dim = model.params().size();
  Gradient total(dim, 0.0);
  if (exec == Execution::Serial) {
    Gradient term_grad(dim);
    for (const GradientTerm& t : terms) {
      std::fill(term_grad.begin(), term_grad.end(), 0.0);
      model.accumulate_nll_gradient(*t.features, t.z, t.weight, term_grad);
      for (std::size_t c = 0; c < dim; ++c) total[c] += term_grad[c];
    }
    return total;
  }
  // Per-term gradients in parallel, then a per-coordinate reduction in term order.
  std::vector<double> per_term(terms.size() * dim, 0.0);
  const auto n = static_cast<long>(terms.size());
#pragma omp parallel for schedule(static)
  for (long t = 0; t < n; ++t) {
    const GradientTerm& term = terms[static_cast<std::size_t>(t)];
    model.accumulate_nll_gradient(*term.features, term.z, term.weight,
                                  std::span<double>(per_term.data() + static_cast<std::size_t>(t) * dim, dim));
  }
  const auto d = static_cast<long>(dim);
#pragma omp parallel for schedule(static)
  for (long c = 0; c < d; ++c) {
    double sum = 0.0;
    for (std::size_t t = 0; t < terms.size(); ++t) sum += per_term[t * dim + static_cast<std::size_t>(c)];
    total[static_cast<std::size_t>(c)] = sum;
  }
  return total;
}

std::vector<Prediction> predict_batch(const PerceptionModel& model, std::span<const Example> examples,
                                      const CnfGrammar& g, Execution exec) {
  return map_indices(examples.size(), exec, [&](std::size_t i) {
    Prediction p;
    const ProbMatrix pm = model.forward(examples[i].features());
    if (auto parse = viterbi_parse(g, pm)) {
      if (auto rt = evaluate(parse->tree); std::holds_alternative<ReasoningTree>(rt)) {
        p.value = std::get<ReasoningTree>(rt).result();
      }
      p.string = std::move(parse->string);
    }
    return p;
  });
}

}  // namespace ngs
