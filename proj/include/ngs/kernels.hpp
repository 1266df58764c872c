#pragma once

#include <optional>
#include <span>
#include <vector>

#include "ngs/dataset.hpp"
#include "ngs/execution.hpp"
#include "ngs/perception.hpp"
#include "ngs/value.hpp"

namespace ngs {

/// Applies fn(i) for i in [0, n) and collects the results in index order.
/// Parallel runs the calls under OpenMP; fn must only touch item-local state.
template <class Fn>
auto map_indices(std::size_t n, Execution exec, Fn&& fn) -> std::vector<decltype(fn(std::size_t{0}))> {
  using Result = decltype(fn(std::size_t{0}));
  std::vector<std::optional<Result>> slots(n);
  if (exec == Execution::Serial) {
    for (std::size_t i = 0; i < n; ++i) slots[i].emplace(fn(i));
  } else {
    const auto count = static_cast<long>(n);
#pragma omp parallel for schedule(dynamic, 4)
    for (long i = 0; i < count; ++i) slots[static_cast<std::size_t>(i)].emplace(fn(static_cast<std::size_t>(i)));
  }
  std::vector<Result> out;
  out.reserve(n);
  for (auto& s : slots) out.push_back(std::move(*s));
  return out;
}

/// weight * grad(-log p(z | x)).
struct GradientTerm {
  const FeatureSeq* features = nullptr;
  SymbolString z;
  double weight = 0.0;
};

/// Sum of all terms. Each term is formed on its own and then added in term
/// order, so Serial and Parallel agree bit for bit.
Gradient accumulate_gradient(const PerceptionModel& model, std::span<const GradientTerm> terms, Execution exec);

/// The grammar-constrained prediction for one example and what it executes to.
struct Prediction {
  std::optional<SymbolString> string;
  std::optional<Value> value;
};

std::vector<Prediction> predict_batch(const PerceptionModel& model, std::span<const Example> examples,
                                      const CnfGrammar& g, Execution exec);

}  // namespace ngs
