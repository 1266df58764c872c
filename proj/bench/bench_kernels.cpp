// Serial reference vs OpenMP kernels on a desk-scale batch.

#include <benchmark/benchmark.h>

#include "ngs/backsearch.hpp"
#include "ngs/cnf.hpp"
#include "ngs/grammar.hpp"
#include "ngs/kernels.hpp"
#include "ngs/rng.hpp"

namespace {

using namespace ngs;

struct Fixture {
  Dataset data;
  CnfGrammar cnf;
  PerceptionModel model;
  std::vector<GradientTerm> terms;

  Fixture()
      : data([] {
          DatasetSpec s;
          s.scale = 0.05;
          return generate_dataset(s);
        }()),
        cnf(binarize(load_arithmetic_grammar())),
        model(PerceptionModel::random({Architecture::Mlp, 16, 64}, 1)) {
    const auto preds = predict_batch(model, data.train, cnf, Execution::Serial);
    for (std::size_t i = 0; i < data.train.size(); ++i) {
      if (preds[i].string) terms.push_back({&data.train[i].features(), *preds[i].string, 1.0});
    }
  }
};

const Fixture& fixture() {
  static const Fixture f;
  return f;
}

Execution exec_of(const benchmark::State& state) { return state.range(0) ? Execution::Parallel : Execution::Serial; }

void BM_PredictBatch(benchmark::State& state) {
  const Fixture& f = fixture();
  for (auto _ : state) benchmark::DoNotOptimize(predict_batch(f.model, f.data.train, f.cnf, exec_of(state)));
  state.SetItemsProcessed(state.iterations() * static_cast<long>(f.data.train.size()));
}

void BM_AccumulateGradient(benchmark::State& state) {
  const Fixture& f = fixture();
  for (auto _ : state) benchmark::DoNotOptimize(accumulate_gradient(f.model, f.terms, exec_of(state)));
  state.SetItemsProcessed(state.iterations() * static_cast<long>(f.terms.size()));
}

void BM_BacksearchLabels(benchmark::State& state) {
  const Fixture& f = fixture();
  const auto preds = predict_batch(f.model, f.data.train, f.cnf, Execution::Serial);
  const MbsConfig cfg;
  for (auto _ : state) {
    auto labels = map_indices(f.data.train.size(), exec_of(state), [&](std::size_t i) -> SymbolString {
      if (!preds[i].string) return {};
      Rng rng = stream_rng(0, {i});
      const ProbMatrix pm = f.model.forward(f.data.train[i].features());
      return multi_step_backsearch(*preds[i].string, f.data.train[i].answer(), pm, cfg, f.cnf, rng);
    });
    benchmark::DoNotOptimize(labels);
  }
  state.SetItemsProcessed(state.iterations() * static_cast<long>(f.data.train.size()));
}

BENCHMARK(BM_PredictBatch)->ArgName("parallel")->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_AccumulateGradient)->ArgName("parallel")->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_BacksearchLabels)->ArgName("parallel")->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
