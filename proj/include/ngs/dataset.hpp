#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <utility>
#include <vector>

#include "ngs/cnf.hpp"
#include "ngs/execution.hpp"
#include "ngs/perception.hpp"
#include "ngs/rng.hpp"
#include "ngs/value.hpp"

namespace ngs {

struct LengthCount {
  int length;
  int train;
  int test;
  friend bool operator==(const LengthCount&, const LengthCount&) = default;
};

struct DatasetSpec {
  std::vector<LengthCount> mix = {{1, 1000, 200}, {3, 1000, 200}, {5, 2000, 400}, {7, 6000, 1200}};
  int feature_dim = 16;
  double noise = 0.3;   // per-coordinate standard deviation
  int pool_size = 200;  // instances per class in each of the train/test pools
  std::uint64_t seed = 0;
  double scale = 1.0;   // multiplies every count

  /// Throws std::invalid_argument: even or non-positive lengths, negative
  /// counts, noise < 0, feature_dim < 14, pool_size < 1, scale <= 0.
  void validate() const;
  /// Counts after scaling (rounded to nearest).
  std::vector<LengthCount> scaled_mix() const;

  friend bool operator==(const DatasetSpec&, const DatasetSpec&) = default;
};

class Example;
struct Dataset;
struct EvalMetrics;

/// Passkey for the hidden formula. Only evaluation and dataset I/O can mint
/// one, so trainers cannot read the latent string.
class TruthAccess {
 private:
  TruthAccess() = default;
  friend void write_dataset(const Dataset& data, const std::filesystem::path& dir);
  friend EvalMetrics evaluate_model(const PerceptionModel& model, std::span<const Example> examples,
                                    const CnfGrammar& g, Execution exec);
  friend struct TruthAccessForTests;
};

/// One weakly-labelled example: features x, answer y, and the hidden formula z.
class Example {
 public:
  Example(FeatureSeq x, Value y, SymbolString truth)
      : features_(std::move(x)), answer_(y), truth_(std::move(truth)) {}

  const FeatureSeq& features() const { return features_; }
  const Value& answer() const { return answer_; }
  int length() const { return features_.length(); }
  const SymbolString& hidden_truth(TruthAccess) const { return truth_; }

 private:
  FeatureSeq features_;
  Value answer_;
  SymbolString truth_;
};

struct LabeledSymbol {
  std::vector<double> features;
  Symbol label;
};

/// K noisy instances per class: unit prototype e_c plus N(0, noise^2 I).
struct SymbolPool {
  int dim = 0;
  std::vector<std::vector<std::vector<double>>> instances;  // [class][k] -> d floats

  const std::vector<double>& instance(Symbol s, std::size_t k) const {
    return instances[static_cast<std::size_t>(id(s))][k];
  }
};

/// Uniform formula sampler over L(G) of a given odd length, rejecting formulas
/// that divide by zero. Lengths up to 5 draw from the enumerated language;
/// longer ones draw digits and operators per slot, which is the same
/// distribution for the arithmetic grammar.
class FormulaSampler {
 public:
  explicit FormulaSampler(const Grammar& g);
  SymbolString sample(int length, Rng& rng) const;
  const CnfGrammar& cnf() const { return cnf_; }

 private:
  Grammar grammar_;
  CnfGrammar cnf_;
  std::map<int, std::vector<SymbolString>> enumerated_;
};

SymbolString sample_formula(const Grammar& g, int length, Rng& rng);

std::pair<SymbolPool, SymbolPool> build_symbol_pools(const DatasetSpec& spec, Rng& rng);

struct Dataset {
  DatasetSpec spec;
  std::vector<Example> train;
  std::vector<Example> test;
  /// Labelled train-pool instances, available for optional supervised pretraining.
  std::vector<LabeledSymbol> symbols;
};

/// Deterministic in spec (including seed). Splits draw symbol features from
/// disjoint pools; each split is shuffled after generation.
Dataset generate_dataset(const DatasetSpec& spec);

/// Writes train.jsonl, test.jsonl, symbols.jsonl and manifest.json.
void write_dataset(const Dataset& data, const std::filesystem::path& dir);
/// Throws std::runtime_error on missing or malformed files.
Dataset read_dataset(const std::filesystem::path& dir);

}  // namespace ngs
