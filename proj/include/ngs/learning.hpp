#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "ngs/backsearch.hpp"
#include "ngs/dataset.hpp"
#include "ngs/execution.hpp"
#include "ngs/feasibility.hpp"
#include "ngs/metrics.hpp"
#include "ngs/perception.hpp"

namespace ngs {

enum class Method { NgsMbs, NsRl, NgsRl, NgsMapo };

std::string to_string(Method m);
/// "ngs-mbs", "ns-rl", "ngs-rl", "ngs-mapo".
Method parse_method(std::string_view s);

struct TrainConfig {
  Method method = Method::NgsMbs;
  int batch_size = 64;
  int iterations = 15000;
  double learning_rate = 5e-4;
  MbsConfig mbs;
  double baseline_decay = 0.99;
  double data_fraction = 1.0;
  int pretrain_size = 0;     // labelled symbols for supervised warm-up; 0 disables
  int pretrain_steps = 500;
  double mapo_clip = 0.1;    // lower bound on the buffer weight
  ModelShape model{Architecture::Mlp, 16, 64};
  double init_scale = 0.1;
  std::uint64_t seed = 0;
  int eval_every = 500;
  int checkpoint_every = 0;  // 0 disables
  bool record_time = true;   // false writes 0 seconds, for byte-stable logs
  Execution execution = Execution::Parallel;

  /// Throws std::invalid_argument on out-of-range fields.
  void validate() const;
};

struct TrainRecord {
  int iteration = 0;
  double calc_acc = 0.0;
  double sym_acc = 0.0;
  double label_frac = 0.0;  // share of batch items that produced a pseudo-label / reward
  double seconds = 0.0;
};

struct TrainLog {
  std::vector<TrainRecord> records;

  /// `iter,calc_acc,sym_acc,label_frac,seconds` with a header line.
  void write_csv(std::ostream& os) const;
  /// First evaluated iteration whose calc_acc reaches `threshold`, or -1.
  int iterations_to(double threshold) const;
};

/// Everything needed to continue a run where it stopped.
struct TrainingState {
  explicit TrainingState(PerceptionModel m) : model(std::move(m)) {}

  PerceptionModel model;
  int iteration = 0;
  double baseline = 0.0;
  std::vector<std::vector<SymbolString>> buffers;  // per training example, MAPO only
  TrainLog log;
  double label_sum = 0.0;  // label fraction summed since the last record
  int label_batches = 0;
  double elapsed = 0.0;

  void save(const std::filesystem::path& dir) const;
  static TrainingState load(const std::filesystem::path& dir);
};

using Evaluator = std::function<EvalMetrics(const PerceptionModel&)>;

struct TrainHooks {
  Evaluator evaluate;  // optional; records carry zeros without it
  std::function<void(const TrainingState&)> checkpoint;
  std::function<void(const TrainRecord&)> on_record;
};

/// Per-iteration outcome of a batch, mostly for tests.
struct StepReport {
  std::vector<std::size_t> batch;  // training-example indices
  std::vector<bool> labelled;
  std::vector<SymbolString> targets;  // pseudo-label or rewarded sample per item, empty if none
  Gradient gradient;               // mean loss gradient applied this step
  double mean_reward = 0.0;
};

/// Weakly supervised training loop shared by all methods. The hidden formula
/// of an example is never consulted.
class Trainer {
 public:
  /// Uses the first round(data_fraction * n) training examples.
  Trainer(TrainConfig cfg, std::span<const Example> train, const Grammar& g,
          std::span<const LabeledSymbol> pretrain = {});

  const TrainConfig& config() const { return cfg_; }
  std::size_t num_examples() const { return train_.size(); }

  /// Fresh model (and optional supervised warm-up).
  TrainingState initial_state() const;
  /// One iteration: batch selection, per-item work, one optimizer update.
  StepReport step(TrainingState& state) const;
  /// Iterates until cfg.iterations, evaluating every eval_every iterations.
  void run(TrainingState& state, const TrainHooks& hooks) const;

  /// Training-example indices of iteration `it` (epoch-wise permutations).
  std::vector<std::size_t> batch_indices(int it) const;

 private:
  TrainConfig cfg_;
  std::span<const Example> train_;
  std::span<const LabeledSymbol> pretrain_;
  CnfGrammar cnf_;
  FeasibilityCache feasibility_;
};

struct TrainResult {
  PerceptionModel model;
  TrainLog log;
};

/// Convenience wrappers over Trainer with the arithmetic grammar. Each checks
/// that cfg.method matches and throws std::invalid_argument otherwise.
TrainResult train_ngs_mbs(std::span<const Example> data, const TrainConfig& cfg, const TrainHooks& hooks = {},
                          std::span<const LabeledSymbol> pretrain = {});
/// ns-rl samples each position independently; ngs-rl samples grammar-valid strings.
TrainResult train_reinforce(std::span<const Example> data, const TrainConfig& cfg, const TrainHooks& hooks = {},
                            std::span<const LabeledSymbol> pretrain = {});
TrainResult train_mapo_lite(std::span<const Example> data, const TrainConfig& cfg, const TrainHooks& hooks = {},
                            std::span<const LabeledSymbol> pretrain = {});

/// Supervised cross-entropy on labelled symbols (warm-up / sanity runs).
void train_supervised(PerceptionModel& model, std::span<const LabeledSymbol> symbols, int steps,
                      int batch_size, std::uint64_t seed);

/// Per-position independent draw from pm; may fall outside L(G).
SymbolString independent_sample(const ProbMatrix& pm, Rng& rng);

}  // namespace ngs
