#pragma once

#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ngs/dataset.hpp"
#include "ngs/learning.hpp"
#include "ngs/metrics.hpp"

namespace ngs {

/// Calculation accuracy: share of examples whose grammar-constrained
/// prediction executes exactly to y. Symbol accuracy: per-slot agreement of
/// that prediction with the hidden formula, over all slots. Pure.
EvalMetrics evaluate_model(const PerceptionModel& model, std::span<const Example> examples, const CnfGrammar& g,
                           Execution exec = Execution::Parallel);

struct RunSpec {
  std::string name;
  TrainConfig config;
  std::filesystem::path data;  // dataset directory
};

struct ExperimentPlan {
  std::vector<RunSpec> runs;
  int eval_every = 500;
  std::filesystem::path out;

  /// Throws std::invalid_argument on duplicate or unusable run names and on
  /// datasets that do not exist.
  void validate() const;
};

enum class RunStatus { Ok, Failed, Missing };

std::string to_string(RunStatus s);

struct RunReport {
  std::string name;
  Method method = Method::NgsMbs;
  double data_fraction = 1.0;
  int steps = 10;
  RunStatus status = RunStatus::Missing;
  std::string error;
  int iterations = 0;
  double calc_acc = 0.0;
  double sym_acc = 0.0;
  std::map<int, double> calc_acc_by_length;
  std::string curve;        // CSV path relative to the plan output directory
  std::string config_hash;  // hex FNV-1a of the canonical config text
};

struct MetricsReport {
  std::vector<RunReport> runs;

  bool complete() const;
  void write_json(const std::filesystem::path& path) const;
  static MetricsReport read_json(const std::filesystem::path& path);
};

/// Row label of a run in the tables: the method, plus the step count for
/// back-search runs that do not use the default.
std::string table_row(const RunReport& r);

/// Trains one run into `dir` (curve.csv, model.txt, run.json, checkpoint/).
/// Resumes from dir/checkpoint when its config hash matches; throws
/// std::runtime_error when it does not. Training errors propagate.
RunReport run_experiment(const RunSpec& run, const Dataset& data, const std::filesystem::path& dir,
                         std::ostream* progress = nullptr);

/// Runs every plan entry into plan.out/<name>, writes plan.out/report.json.
/// A failing run is recorded and the others continue.
MetricsReport run_plan(const ExperimentPlan& plan, std::ostream* progress = nullptr);

/// Writes calc_table.{csv,txt}, sym_table.{csv,txt} (rows = methods,
/// columns = data fractions; cells without a successful run print as a dash)
/// and curves.csv. Returns false when any run did not finish.
bool emit_tables(const MetricsReport& report, const std::filesystem::path& dir);

}  // namespace ngs
