// Command-line front end: dataset generation, training, evaluation, sweeps.

#include <cstdio>
#include <filesystem>
#include <iostream>

#include "CLI11.hpp"
#include "json.hpp"
#include "ngs/config.hpp"
#include "ngs/harness.hpp"

namespace fs = std::filesystem;

namespace {

int gen_data(const fs::path& spec_file, const fs::path& out) {
  const ngs::DatasetSpec spec = ngs::parse_dataset_spec(ngs::read_text_file(spec_file));
  const ngs::Dataset data = ngs::generate_dataset(spec);
  ngs::write_dataset(data, out);
  std::cout << "wrote " << data.train.size() << " train / " << data.test.size() << " test examples to " << out.string()
            << '\n';
  return 0;
}

int train(const fs::path& config_file, const fs::path& data_dir, const fs::path& out) {
  ngs::RunSpec run{out.filename().string(), ngs::parse_train_config(ngs::read_text_file(config_file)), data_dir};
  if (run.name.empty()) run.name = "run";
  const ngs::Dataset data = ngs::read_dataset(data_dir);
  const ngs::RunReport r = ngs::run_experiment(run, data, out, &std::cerr);
  std::printf("calc_acc %.4f sym_acc %.4f after %d iterations\n", r.calc_acc, r.sym_acc, r.iterations);
  return 0;
}

int eval(const fs::path& model_file, const fs::path& data_dir) {
  const ngs::PerceptionModel model = ngs::PerceptionModel::load_file(model_file);
  const ngs::Dataset data = ngs::read_dataset(data_dir);
  const ngs::CnfGrammar cnf = ngs::binarize(ngs::load_arithmetic_grammar());
  const ngs::EvalMetrics m = ngs::evaluate_model(model, data.test, cnf);
  nlohmann::json by_len = nlohmann::json::object();
  for (const auto& [len, acc] : m.calc_acc_by_length) by_len[std::to_string(len)] = acc;
  std::cout << nlohmann::json{{"calc_acc", m.calc_acc}, {"sym_acc", m.sym_acc}, {"calc_acc_by_length", by_len}}.dump(2)
            << '\n';
  return 0;
}

int sweep(const fs::path& plan_file) {
  const ngs::ExperimentPlan plan =
      ngs::parse_plan(ngs::read_text_file(plan_file), plan_file.parent_path());
  const ngs::MetricsReport report = ngs::run_plan(plan, &std::cerr);
  const bool complete = ngs::emit_tables(report, plan.out);
  std::cout << ngs::read_text_file(plan.out / "calc_table.txt");
  if (!complete) {
    std::cerr << "incomplete: some runs failed, see " << (plan.out / "report.json").string() << '\n';
    return 1;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Neural-grammar-symbolic learning on synthetic handwritten formulas"};
  app.require_subcommand(1);

  fs::path spec_file, data_dir, out, config_file, model_file, plan_file;

  auto* gen = app.add_subcommand("gen-data", "Generate a dataset from a spec file");
  gen->add_option("--spec", spec_file, "Dataset spec (key = value)")->required()->check(CLI::ExistingFile);
  gen->add_option("--out", out, "Output directory")->required();

  auto* tr = app.add_subcommand("train", "Train one model; resumes from <out>/checkpoint");
  tr->add_option("--config", config_file, "Training config (key = value)")->required()->check(CLI::ExistingFile);
  tr->add_option("--data", data_dir, "Dataset directory")->required()->check(CLI::ExistingDirectory);
  tr->add_option("--out", out, "Run directory")->required();

  auto* ev = app.add_subcommand("eval", "Evaluate a model on a dataset's test split");
  ev->add_option("--model", model_file, "Model file")->required()->check(CLI::ExistingFile);
  ev->add_option("--data", data_dir, "Dataset directory")->required()->check(CLI::ExistingDirectory);

  auto* sw = app.add_subcommand("sweep", "Run an experiment plan and write tables");
  sw->add_option("--plan", plan_file, "Plan file")->required()->check(CLI::ExistingFile);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*gen) return gen_data(spec_file, out);
    if (*tr) return train(config_file, data_dir, out);
    if (*ev) return eval(model_file, data_dir);
    if (*sw) return sweep(plan_file);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}
