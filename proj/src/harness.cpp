#include "ngs/harness.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <map>
#include <ostream>
#include <set>
#include <sstream>
#include <stdexcept>

#include "json.hpp"
#include "ngs/config.hpp"
#include "ngs/kernels.hpp"

namespace ngs {

namespace {

using json = nlohmann::json;
namespace fs = std::filesystem;

std::string fnv1a_hex(std::string_view text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot write " + path.string());
  os << content;
}

std::size_t display_width(const std::string& s) {
  return static_cast<std::size_t>(std::count_if(s.begin(), s.end(), [](char c) {
    return (static_cast<unsigned char>(c) & 0xC0) != 0x80;
  }));
}

std::string fixed3(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3f", v);
  return buf;
}

json run_to_json(const RunReport& r) {
  json by_len = json::object();
  for (const auto& [len, acc] : r.calc_acc_by_length) by_len[std::to_string(len)] = acc;
  return {{"name", r.name},
          {"method", to_string(r.method)},
          {"data_fraction", r.data_fraction},
          {"steps", r.steps},
          {"status", to_string(r.status)},
          {"error", r.error},
          {"iterations", r.iterations},
          {"calc_acc", r.calc_acc},
          {"sym_acc", r.sym_acc},
          {"calc_acc_by_length", by_len},
          {"curve", r.curve},
          {"config_hash", r.config_hash}};
}

RunReport run_from_json(const json& j) {
  RunReport r;
  r.name = j.at("name").get<std::string>();
  r.method = parse_method(j.at("method").get<std::string>());
  r.data_fraction = j.at("data_fraction").get<double>();
  r.steps = j.at("steps").get<int>();
  const auto status = j.at("status").get<std::string>();
  r.status = status == "ok" ? RunStatus::Ok : status == "failed" ? RunStatus::Failed : RunStatus::Missing;
  r.error = j.at("error").get<std::string>();
  r.iterations = j.at("iterations").get<int>();
  r.calc_acc = j.at("calc_acc").get<double>();
  r.sym_acc = j.at("sym_acc").get<double>();
  for (const auto& [len, acc] : j.at("calc_acc_by_length").items()) r.calc_acc_by_length[std::stoi(len)] = acc.get<double>();
  r.curve = j.at("curve").get<std::string>();
  r.config_hash = j.at("config_hash").get<std::string>();
  return r;
}

RunReport skeleton(const RunSpec& run) {
  RunReport r;
  r.name = run.name;
  r.method = run.config.method;
  r.data_fraction = run.config.data_fraction;
  r.steps = run.config.mbs.steps;
  r.config_hash = fnv1a_hex(to_text(run.config));
  return r;
}

void write_table(const MetricsReport& report, const fs::path& dir, const std::string& stem, bool calc) {
  std::vector<std::string> rows;
  std::set<double> fractions;
  for (const RunReport& r : report.runs) {
    if (std::find(rows.begin(), rows.end(), table_row(r)) == rows.end()) rows.push_back(table_row(r));
    fractions.insert(r.data_fraction);
  }
  std::vector<std::vector<std::string>> cells;
  std::vector<std::string> header{"method"};
  for (double f : fractions) header.push_back(fixed3(f));
  cells.push_back(header);
  for (const std::string& row : rows) {
    std::vector<std::string> line{row};
    for (double f : fractions) {
      std::string cell = "—";
      for (const RunReport& r : report.runs) {
        if (table_row(r) == row && r.data_fraction == f && r.status == RunStatus::Ok) {
          cell = fixed3(calc ? r.calc_acc : r.sym_acc);
        }
      }
      line.push_back(cell);
    }
    cells.push_back(line);
  }
  std::ostringstream csv, txt;
  std::vector<std::size_t> width(header.size(), 0);
  for (const auto& line : cells) {
    for (std::size_t c = 0; c < line.size(); ++c) width[c] = std::max(width[c], display_width(line[c]));
  }
  for (const auto& line : cells) {
    for (std::size_t c = 0; c < line.size(); ++c) {
      csv << (c ? "," : "") << line[c];
      txt << (c ? "  " : "") << line[c];
      if (c + 1 < line.size()) txt << std::string(width[c] - display_width(line[c]), ' ');
    }
    csv << '\n';
    txt << '\n';
  }
  write_file(dir / (stem + ".csv"), csv.str());
  write_file(dir / (stem + ".txt"), txt.str());
}

}  // namespace

EvalMetrics evaluate_model(const PerceptionModel& model, std::span<const Example> examples, const CnfGrammar& g,
                           Execution exec) {
  EvalMetrics m;
  if (examples.empty()) return m;
  const std::vector<Prediction> preds = predict_batch(model, examples, g, exec);
  const TruthAccess access;
  std::map<int, std::pair<int, int>> by_length;  // length -> (correct, total)
  std::size_t correct = 0, slots = 0, slot_hits = 0;
  for (std::size_t i = 0; i < examples.size(); ++i) {
    const Example& ex = examples[i];
    const bool ok = preds[i].value && *preds[i].value == ex.answer();
    correct += ok;
    auto& [hit, total] = by_length[ex.length()];
    hit += ok;
    ++total;
    const SymbolString& truth = ex.hidden_truth(access);
    slots += truth.size();
    if (preds[i].string) {
      for (std::size_t k = 0; k < truth.size(); ++k) slot_hits += (*preds[i].string)[k] == truth[k];
    }
  }
  m.calc_acc = static_cast<double>(correct) / static_cast<double>(examples.size());
  m.sym_acc = slots ? static_cast<double>(slot_hits) / static_cast<double>(slots) : 0.0;
  for (const auto& [len, counts] : by_length) {
    m.calc_acc_by_length[len] = static_cast<double>(counts.first) / counts.second;
  }
  return m;
}

void ExperimentPlan::validate() const {
  std::set<std::string> names;
  for (const RunSpec& r : runs) {
    if (r.name.empty() || r.name.find_first_of("/\\") != std::string::npos || r.name == "." || r.name == "..") {
      throw std::invalid_argument("bad run name '" + r.name + "'");
    }
    if (!names.insert(r.name).second) throw std::invalid_argument("duplicate run name '" + r.name + "'");
    if (!fs::exists(r.data / "manifest.json")) {
      throw std::invalid_argument("run " + r.name + ": no dataset at " + r.data.string());
    }
    r.config.validate();
  }
  if (eval_every < 1) throw std::invalid_argument("eval_every must be >= 1");
}

std::string to_string(RunStatus s) {
  switch (s) {
    case RunStatus::Ok: return "ok";
    case RunStatus::Failed: return "failed";
    case RunStatus::Missing: return "missing";
  }
  return "?";
}

bool MetricsReport::complete() const {
  return std::all_of(runs.begin(), runs.end(), [](const RunReport& r) { return r.status == RunStatus::Ok; });
}

void MetricsReport::write_json(const fs::path& path) const {
  json arr = json::array();
  for (const RunReport& r : runs) arr.push_back(run_to_json(r));
  write_file(path, json{{"runs", arr}}.dump(2) + "\n");
}

MetricsReport MetricsReport::read_json(const fs::path& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot read " + path.string());
  MetricsReport report;
  try {
    const json doc = json::parse(is);
    for (const auto& j : doc.at("runs")) report.runs.push_back(run_from_json(j));
  } catch (const json::exception& e) {
    throw std::runtime_error("malformed report " + path.string() + ": " + e.what());
  }
  return report;
}

std::string table_row(const RunReport& r) {
  std::string row = to_string(r.method);
  if (r.method == Method::NgsMbs && r.steps != MbsConfig{}.steps) row += " T=" + std::to_string(r.steps);
  return row;
}

RunReport run_experiment(const RunSpec& run, const Dataset& data, const fs::path& dir, std::ostream* progress) {
  RunReport report = skeleton(run);
  fs::create_directories(dir);
  write_file(dir / "config.txt", to_text(run.config));

  const Grammar grammar = load_arithmetic_grammar();
  const CnfGrammar cnf = binarize(grammar);
  const Trainer trainer(run.config, data.train, grammar, data.symbols);
  const fs::path ckpt = dir / "checkpoint";
  const auto save_checkpoint = [&](const TrainingState& s) {
    s.save(ckpt);
    write_file(ckpt / "config_hash", report.config_hash + "\n");
  };

  std::optional<TrainingState> state;
  if (fs::exists(ckpt / "state.json")) {
    std::string stored = fs::exists(ckpt / "config_hash") ? read_text_file(ckpt / "config_hash") : "";
    if (!stored.empty() && stored.back() == '\n') stored.pop_back();
    if (stored != report.config_hash) {
      throw std::runtime_error("checkpoint in " + ckpt.string() + " belongs to a different config");
    }
    state.emplace(TrainingState::load(ckpt));
    if (progress) *progress << run.name << ": resuming at iteration " << state->iteration << '\n';
  } else {
    state.emplace(trainer.initial_state());
  }

  TrainHooks hooks;
  hooks.evaluate = [&](const PerceptionModel& m) { return evaluate_model(m, data.test, cnf, run.config.execution); };
  hooks.checkpoint = save_checkpoint;
  if (progress) {
    hooks.on_record = [&](const TrainRecord& r) {
      char buf[160];
      std::snprintf(buf, sizeof buf, "%s: iter %d calc %.4f sym %.4f labelled %.3f\n", run.name.c_str(), r.iteration,
                    r.calc_acc, r.sym_acc, r.label_frac);
      *progress << buf << std::flush;
    };
  }
  trainer.run(*state, hooks);
  save_checkpoint(*state);

  std::ostringstream curve;
  state->log.write_csv(curve);
  write_file(dir / "curve.csv", curve.str());
  state->model.save_file(dir / "model.txt");

  const EvalMetrics final_metrics = evaluate_model(state->model, data.test, cnf, run.config.execution);
  report.status = RunStatus::Ok;
  report.iterations = state->iteration;
  report.calc_acc = final_metrics.calc_acc;
  report.sym_acc = final_metrics.sym_acc;
  report.calc_acc_by_length = final_metrics.calc_acc_by_length;
  report.curve = (fs::path(run.name) / "curve.csv").generic_string();
  write_file(dir / "run.json", run_to_json(report).dump(2) + "\n");
  return report;
}

MetricsReport run_plan(const ExperimentPlan& plan, std::ostream* progress) {
  plan.validate();
  fs::create_directories(plan.out);
  std::map<fs::path, Dataset> datasets;
  MetricsReport report;
  for (const RunSpec& run : plan.runs) {
    try {
      auto it = datasets.find(run.data);
      if (it == datasets.end()) it = datasets.emplace(run.data, read_dataset(run.data)).first;
      report.runs.push_back(run_experiment(run, it->second, plan.out / run.name, progress));
    } catch (const std::exception& e) {
      RunReport failed = skeleton(run);
      failed.status = RunStatus::Failed;
      failed.error = e.what();
      report.runs.push_back(failed);
      if (progress) *progress << run.name << ": failed: " << e.what() << '\n';
    }
  }
  report.write_json(plan.out / "report.json");
  return report;
}

bool emit_tables(const MetricsReport& report, const fs::path& dir) {
  fs::create_directories(dir);
  write_table(report, dir, "calc_table", true);
  write_table(report, dir, "sym_table", false);

  std::ostringstream curves;
  curves << "run,iter,calc_acc,sym_acc,label_frac,seconds\n";
  for (const RunReport& r : report.runs) {
    if (r.curve.empty()) continue;
    std::ifstream is(dir / r.curve);
    std::string line;
    if (!is || !std::getline(is, line)) continue;  // header
    while (std::getline(is, line)) curves << r.name << ',' << line << '\n';
  }
  write_file(dir / "curves.csv", curves.str());

  return report.complete();
}

}  // namespace ngs
