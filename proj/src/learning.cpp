#include "ngs/learning.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <cmath>
#include <fstream>
#include <numeric>
#include <ostream>
#include <stdexcept>

#include "json.hpp"
#include "ngs/kernels.hpp"
#include "ngs/reasoning.hpp"

namespace ngs {

namespace {

using json = nlohmann::json;

// Stream tags for stream_rng.
constexpr std::uint64_t kInit = 11;
constexpr std::uint64_t kEpoch = 12;
constexpr std::uint64_t kStep = 13;
constexpr std::uint64_t kPretrain = 14;

struct ItemOutcome {
  std::optional<SymbolString> label;  // pseudo-label (m-BS) or buffer draw (MAPO)
  SymbolString sample;                // on-policy sample (RL, MAPO)
  double reward = 0.0;
  double buffer_weight = 0.0;
};

bool executes_to(const CnfGrammar& g, std::span<const Symbol> z, const Value& y) {
  const auto v = execute(g, z);
  return v && *v == y;
}

SymbolString draw_from_buffer(const std::vector<SymbolString>& buffer, const ProbMatrix& pm, Rng& rng,
                              double* mass) {
  std::vector<double> p(buffer.size());
  for (std::size_t k = 0; k < buffer.size(); ++k) p[k] = std::exp(pm.log_prob(buffer[k]));
  *mass = std::accumulate(p.begin(), p.end(), 0.0);
  if (*mass <= 0.0) return buffer[std::uniform_int_distribution<std::size_t>(0, buffer.size() - 1)(rng)];
  std::discrete_distribution<std::size_t> pick(p.begin(), p.end());
  return buffer[pick(rng)];
}

}  // namespace

std::string to_string(Method m) {
  switch (m) {
    case Method::NgsMbs: return "ngs-mbs";
    case Method::NsRl: return "ns-rl";
    case Method::NgsRl: return "ngs-rl";
    case Method::NgsMapo: return "ngs-mapo";
  }
  return "?";
}

Method parse_method(std::string_view s) {
  for (Method m : {Method::NgsMbs, Method::NsRl, Method::NgsRl, Method::NgsMapo}) {
    if (s == to_string(m)) return m;
  }
  throw std::invalid_argument("unknown method: " + std::string(s));
}

void TrainConfig::validate() const {
  if (batch_size < 1) throw std::invalid_argument("batch_size must be >= 1");
  if (iterations < 0) throw std::invalid_argument("iterations must be >= 0");
  if (!(learning_rate > 0.0)) throw std::invalid_argument("learning_rate must be > 0");
  if (!(baseline_decay >= 0.0 && baseline_decay <= 1.0)) throw std::invalid_argument("baseline_decay must lie in [0, 1]");
  if (!(data_fraction > 0.0 && data_fraction <= 1.0)) throw std::invalid_argument("data_fraction must lie in (0, 1]");
  if (pretrain_size < 0 || pretrain_steps < 0) throw std::invalid_argument("pretraining sizes must be >= 0");
  if (!(mapo_clip >= 0.0 && mapo_clip <= 1.0)) throw std::invalid_argument("mapo_clip must lie in [0, 1]");
  if (eval_every < 1) throw std::invalid_argument("eval_every must be >= 1");
  if (checkpoint_every < 0) throw std::invalid_argument("checkpoint_every must be >= 0");
  if (model.input_dim < 1) throw std::invalid_argument("input_dim must be >= 1");
  if (model.arch == Architecture::Mlp && model.hidden < 1) throw std::invalid_argument("mlp needs hidden >= 1");
  mbs.validate();
}

void TrainLog::write_csv(std::ostream& os) const {
  os << "iter,calc_acc,sym_acc,label_frac,seconds\n";
  char buf[160];
  for (const TrainRecord& r : records) {
    std::snprintf(buf, sizeof buf, "%d,%.6f,%.6f,%.6f,%.3f\n", r.iteration, r.calc_acc, r.sym_acc, r.label_frac,
                  r.seconds);
    os << buf;
  }
}

int TrainLog::iterations_to(double threshold) const {
  for (const TrainRecord& r : records) {
    if (r.calc_acc >= threshold) return r.iteration;
  }
  return -1;
}

void TrainingState::save(const std::filesystem::path& dir) const {
  std::filesystem::create_directories(dir);
  model.save_file(dir / "model.txt");
  json j;
  j["iteration"] = iteration;
  j["baseline"] = baseline;
  j["label_sum"] = label_sum;
  j["label_batches"] = label_batches;
  j["elapsed"] = elapsed;
  json recs = json::array();
  for (const TrainRecord& r : log.records) {
    recs.push_back({r.iteration, r.calc_acc, r.sym_acc, r.label_frac, r.seconds});
  }
  j["log"] = recs;
  json bufs = json::array();
  for (const auto& b : buffers) {
    json entry = json::array();
    for (const SymbolString& z : b) entry.push_back(to_string(z));
    bufs.push_back(entry);
  }
  j["buffers"] = bufs;
  const auto tmp = dir / "state.json.tmp";
  {
    std::ofstream os(tmp);
    if (!os) throw std::runtime_error("cannot write " + tmp.string());
    os << j.dump() << '\n';
  }
  std::filesystem::rename(tmp, dir / "state.json");
}

TrainingState TrainingState::load(const std::filesystem::path& dir) {
  std::ifstream is(dir / "state.json");
  if (!is) throw std::runtime_error("no training state in " + dir.string());
  json j;
  try {
    j = json::parse(is);
  } catch (const json::exception& e) {
    throw std::runtime_error("malformed state.json: " + std::string(e.what()));
  }
  TrainingState s{PerceptionModel::load_file(dir / "model.txt")};
  s.iteration = j.at("iteration").get<int>();
  s.baseline = j.at("baseline").get<double>();
  s.label_sum = j.at("label_sum").get<double>();
  s.label_batches = j.at("label_batches").get<int>();
  s.elapsed = j.at("elapsed").get<double>();
  for (const auto& r : j.at("log")) {
    s.log.records.push_back({r.at(0).get<int>(), r.at(1).get<double>(), r.at(2).get<double>(),
                             r.at(3).get<double>(), r.at(4).get<double>()});
  }
  for (const auto& b : j.at("buffers")) {
    auto& out = s.buffers.emplace_back();
    for (const auto& z : b) out.push_back(parse_symbols(z.get<std::string>()));
  }
  return s;
}

SymbolString independent_sample(const ProbMatrix& pm, Rng& rng) {
  SymbolString z;
  z.reserve(static_cast<std::size_t>(pm.length()));
  for (int i = 0; i < pm.length(); ++i) {
    const SymbolRow& row = pm.row(i);
    std::discrete_distribution<int> pick(row.begin(), row.end());
    z.push_back(symbol_from_id(pick(rng)));
  }
  return z;
}

void train_supervised(PerceptionModel& model, std::span<const LabeledSymbol> symbols, int steps, int batch_size,
                      std::uint64_t seed) {
  if (symbols.empty() || steps <= 0) return;
  Rng rng = stream_rng(seed, {kPretrain});
  std::uniform_int_distribution<std::size_t> pick(0, symbols.size() - 1);
  const int dim = model.shape().input_dim;
  for (int s = 0; s < steps; ++s) {
    Gradient grad(model.params().size(), 0.0);
    for (int b = 0; b < batch_size; ++b) {
      const LabeledSymbol& ls = symbols[pick(rng)];
      const FeatureSeq x(dim, ls.features);
      const Symbol label[] = {ls.label};
      model.accumulate_nll_gradient(x, label, 1.0 / batch_size, grad);
    }
    model.apply_update(grad);
  }
}

Trainer::Trainer(TrainConfig cfg, std::span<const Example> train, const Grammar& g,
                 std::span<const LabeledSymbol> pretrain)
    : cfg_(std::move(cfg)), cnf_(binarize(g)), feasibility_(g) {
  cfg_.validate();
  const auto n = static_cast<std::size_t>(std::lround(cfg_.data_fraction * static_cast<double>(train.size())));
  train_ = train.first(std::min(n, train.size()));
  if (train_.empty()) throw std::invalid_argument("no training examples");
  for (const Example& e : train_) {
    if (e.features().dim() != cfg_.model.input_dim) throw std::invalid_argument("feature dimension mismatch");
  }
  pretrain_ = pretrain.first(std::min(pretrain.size(), static_cast<std::size_t>(cfg_.pretrain_size)));
}

TrainingState Trainer::initial_state() const {
  AdamConfig adam;
  adam.learning_rate = cfg_.learning_rate;
  TrainingState s{PerceptionModel::random(cfg_.model, splitmix64(cfg_.seed ^ kInit), cfg_.init_scale, adam)};
  if (!pretrain_.empty()) {
    train_supervised(s.model, pretrain_, cfg_.pretrain_steps, cfg_.batch_size, cfg_.seed);
  }
  if (cfg_.method == Method::NgsMapo) s.buffers.assign(train_.size(), {});
  return s;
}

std::vector<std::size_t> Trainer::batch_indices(int it) const {
  const std::size_t n = train_.size();
  const auto batch = static_cast<std::size_t>(cfg_.batch_size);
  std::vector<std::size_t> out;
  out.reserve(batch);
  std::size_t pos = static_cast<std::size_t>(it) * batch;
  std::vector<std::size_t> perm;
  std::size_t perm_epoch = static_cast<std::size_t>(-1);
  for (std::size_t k = 0; k < batch; ++k, ++pos) {
    const std::size_t epoch = pos / n;
    if (epoch != perm_epoch) {
      perm.resize(n);
      std::iota(perm.begin(), perm.end(), std::size_t{0});
      Rng rng = stream_rng(cfg_.seed, {kEpoch, epoch});
      std::shuffle(perm.begin(), perm.end(), rng);
      perm_epoch = epoch;
    }
    out.push_back(perm[pos % n]);
  }
  return out;
}

StepReport Trainer::step(TrainingState& state) const {
  StepReport report;
  report.batch = batch_indices(state.iteration);
  const int it = state.iteration;
  const PerceptionModel& model = state.model;
  const auto& buffers = state.buffers;

  auto outcomes = map_indices(report.batch.size(), cfg_.execution, [&](std::size_t k) {
    const Example& ex = train_[report.batch[k]];
    Rng rng = stream_rng(cfg_.seed, {kStep, static_cast<std::uint64_t>(it), k});
    const ProbMatrix pm = model.forward(ex.features());
    ItemOutcome out;
    switch (cfg_.method) {
      case Method::NgsMbs: {
        auto parse = viterbi_parse(cnf_, pm);
        if (!parse) break;
        const auto current = execute(cnf_, parse->string);
        if (current && *current == ex.answer()) {
          out.label = std::move(parse->string);
          break;
        }
        SymbolString z = multi_step_backsearch(parse->string, ex.answer(), pm, cfg_.mbs, cnf_, rng);
        if (executes_to(cnf_, z, ex.answer())) out.label = std::move(z);
        break;
      }
      case Method::NsRl:
        out.sample = independent_sample(pm, rng);
        out.reward = executes_to(cnf_, out.sample, ex.answer()) ? 1.0 : 0.0;
        break;
      case Method::NgsRl:
      case Method::NgsMapo: {
        const FeasibilityAutomaton& fa = feasibility_.get(ex.length());
        if (cfg_.method == Method::NgsMapo) {
          const auto& buffer = buffers[report.batch[k]];
          if (!buffer.empty()) {
            double mass = 0.0;
            out.label = draw_from_buffer(buffer, pm, rng, &mass);
            out.buffer_weight = std::min(1.0, std::max(mass, cfg_.mapo_clip));
          }
        }
        out.sample = constrained_sample(fa, pm, rng);
        out.reward = executes_to(cnf_, out.sample, ex.answer()) ? 1.0 : 0.0;
        break;
      }
    }
    return out;
  });

  std::vector<GradientTerm> terms;
  const double batch = static_cast<double>(report.batch.size());
  double label_frac = 0.0;
  if (cfg_.method == Method::NgsMbs) {
    std::size_t labelled = 0;
    for (const ItemOutcome& o : outcomes) labelled += o.label.has_value();
    for (std::size_t k = 0; k < outcomes.size(); ++k) {
      report.labelled.push_back(outcomes[k].label.has_value());
      report.targets.push_back(outcomes[k].label.value_or(SymbolString{}));
      if (outcomes[k].label) {
        terms.push_back({&train_[report.batch[k]].features(), *outcomes[k].label, 1.0 / static_cast<double>(labelled)});
      }
    }
    label_frac = static_cast<double>(labelled) / batch;
  } else {
    double reward_sum = 0.0;
    for (const ItemOutcome& o : outcomes) reward_sum += o.reward;
    report.mean_reward = reward_sum / batch;
    for (std::size_t k = 0; k < outcomes.size(); ++k) {
      const ItemOutcome& o = outcomes[k];
      const FeatureSeq* x = &train_[report.batch[k]].features();
      report.labelled.push_back(o.reward > 0.0);
      report.targets.push_back(o.reward > 0.0 ? o.sample : SymbolString{});
      if (o.label) terms.push_back({x, *o.label, o.buffer_weight / batch});
      const double w = (1.0 - o.buffer_weight) * (o.reward - state.baseline) / batch;
      if (w != 0.0) terms.push_back({x, o.sample, w});
    }
    label_frac = report.mean_reward;
    state.baseline = cfg_.baseline_decay * state.baseline + (1.0 - cfg_.baseline_decay) * report.mean_reward;
    if (cfg_.method == Method::NgsMapo) {
      for (std::size_t k = 0; k < outcomes.size(); ++k) {
        if (outcomes[k].reward <= 0.0) continue;
        auto& buffer = state.buffers[report.batch[k]];
        if (std::find(buffer.begin(), buffer.end(), outcomes[k].sample) == buffer.end()) {
          buffer.push_back(outcomes[k].sample);
        }
      }
    }
  }

  if (!terms.empty()) {
    report.gradient = accumulate_gradient(state.model, terms, cfg_.execution);
    state.model.apply_update(report.gradient);
  } else {
    report.gradient.assign(state.model.params().size(), 0.0);
  }
  state.label_sum += label_frac;
  ++state.label_batches;
  ++state.iteration;
  return report;
}

void Trainer::run(TrainingState& state, const TrainHooks& hooks) const {
  using clock = std::chrono::steady_clock;
  auto record = [&] {
    TrainRecord r;
    r.iteration = state.iteration;
    if (hooks.evaluate) {
      const EvalMetrics m = hooks.evaluate(state.model);
      r.calc_acc = m.calc_acc;
      r.sym_acc = m.sym_acc;
    }
    r.label_frac = state.label_batches > 0 ? state.label_sum / state.label_batches : 0.0;
    r.seconds = cfg_.record_time ? state.elapsed : 0.0;
    state.label_sum = 0.0;
    state.label_batches = 0;
    state.log.records.push_back(r);
    if (hooks.on_record) hooks.on_record(r);
  };
  const auto recorded = [&] {
    return !state.log.records.empty() && state.log.records.back().iteration == state.iteration;
  };
  if (state.log.records.empty()) record();
  while (state.iteration < cfg_.iterations) {
    const auto start = clock::now();
    step(state);
    state.elapsed += std::chrono::duration<double>(clock::now() - start).count();
    if (state.iteration % cfg_.eval_every == 0 || state.iteration == cfg_.iterations) record();
    if (hooks.checkpoint && cfg_.checkpoint_every > 0 && state.iteration % cfg_.checkpoint_every == 0) {
      hooks.checkpoint(state);
    }
  }
  if (!recorded()) record();
}

namespace {

TrainResult train_with(std::span<const Example> data, const TrainConfig& cfg, const TrainHooks& hooks,
                       std::span<const LabeledSymbol> pretrain) {
  const Trainer trainer(cfg, data, load_arithmetic_grammar(), pretrain);
  TrainingState state = trainer.initial_state();
  trainer.run(state, hooks);
  return {std::move(state.model), std::move(state.log)};
}

}  // namespace

TrainResult train_ngs_mbs(std::span<const Example> data, const TrainConfig& cfg, const TrainHooks& hooks,
                          std::span<const LabeledSymbol> pretrain) {
  if (cfg.method != Method::NgsMbs) throw std::invalid_argument("train_ngs_mbs needs method ngs-mbs");
  return train_with(data, cfg, hooks, pretrain);
}

TrainResult train_reinforce(std::span<const Example> data, const TrainConfig& cfg, const TrainHooks& hooks,
                            std::span<const LabeledSymbol> pretrain) {
  if (cfg.method != Method::NsRl && cfg.method != Method::NgsRl) {
    throw std::invalid_argument("train_reinforce needs method ns-rl or ngs-rl");
  }
  return train_with(data, cfg, hooks, pretrain);
}

TrainResult train_mapo_lite(std::span<const Example> data, const TrainConfig& cfg, const TrainHooks& hooks,
                            std::span<const LabeledSymbol> pretrain) {
  if (cfg.method != Method::NgsMapo) throw std::invalid_argument("train_mapo_lite needs method ngs-mapo");
  return train_with(data, cfg, hooks, pretrain);
}

}  // namespace ngs
