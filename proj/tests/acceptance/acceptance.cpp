// Acceptance suite: one PASS/FAIL line per criterion, exit code 1 if any fails.
//
//   acceptance [--only 5,6,...] [--out DIR] [--no-supplementary]
//
// Criteria 5-10 are exact property checks against brute force. Criteria 1-4
// train on the desk-scale dataset and take about twelve minutes on one core.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <map>
#include <random>
#include <set>
#include <string>

#include "../oracles.hpp"
#include "CLI11.hpp"
#include "ngs/backsearch.hpp"
#include "ngs/harness.hpp"
#include "ngs/kernels.hpp"
#include "ngs/learning.hpp"
#include "ngs/posterior.hpp"

using namespace ngs;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

namespace {

// Tolerances, pinned.
constexpr double kParserLogTol = 1e-9;
constexpr double kParserSeconds = 60.0;
constexpr int kBacksearchCases = 500;
constexpr double kStationarityTv = 0.05;
constexpr int kChainSteps = 100000;
constexpr int kChainBurnIn = 1000;
constexpr double kKlTol = 1e-9;
constexpr double kKlFirstOrderRel = 0.10;
constexpr double kGradRelTol = 1e-4;
constexpr double kGradRelFloor = 1e-6;  // denominator floor in the relative error
constexpr double kFdStep = 1e-5;
constexpr int kEstimatorSamples = 10000;
constexpr double kEstimatorSe = 3.0;

constexpr double kMbsCalcMin = 0.90;
constexpr double kRlCalcMax = 0.30;
constexpr double kGapMin = 0.5;
constexpr double kMbsSymMin = 0.95;
constexpr double kQuarterDataRatio = 0.75;
constexpr double kStepsThreshold = 0.8;
constexpr double kStepsRatio = 1.2;

constexpr int kIterations = 15000;
constexpr int kBatch = 64;
constexpr int kEvalEvery = 100;

const CnfGrammar& arithmetic() {
  static const CnfGrammar cnf = binarize(load_arithmetic_grammar());
  return cnf;
}

int failures = 0;

void report(int n, const std::string& name, bool pass, const std::string& detail) {
  std::printf("criterion %2d %-34s %s  %s\n", n, name.c_str(), pass ? "PASS" : "FAIL", detail.c_str());
  std::fflush(stdout);
  failures += !pass;
}

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

double seconds_since(Clock::time_point t) { return std::chrono::duration<double>(Clock::now() - t).count(); }

void parser_oracle() {
  const auto start = Clock::now();
  std::mt19937_64 rng(5);
  int mismatches = 0;
  double worst = 0.0;
  for (int len : {1, 3, 5}) {
    for (int t = 0; t < 100; ++t) {
      const ProbMatrix pm = oracle::random_pm(len, rng, 0.5);
      const auto got = viterbi_parse(arithmetic(), pm);
      const auto want = oracle::brute_argmax(pm);
      if (!got || got->string != want.z) {
        ++mismatches;
        continue;
      }
      worst = std::max(worst, std::abs(got->log_score - want.log_score));
    }
  }
  const double secs = seconds_since(start);
  report(5, "parser oracle", mismatches == 0 && worst <= kParserLogTol && secs <= kParserSeconds,
         fmt("300 matrices, %d argmax mismatches, max |dlog| %.2e, %.1f s", mismatches, worst, secs));
}

void backsearch_oracle() {
  std::mt19937_64 rng(6);
  int unsound = 0, incomplete = 0, suboptimal = 0, found = 0, total = 0;
  for (int len : {3, 5, 7}) {
    int done = 0;
    for (int attempt = 0; done < kBacksearchCases; ++attempt) {
      const ProbMatrix pm = oracle::random_pm(len, rng, 0.5);
      const SymbolString z = oracle::random_valid(len, rng);
      const auto current = oracle::shunting_yard(z);
      if (!current) continue;
      Value y;
      if (attempt % 2 == 0) {
        SymbolString other = z;
        const auto pos = std::uniform_int_distribution<std::size_t>(0, z.size() - 1)(rng);
        other[pos] = oracle::random_valid(len, rng)[pos];
        const auto v = oracle::shunting_yard(other);
        if (!v) continue;
        y = *v;
      } else {
        y = std::uniform_int_distribution<int>(-30, 90)(rng);
      }
      if (y == *current) continue;
      ++done;
      const auto fix = one_step_backsearch(*reason(arithmetic(), z), y, pm, arithmetic());
      const auto fixes = oracle::one_edit_fixes(z, y);
      incomplete += fix.has_value() == fixes.empty();
      if (!fix) continue;
      ++found;
      if (hamming_distance(*fix, z) != 1 || oracle::shunting_yard(*fix) != y) ++unsound;
      double best = 0.0;
      for (const auto& f : fixes) best = std::max(best, oracle::leaf_priority(pm, z, f));
      suboptimal += oracle::leaf_priority(pm, z, *fix) < best * (1 - 1e-12);
    }
    total += done;
  }
  report(6, "1-BS sound/complete/optimal", unsound + incomplete + suboptimal == 0,
         fmt("%d cases (%d with a fix): %d unsound, %d incomplete, %d suboptimal", total, found, unsound, incomplete,
             suboptimal));
}

void sampler_stationarity() {
  std::mt19937_64 rng(7);
  const ProbMatrix pm = oracle::random_pm(3, rng, 1.0);
  std::map<SymbolString, double> target;
  double norm = 0.0;
  for (const auto& z : oracle::all_valid(3)) norm += (target[z] = std::exp(pm.log_prob(z)));
  const MbsConfig cfg{1, 0.0, 1.0};
  Rng chain = stream_rng(7, {1});
  SymbolString z = parse_symbols("1+1");
  std::map<SymbolString, int> visits;
  for (int k = 0; k < kChainBurnIn + kChainSteps; ++k) {
    z = multi_step_backsearch(z, Value(0), pm, cfg, arithmetic(), chain);
    if (k >= kChainBurnIn) ++visits[z];
  }
  double tv = 0.0;
  for (const auto& [s, p] : target) tv += std::abs(p / norm - (visits.count(s) ? visits[s] : 0) / double(kChainSteps));
  tv /= 2;
  report(7, "sampler stationarity (lambda=0)", tv <= kStationarityTv,
         fmt("TV %.4f over %zu strings after %d steps (limit %.2f)", tv, target.size(), kChainSteps, kStationarityTv));
}

// Instances are what the learner sees: a randomly initialised perception
// model applied to a length-3 training example, with that example's answer.
void kl_closed_form(const Dataset& data) {
  std::vector<const Example*> threes;
  for (const auto& e : data.train) {
    if (e.length() == 3) threes.push_back(&e);
  }
  double worst_abs = 0.0, worst_rel = 0.0, min_c = 1.0;
  int small_c = 0;  // instances where eps/C > 0.1 and the first-order term is a poor guide
  for (int instances = 0; instances < 50; ++instances) {
    const Example& ex = *threes[static_cast<std::size_t>(instances * 7) % threes.size()];
    const auto model = PerceptionModel::random({Architecture::Linear, data.spec.feature_dim, 0},
                                               static_cast<std::uint64_t>(800 + instances), 1.0);
    const ProbMatrix pm = model.forward(ex.features());
    const Value& y = ex.answer();
    const double c = exact_posterior(arithmetic(), pm, y).mass;
    min_c = std::min(min_c, c);
    small_c += 1e-5 / c > 0.1;
    for (double eps : {1e-3, 1e-4, 1e-5}) {
      const KlResult r = kl_smoothed(arithmetic(), pm, y, eps);
      worst_abs = std::max(worst_abs, std::abs(r.kl - r.closed_form));
      if (eps == 1e-5) {
        const double first = 1.0 / c - 1.0;
        worst_rel = std::max(worst_rel, std::abs(r.kl / eps - first) / first);
      }
    }
  }
  report(8, "smoothed-posterior KL closed form", worst_abs <= kKlTol && worst_rel <= kKlFirstOrderRel,
         fmt("50 instances, max |kl - closed| %.2e, max first-order rel. err %.4f (min C %.2e, %d with eps/C > 0.1)",
             worst_abs, worst_rel, min_c, small_c));
}

void gradient_check() {
  std::mt19937_64 rng(9);
  std::normal_distribution<double> n(0.0, 1.0);
  double worst = 0.0;
  for (int t = 0; t < 20; ++t) {
    const int len = 1 + 2 * (t % 4);
    const ModelShape shape = t % 2 ? ModelShape{Architecture::Mlp, 16, 16} : ModelShape{Architecture::Linear, 16, 0};
    auto m = PerceptionModel::random(shape, static_cast<std::uint64_t>(100 + t), 0.5);
    std::vector<double> data(static_cast<std::size_t>(len * 16));
    for (double& v : data) v = n(rng);
    const FeatureSeq x(16, data);
    const SymbolString z = oracle::random_valid(len, rng);
    const Gradient g = m.nll_gradient(x, z);
    auto p = m.mutable_params();
    for (std::size_t k = 0; k < p.size(); ++k) {
      const double keep = p[k];
      p[k] = keep + kFdStep;
      const double up = -m.forward(x).log_prob(z);
      p[k] = keep - kFdStep;
      const double down = -m.forward(x).log_prob(z);
      p[k] = keep;
      const double numeric = (up - down) / (2 * kFdStep);
      worst = std::max(worst, std::abs(g[k] - numeric) / std::max({std::abs(g[k]), std::abs(numeric), kGradRelFloor}));
    }
  }
  report(9, "gradient vs finite differences", worst <= kGradRelTol,
         fmt("20 pairs (linear and mlp), max relative error %.2e", worst));
}

void estimator_unbiasedness(const Dataset& data) {
  // A cold-start instance: untrained linear model, a noisy "3-3" from the train pool.
  const auto model = PerceptionModel::random({Architecture::Linear, 16, 0}, 10, 0.5);
  FeatureSeq x(16);
  const SymbolString truth = parse_symbols("3-3");
  std::mt19937_64 rng(10);
  std::map<Symbol, std::vector<const LabeledSymbol*>> by_label;
  for (const auto& s : data.symbols) by_label[s.label].push_back(&s);
  for (Symbol s : truth) {
    const auto& pool = by_label[s];
    x.push_back(pool[std::uniform_int_distribution<std::size_t>(0, pool.size() - 1)(rng)]->features);
  }
  const Value y(0);
  const ProbMatrix pm = model.forward(x);
  const std::size_t dim = model.params().size();

  // Enumerated gradient of the expected reward over all 14^3 strings.
  Gradient exact(dim, 0.0);
  for (const auto& z : oracle::all_strings(3)) {
    const auto v = execute(arithmetic(), z);
    if (!v || *v != y) continue;
    model.accumulate_nll_gradient(x, z, -std::exp(pm.log_prob(z)), exact);
  }

  Rng sampler = stream_rng(10, {2});
  std::vector<double> sum(dim, 0.0), sq(dim, 0.0);
  int rewarded = 0;
  for (int s = 0; s < kEstimatorSamples; ++s) {
    const SymbolString z = independent_sample(pm, sampler);
    const auto v = execute(arithmetic(), z);
    if (!v || *v != y) continue;  // r = 0 contributes an exact zero
    ++rewarded;
    const Gradient g = model.nll_gradient(x, z);
    for (std::size_t c = 0; c < dim; ++c) {
      sum[c] -= g[c];
      sq[c] += g[c] * g[c];
    }
  }
  int outside = 0;
  double worst = 0.0;
  for (std::size_t c = 0; c < dim; ++c) {
    const double mean = sum[c] / kEstimatorSamples;
    const double var = std::max(0.0, sq[c] / kEstimatorSamples - mean * mean) * kEstimatorSamples / (kEstimatorSamples - 1);
    const double se = std::sqrt(var / kEstimatorSamples);
    const double z = se > 0 ? std::abs(mean - exact[c]) / se : (mean == exact[c] ? 0.0 : INFINITY);
    worst = std::max(worst, z);
    outside += z > kEstimatorSe;
  }
  report(10, "REINFORCE estimator unbiasedness", outside == 0,
         fmt("%zu coordinates, %d outside %.0f SE (max %.2f SE), %d/%d samples rewarded", dim, outside, kEstimatorSe, worst,
             rewarded, kEstimatorSamples));
}

// Accuracy of the Bayes rule for the symbol classes (nearest prototype within
// the slot's category) pushed through the parser: an upper bound for any
// perception model on this test set.
EvalMetrics bayes_ceiling(const Dataset& data) {
  // With isotropic noise around one-hot prototypes the class posterior is
  // softmax(x_c / noise^2), which a linear model represents exactly.
  auto m = PerceptionModel::zeros({Architecture::Linear, data.spec.feature_dim, 0});
  auto p = m.mutable_params();
  const double inv_var = 1.0 / (data.spec.noise * data.spec.noise);
  for (int c = 0; c < kNumSymbols; ++c) p[static_cast<std::size_t>(c * data.spec.feature_dim + c)] = inv_var;
  return evaluate_model(m, data.test, arithmetic());
}

struct RunOutcome {
  RunReport report;
  TrainLog log;
};

RunOutcome train_run(const std::string& name, TrainConfig cfg, const Dataset& data, const fs::path& out) {
  cfg.iterations = kIterations;
  cfg.batch_size = kBatch;
  cfg.eval_every = kEvalEvery;
  cfg.record_time = true;
  const auto start = Clock::now();
  const RunSpec spec{name, cfg, out / "data"};
  RunOutcome r{run_experiment(spec, data, out / name), {}};
  TrainingState s = TrainingState::load(out / name / "checkpoint");
  r.log = s.log;
  std::printf("  run %-14s calc %.4f sym %.4f  (%.0f s)\n", name.c_str(), r.report.calc_acc, r.report.sym_acc,
              seconds_since(start));
  std::fflush(stdout);
  return r;
}

void training_criteria(const Dataset& data, const fs::path& out, const std::set<int>& only) {
  const auto want = [&](int c) { return only.empty() || only.count(c); };
  if (!want(1) && !want(2) && !want(3) && !want(4)) return;
  const EvalMetrics ceiling = bayes_ceiling(data);
  std::printf("  diagnostic: Bayes-rule perception on this test set gives calc %.4f sym %.4f\n", ceiling.calc_acc,
              ceiling.sym_acc);

  std::map<std::pair<Method, double>, RunOutcome> runs;
  const bool need_fractions = want(3);
  for (double f : {1.0, 0.75, 0.5, 0.25}) {
    if (f != 1.0 && !need_fractions) continue;
    for (Method m : {Method::NgsMbs, Method::NgsRl}) {
      if (f == 1.0 && !want(1) && !want(2) && !want(3) && !(want(4) && m == Method::NgsMbs)) continue;
      TrainConfig cfg;
      cfg.method = m;
      cfg.data_fraction = f;
      runs.emplace(std::pair{m, f}, train_run(fmt("%s-%03d", to_string(m).c_str(), int(f * 100)), cfg, data, out));
    }
  }
  const auto mbs = [&](double f) { return runs.at({Method::NgsMbs, f}).report; };
  const auto rl = [&](double f) { return runs.at({Method::NgsRl, f}).report; };

  if (want(1)) {
    const double a = mbs(1.0).calc_acc, b = rl(1.0).calc_acc;
    report(1, "method gap (calc accuracy)", a >= kMbsCalcMin && b <= kRlCalcMax && a - b >= kGapMin,
           fmt("ngs-mbs %.4f (>= %.2f), ngs-rl %.4f (<= %.2f), gap %.4f (>= %.1f); ceiling %.4f", a, kMbsCalcMin, b,
               kRlCalcMax, a - b, kGapMin, ceiling.calc_acc));
  }
  if (want(2)) {
    const double s = mbs(1.0).sym_acc;
    report(2, "symbol accuracy", s >= kMbsSymMin,
           fmt("ngs-mbs sym %.4f (>= %.2f); ceiling %.4f", s, kMbsSymMin, ceiling.sym_acc));
  }
  if (want(3)) {
    bool ordered = true;
    std::string cells;
    for (double f : {0.25, 0.5, 0.75, 1.0}) {
      ordered = ordered && mbs(f).calc_acc >= rl(f).calc_acc;
      cells += fmt("%.2f: %.3f/%.3f  ", f, mbs(f).calc_acc, rl(f).calc_acc);
    }
    const double ratio = mbs(0.25).calc_acc / std::max(mbs(1.0).calc_acc, 1e-12);
    report(3, "data efficiency", ordered && ratio >= kQuarterDataRatio,
           fmt("mbs/rl %s| quarter/full %.3f (>= %.2f)", cells.c_str(), ratio, kQuarterDataRatio));
  }
  if (want(4)) {
    TrainConfig one;
    one.mbs.steps = 1;
    const RunOutcome t1 = train_run("ngs-mbs-T1", one, data, out);
    const int it10 = runs.at({Method::NgsMbs, 1.0}).log.iterations_to(kStepsThreshold);
    const int it1 = t1.log.iterations_to(kStepsThreshold);
    bool pass = false;
    std::string detail;
    if (it10 < 0) {
      detail = fmt("T=10 never reached calc %.1f in %d iterations", kStepsThreshold, kIterations);
    } else if (it1 < 0) {
      pass = true;
      detail = fmt("T=10 reached %.1f at %d, T=1 never did", kStepsThreshold, it10);
    } else {
      pass = it10 <= kStepsRatio * it1;
      detail = fmt("iterations to %.1f: T=10 %d, T=1 %d (ratio %.3f, limit %.1f)", kStepsThreshold, it10, it1,
                   static_cast<double>(it10) / it1, kStepsRatio);
    }
    double peak10 = 0.0, peak1 = 0.0;
    for (const auto& r : runs.at({Method::NgsMbs, 1.0}).log.records) peak10 = std::max(peak10, r.calc_acc);
    for (const auto& r : t1.log.records) peak1 = std::max(peak1, r.calc_acc);
    report(4, "back-search steps", pass, detail + fmt("; peak calc T=10 %.4f, T=1 %.4f", peak10, peak1));
  }
}

void supplementary(const fs::path& out) {
  // Not a criterion: the same protocol where the perception ceiling leaves room for 0.90.
  DatasetSpec spec;
  spec.scale = 0.2;
  spec.noise = 0.2;
  const Dataset data = generate_dataset(spec);
  const EvalMetrics ceiling = bayes_ceiling(data);
  TrainConfig cfg;
  cfg.method = Method::NgsMbs;
  const RunOutcome r = train_run("sigma0.2-ngs-mbs", cfg, data, out);
  std::printf("  supplementary (not a criterion): noise 0.2, ngs-mbs calc %.4f sym %.4f; ceiling calc %.4f sym %.4f\n",
              r.report.calc_acc, r.report.sym_acc, ceiling.calc_acc, ceiling.sym_acc);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Acceptance criteria"};
  std::vector<int> only_list;
  fs::path out = fs::temp_directory_path() / "ngs_acceptance";
  bool no_supplementary = false;
  app.add_option("--only", only_list, "Criteria to run")->delimiter(',');
  app.add_option("--out", out, "Scratch directory for training runs");
  app.add_flag("--no-supplementary", no_supplementary, "Skip the noise-0.2 run");
  CLI11_PARSE(app, argc, argv);
  const std::set<int> only(only_list.begin(), only_list.end());
  const auto want = [&](int c) { return only.empty() || only.count(c); };

  fs::remove_all(out);
  fs::create_directories(out);
  const auto start = Clock::now();

  DatasetSpec desk;
  desk.scale = 0.2;
  desk.noise = 0.3;
  const Dataset data = generate_dataset(desk);
  write_dataset(data, out / "data");

  if (want(5)) parser_oracle();
  if (want(6)) backsearch_oracle();
  if (want(7)) sampler_stationarity();
  if (want(8)) kl_closed_form(data);
  if (want(9)) gradient_check();
  if (want(10)) estimator_unbiasedness(data);
  training_criteria(data, out, only);
  if (only.empty() && !no_supplementary) supplementary(out);

  std::printf("%d criteria failed, %.0f s total\n", failures, seconds_since(start));
  return failures == 0 ? 0 : 1;
}
