#include "ngs/perception.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <istream>
#include <ostream>
#include <random>
#include <sstream>
#include <stdexcept>

namespace ngs {

FeatureSeq::FeatureSeq(int dim, std::vector<double> data) : dim_(dim), data_(std::move(data)) {
  if (dim_ <= 0 || data_.size() % static_cast<std::size_t>(dim_) != 0) {
    throw std::invalid_argument("FeatureSeq: data size is not a multiple of dim");
  }
}

void FeatureSeq::push_back(std::span<const double> v) {
  if (static_cast<int>(v.size()) != dim_) throw std::invalid_argument("FeatureSeq: dimension mismatch");
  data_.insert(data_.end(), v.begin(), v.end());
}

std::string to_string(Architecture a) { return a == Architecture::Linear ? "linear" : "mlp"; }

Architecture parse_architecture(std::string_view s) {
  if (s == "linear") return Architecture::Linear;
  if (s == "mlp") return Architecture::Mlp;
  throw std::invalid_argument("unknown architecture '" + std::string(s) + "'");
}

std::size_t ModelShape::num_params() const {
  const auto d = static_cast<std::size_t>(input_dim);
  const auto h = static_cast<std::size_t>(hidden);
  constexpr auto k = static_cast<std::size_t>(kNumSymbols);
  if (arch == Architecture::Linear) return k * d + k;
  return h * d + h + k * h + k;
}

PerceptionModel::PerceptionModel(ModelShape shape, AdamConfig adam)
    : shape_(shape), adam_(adam), params_(shape.num_params(), 0.0),
      moment1_(params_.size(), 0.0), moment2_(params_.size(), 0.0) {
  if (shape_.input_dim <= 0) throw std::invalid_argument("model: input_dim must be positive");
  if (shape_.arch == Architecture::Mlp && shape_.hidden <= 0) {
    throw std::invalid_argument("model: mlp needs hidden > 0");
  }
}

PerceptionModel PerceptionModel::zeros(ModelShape shape, AdamConfig adam) { return {shape, adam}; }

PerceptionModel PerceptionModel::random(ModelShape shape, std::uint64_t seed, double init_scale,
                                        AdamConfig adam) {
  PerceptionModel m(shape, adam);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, init_scale);
  const auto d = static_cast<std::size_t>(shape.input_dim);
  const auto h = static_cast<std::size_t>(shape.hidden);
  constexpr auto k = static_cast<std::size_t>(kNumSymbols);
  if (shape.arch == Architecture::Linear) {
    for (std::size_t i = 0; i < k * d; ++i) m.params_[i] = normal(rng);
  } else {
    for (std::size_t i = 0; i < h * d; ++i) m.params_[i] = normal(rng);
    const std::size_t w2 = h * d + h;
    for (std::size_t i = 0; i < k * h; ++i) m.params_[w2 + i] = normal(rng);
  }
  return m;
}

void PerceptionModel::scores(std::span<const double> x, std::span<double> hidden,
                             std::span<double> out) const {
  const auto d = static_cast<std::size_t>(shape_.input_dim);
  constexpr auto k = static_cast<std::size_t>(kNumSymbols);
  const double* p = params_.data();
  std::span<const double> input = x;
  std::size_t in_dim = d;
  if (shape_.arch == Architecture::Mlp) {
    const auto h = static_cast<std::size_t>(shape_.hidden);
    const double* w1 = p;
    const double* b1 = p + h * d;
    for (std::size_t j = 0; j < h; ++j) {
      double a = b1[j];
      for (std::size_t c = 0; c < d; ++c) a += w1[j * d + c] * x[c];
      hidden[j] = std::tanh(a);
    }
    p += h * d + h;
    input = hidden;
    in_dim = h;
  }
  const double* w = p;
  const double* b = p + k * in_dim;
  for (std::size_t s = 0; s < k; ++s) {
    double a = b[s];
    for (std::size_t c = 0; c < in_dim; ++c) a += w[s * in_dim + c] * input[c];
    out[s] = a;
  }
}

namespace {

SymbolRow softmax_clamped(std::span<const double> raw) {
  SymbolRow row;
  double max_score = -PerceptionModel::kScoreClamp;
  for (std::size_t s = 0; s < row.size(); ++s) {
    row[s] = std::clamp(raw[s], -PerceptionModel::kScoreClamp, PerceptionModel::kScoreClamp);
    max_score = std::max(max_score, row[s]);
  }
  double total = 0.0;
  for (double& v : row) {
    v = std::exp(v - max_score);
    total += v;
  }
  for (double& v : row) v /= total;
  return row;
}

}  // namespace

SymbolRow PerceptionModel::forward_row(std::span<const double> x) const {
  if (static_cast<int>(x.size()) != shape_.input_dim) throw std::invalid_argument("forward: feature dimension mismatch");
  std::vector<double> hidden(static_cast<std::size_t>(shape_.hidden));
  std::array<double, kNumSymbols> raw{};
  scores(x, hidden, raw);
  return softmax_clamped(raw);
}

ProbMatrix PerceptionModel::forward(const FeatureSeq& x) const {
  if (x.dim() != shape_.input_dim) throw std::invalid_argument("forward: feature dimension mismatch");
  if (x.length() < 1) throw std::invalid_argument("forward: empty feature sequence");
  std::vector<SymbolRow> rows(static_cast<std::size_t>(x.length()));
  for (int i = 0; i < x.length(); ++i) rows[static_cast<std::size_t>(i)] = forward_row(x.row(i));
  return ProbMatrix(std::move(rows));
}

void PerceptionModel::accumulate_nll_gradient(const FeatureSeq& x, std::span<const Symbol> z,
                                              double weight, std::span<double> out) const {
  if (x.dim() != shape_.input_dim) throw std::invalid_argument("nll_gradient: feature dimension mismatch");
  if (static_cast<int>(z.size()) != x.length()) throw std::invalid_argument("nll_gradient: |z| != l");
  if (out.size() != params_.size()) throw std::invalid_argument("nll_gradient: gradient size mismatch");
  const auto d = static_cast<std::size_t>(shape_.input_dim);
  const auto h = static_cast<std::size_t>(shape_.hidden);
  constexpr auto k = static_cast<std::size_t>(kNumSymbols);
  std::vector<double> hidden(h);
  std::vector<double> dhidden(h);
  std::array<double, kNumSymbols> raw{};
  std::array<double, kNumSymbols> dscore{};

  for (int i = 0; i < x.length(); ++i) {
    const auto xi = x.row(i);
    scores(xi, hidden, raw);
    const SymbolRow p = softmax_clamped(raw);
    for (std::size_t s = 0; s < k; ++s) {
      const bool clamped = raw[s] > kScoreClamp || raw[s] < -kScoreClamp;
      const double target = s == static_cast<std::size_t>(id(z[static_cast<std::size_t>(i)])) ? 1.0 : 0.0;
      dscore[s] = clamped ? 0.0 : weight * (p[s] - target);
    }
    if (shape_.arch == Architecture::Linear) {
      double* gw = out.data();
      double* gb = out.data() + k * d;
      for (std::size_t s = 0; s < k; ++s) {
        for (std::size_t c = 0; c < d; ++c) gw[s * d + c] += dscore[s] * xi[c];
        gb[s] += dscore[s];
      }
      continue;
    }
    double* gw1 = out.data();
    double* gb1 = gw1 + h * d;
    double* gw2 = gb1 + h;
    double* gb2 = gw2 + k * h;
    const double* w2 = params_.data() + h * d + h;
    std::fill(dhidden.begin(), dhidden.end(), 0.0);
    for (std::size_t s = 0; s < k; ++s) {
      for (std::size_t j = 0; j < h; ++j) {
        gw2[s * h + j] += dscore[s] * hidden[j];
        dhidden[j] += w2[s * h + j] * dscore[s];
      }
      gb2[s] += dscore[s];
    }
    for (std::size_t j = 0; j < h; ++j) {
      const double da = dhidden[j] * (1.0 - hidden[j] * hidden[j]);
      for (std::size_t c = 0; c < d; ++c) gw1[j * d + c] += da * xi[c];
      gb1[j] += da;
    }
  }
}

Gradient PerceptionModel::nll_gradient(const FeatureSeq& x, std::span<const Symbol> z) const {
  Gradient g(params_.size(), 0.0);
  accumulate_nll_gradient(x, z, 1.0, g);
  return g;
}

void PerceptionModel::apply_update(std::span<const double> gradient, double scale) {
  if (gradient.size() != params_.size()) throw std::invalid_argument("apply_update: gradient size mismatch");
  ++step_;
  const double bias1 = 1.0 - std::pow(adam_.beta1, static_cast<double>(step_));
  const double bias2 = 1.0 - std::pow(adam_.beta2, static_cast<double>(step_));
  for (std::size_t i = 0; i < params_.size(); ++i) {
    const double g = scale * gradient[i];
    moment1_[i] = adam_.beta1 * moment1_[i] + (1.0 - adam_.beta1) * g;
    moment2_[i] = adam_.beta2 * moment2_[i] + (1.0 - adam_.beta2) * g * g;
    const double m_hat = moment1_[i] / bias1;
    const double v_hat = moment2_[i] / bias2;
    params_[i] -= adam_.learning_rate * m_hat / (std::sqrt(v_hat) + adam_.epsilon);
  }
}

namespace {

constexpr std::string_view kMagic = "ngs-perception";
constexpr int kVersion = 1;

void write_doubles(std::ostream& os, std::string_view tag, const std::vector<double>& values) {
  os << tag << ' ' << values.size() << '\n';
  for (double v : values) os << std::hexfloat << v << std::defaultfloat << '\n';
}

std::string expect_tag(std::istream& is, std::string_view tag) {
  std::string got;
  if (!(is >> got) || got != tag) {
    throw std::runtime_error("checkpoint: expected '" + std::string(tag) + "', got '" + got + "'");
  }
  std::string value;
  if (!(is >> value)) throw std::runtime_error("checkpoint: missing value for " + std::string(tag));
  return value;
}

double parse_double(const std::string& token) {
  char* end = nullptr;
  const double v = std::strtod(token.c_str(), &end);
  if (end != token.c_str() + token.size()) throw std::runtime_error("checkpoint: bad number " + token);
  return v;
}

std::vector<double> read_doubles(std::istream& is, std::string_view tag, std::size_t expected) {
  const auto n = static_cast<std::size_t>(std::stoull(expect_tag(is, tag)));
  if (n != expected) throw std::runtime_error("checkpoint: " + std::string(tag) + " has wrong size");
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    std::string token;
    if (!(is >> token)) throw std::runtime_error("checkpoint: truncated " + std::string(tag));
    out[i] = parse_double(token);
  }
  return out;
}

}  // namespace

void PerceptionModel::save(std::ostream& os) const {
  os << kMagic << ' ' << kVersion << '\n';
  os << "architecture " << to_string(shape_.arch) << '\n';
  os << "input_dim " << shape_.input_dim << '\n';
  os << "hidden " << shape_.hidden << '\n';
  os << "learning_rate " << std::hexfloat << adam_.learning_rate << '\n';
  os << "beta1 " << adam_.beta1 << '\n';
  os << "beta2 " << adam_.beta2 << '\n';
  os << "epsilon " << adam_.epsilon << std::defaultfloat << '\n';
  os << "step " << step_ << '\n';
  write_doubles(os, "params", params_);
  write_doubles(os, "moment1", moment1_);
  write_doubles(os, "moment2", moment2_);
}

PerceptionModel PerceptionModel::load(std::istream& is) {
  const std::string version = expect_tag(is, kMagic);
  if (std::stoi(version) != kVersion) throw std::runtime_error("checkpoint: unsupported version " + version);
  ModelShape shape;
  shape.arch = parse_architecture(expect_tag(is, "architecture"));
  shape.input_dim = std::stoi(expect_tag(is, "input_dim"));
  shape.hidden = std::stoi(expect_tag(is, "hidden"));
  AdamConfig adam;
  adam.learning_rate = parse_double(expect_tag(is, "learning_rate"));
  adam.beta1 = parse_double(expect_tag(is, "beta1"));
  adam.beta2 = parse_double(expect_tag(is, "beta2"));
  adam.epsilon = parse_double(expect_tag(is, "epsilon"));
  PerceptionModel m(shape, adam);
  m.step_ = std::stol(expect_tag(is, "step"));
  m.params_ = read_doubles(is, "params", m.params_.size());
  m.moment1_ = read_doubles(is, "moment1", m.params_.size());
  m.moment2_ = read_doubles(is, "moment2", m.params_.size());
  return m;
}

void PerceptionModel::save_file(const std::filesystem::path& path) const {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot write " + path.string());
  save(os);
}

PerceptionModel PerceptionModel::load_file(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot read " + path.string());
  return load(is);
}

}  // namespace ngs
