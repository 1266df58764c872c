#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "ngs/parsing.hpp"

namespace ngs {

/// l feature vectors of equal dimension, one per pre-segmented symbol slot.
class FeatureSeq {
 public:
  explicit FeatureSeq(int dim) : dim_(dim) {}
  /// Throws std::invalid_argument if data.size() is not a multiple of dim.
  FeatureSeq(int dim, std::vector<double> data);

  void push_back(std::span<const double> v);

  int length() const { return dim_ == 0 ? 0 : static_cast<int>(data_.size()) / dim_; }
  int dim() const { return dim_; }
  std::span<const double> row(int i) const {
    return {data_.data() + static_cast<std::size_t>(i) * static_cast<std::size_t>(dim_), static_cast<std::size_t>(dim_)};
  }
  const std::vector<double>& data() const { return data_; }

  friend bool operator==(const FeatureSeq&, const FeatureSeq&) = default;

 private:
  int dim_;
  std::vector<double> data_;
};

enum class Architecture { Linear, Mlp };

std::string to_string(Architecture a);
/// "linear" or "mlp"; throws std::invalid_argument otherwise.
Architecture parse_architecture(std::string_view s);

struct ModelShape {
  Architecture arch = Architecture::Linear;
  int input_dim = 16;
  int hidden = 0;  // units of the tanh hidden layer; Mlp only

  std::size_t num_params() const;
  friend bool operator==(const ModelShape&, const ModelShape&) = default;
};

using Gradient = std::vector<double>;

struct AdamConfig {
  double learning_rate = 5e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;

  friend bool operator==(const AdamConfig&, const AdamConfig&) = default;
};

/// Softmax classifier over the 14 symbols, scoring every position
/// independently. Scores are clamped to [-kScoreClamp, kScoreClamp] before the
/// softmax so no probability is ever exactly zero.
class PerceptionModel {
 public:
  static constexpr double kScoreClamp = 50.0;

  static PerceptionModel zeros(ModelShape shape, AdamConfig adam = {});
  /// Gaussian init with standard deviation `init_scale` (biases start at 0).
  static PerceptionModel random(ModelShape shape, std::uint64_t seed, double init_scale = 0.1,
                                AdamConfig adam = {});

  const ModelShape& shape() const { return shape_; }
  std::span<const double> params() const { return params_; }
  std::span<double> mutable_params() { return params_; }
  const AdamConfig& adam() const { return adam_; }
  void set_learning_rate(double lr) { adam_.learning_rate = lr; }
  long optimizer_steps() const { return step_; }

  /// Throws std::invalid_argument on a feature-dimension mismatch.
  ProbMatrix forward(const FeatureSeq& x) const;
  SymbolRow forward_row(std::span<const double> x) const;

  /// Gradient of -log p(z|x) = -sum_i log p(z_i|x_i) with respect to params().
  Gradient nll_gradient(const FeatureSeq& x, std::span<const Symbol> z) const;
  /// Accumulates weight * nll_gradient(x, z) into `out`.
  void accumulate_nll_gradient(const FeatureSeq& x, std::span<const Symbol> z, double weight,
                               std::span<double> out) const;

  /// One Adam step on `scale * gradient` (descent).
  void apply_update(std::span<const double> gradient, double scale = 1.0);

  /// Versioned text checkpoint; doubles are written as hex floats so a
  /// save/load round trip is exact, optimizer state included.
  void save(std::ostream& os) const;
  static PerceptionModel load(std::istream& is);
  void save_file(const std::filesystem::path& path) const;
  static PerceptionModel load_file(const std::filesystem::path& path);

  friend bool operator==(const PerceptionModel&, const PerceptionModel&) = default;

 private:
  PerceptionModel(ModelShape shape, AdamConfig adam);
  void scores(std::span<const double> x, std::span<double> hidden, std::span<double> out) const;

  ModelShape shape_;
  AdamConfig adam_;
  std::vector<double> params_;
  std::vector<double> moment1_;
  std::vector<double> moment2_;
  long step_ = 0;
};

}  // namespace ngs
