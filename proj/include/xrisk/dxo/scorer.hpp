#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "xrisk/errors.hpp"
#include "xrisk/random.hpp"

namespace xrisk::dxo {

enum class ScorerKind { linear, mlp1 };

inline const char* to_string(ScorerKind k) { return k == ScorerKind::linear ? "linear" : "mlp1"; }

inline ScorerKind scorer_kind_from_string(const std::string& s) {
  if (s == "linear") return ScorerKind::linear;
  if (s == "mlp1") return ScorerKind::mlp1;
  throw ConfigError("unknown scorer kind '" + s + "'");
}

// Real-valued scorer h(x) over fixed-dimension feature vectors.
//
// Parameters live in one flat vector so optimizers and gradient checks can
// treat both kinds uniformly:
//   linear: [w_0 .. w_{d-1}, b]
//   mlp1:   [W (hidden x d, row-major), b1 (hidden), v (hidden), c]
//           h(x) = v . tanh(W x + b1) + c
class Scorer {
 public:
  static Scorer linear(std::size_t dim) {
    return Scorer(ScorerKind::linear, dim, 0, std::vector<double>(dim + 1, 0.0));
  }

  // Hidden and output weights uniform in +-1/sqrt(fan_in); biases zero.
  static Scorer mlp1(std::size_t dim, std::size_t hidden, std::uint64_t seed) {
    if (hidden == 0) throw ConfigError("mlp1 needs at least one hidden unit");
    Scorer s(ScorerKind::mlp1, dim, hidden, std::vector<double>(param_count(ScorerKind::mlp1, dim, hidden), 0.0));
    Rng rng(seed);
    const double in_bound = 1.0 / std::sqrt(static_cast<double>(dim));
    const double out_bound = 1.0 / std::sqrt(static_cast<double>(hidden));
    for (std::size_t k = 0; k < hidden * dim; ++k) s.params_[k] = rng.uniform(-in_bound, in_bound);
    for (std::size_t k = 0; k < hidden; ++k) s.params_[hidden * dim + hidden + k] = rng.uniform(-out_bound, out_bound);
    return s;
  }

  static Scorer from_params(ScorerKind kind, std::size_t dim, std::size_t hidden, std::vector<double> params) {
    if (params.size() != param_count(kind, dim, hidden))
      throw ContractError("scorer expects " + std::to_string(param_count(kind, dim, hidden)) + " parameters, got " +
                          std::to_string(params.size()));
    for (double p : params)
      if (!std::isfinite(p)) throw ValueError("non-finite scorer parameter");
    return Scorer(kind, dim, hidden, std::move(params));
  }

  static std::size_t param_count(ScorerKind kind, std::size_t dim, std::size_t hidden) {
    return kind == ScorerKind::linear ? dim + 1 : hidden * dim + 2 * hidden + 1;
  }

  ScorerKind kind() const { return kind_; }
  std::size_t dim() const { return dim_; }
  std::size_t hidden() const { return hidden_; }
  std::span<const double> params() const { return params_; }
  std::span<double> params() { return params_; }

  double score(std::span<const double> x) const {
    check_dim(x);
    if (kind_ == ScorerKind::linear) {
      double h = params_[dim_];
      for (std::size_t l = 0; l < dim_; ++l) h += params_[l] * x[l];
      return h;
    }
    double h = params_.back();
    for (std::size_t k = 0; k < hidden_; ++k) h += out_w(k) * std::tanh(pre_activation(k, x));
    return h;
  }

  // grad += weight * dh(x)/dparams
  void accumulate_gradient(std::span<const double> x, double weight, std::span<double> grad) const {
    check_dim(x);
    if (weight == 0.0) return;
    if (kind_ == ScorerKind::linear) {
      for (std::size_t l = 0; l < dim_; ++l) grad[l] += weight * x[l];
      grad[dim_] += weight;
      return;
    }
    const std::size_t b1 = hidden_ * dim_;
    const std::size_t v = b1 + hidden_;
    for (std::size_t k = 0; k < hidden_; ++k) {
      const double a = std::tanh(pre_activation(k, x));
      const double back = weight * out_w(k) * (1.0 - a * a);
      for (std::size_t l = 0; l < dim_; ++l) grad[k * dim_ + l] += back * x[l];
      grad[b1 + k] += back;
      grad[v + k] += weight * a;
    }
    grad[params_.size() - 1] += weight;
  }

 private:
  Scorer(ScorerKind kind, std::size_t dim, std::size_t hidden, std::vector<double> params)
      : kind_(kind), dim_(dim), hidden_(hidden), params_(std::move(params)) {}

  void check_dim(std::span<const double> x) const {
    if (x.size() != dim_)
      throw ContractError("feature vector has dimension " + std::to_string(x.size()) + ", scorer expects " +
                          std::to_string(dim_));
  }

  double pre_activation(std::size_t k, std::span<const double> x) const {
    double z = params_[hidden_ * dim_ + k];
    for (std::size_t l = 0; l < dim_; ++l) z += params_[k * dim_ + l] * x[l];
    return z;
  }

  double out_w(std::size_t k) const { return params_[hidden_ * dim_ + hidden_ + k]; }

  ScorerKind kind_;
  std::size_t dim_;
  std::size_t hidden_;
  std::vector<double> params_;
};

}  // namespace xrisk::dxo
