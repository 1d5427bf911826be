#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <vector>

#include "xrisk/errors.hpp"

namespace xrisk::dxo {

struct HingeValue {
  double value = 0.0;
  double derivative = 0.0;
};

// max(0, c - x)^2 and its derivative in x.
inline HingeValue squared_hinge(double margin, double x) {
  const double gap = std::max(0.0, margin - x);
  return {gap * gap, -2.0 * gap};
}

namespace detail {

inline double mean(std::span<const double> xs) {
  double s = 0.0;
  for (double x : xs) s += x;
  return s / static_cast<double>(xs.size());
}

// log((1/n) sum exp(z_i)) for z_i <= 0 with max(z) == 0, accurate when all
// z_i are tiny (large temperature).
inline double log_mean_exp_shifted(std::span<const double> z) {
  double s = 0.0;
  for (double v : z) s += std::expm1(v);
  return std::log1p(s / static_cast<double>(z.size()));
}

}  // namespace detail

// KL-regularized worst-case average of `losses`:
//   lambda * log( (1/n) sum_i exp(loss_i / lambda) )
// Equals the mean as lambda -> inf and the max as lambda -> 0; the result is
// clamped to [mean, max], which bounds the exact value.
inline double kl_dro_aggregate(std::span<const double> losses, double lambda) {
  if (losses.empty()) throw ContractError("kl_dro_aggregate: empty loss set");
  if (!(lambda > 0.0)) throw ContractError("kl_dro_aggregate: lambda must be positive");
  const double hi = *std::max_element(losses.begin(), losses.end());
  const double lo_bound = detail::mean(losses);
  std::vector<double> z(losses.size());
  for (std::size_t i = 0; i < losses.size(); ++i) z[i] = (losses[i] - hi) / lambda;
  const double value = hi + lambda * detail::log_mean_exp_shifted(z);
  return std::clamp(value, std::min(lo_bound, hi), hi);
}

// Softmax weights exp(loss_i / lambda) / sum_k exp(loss_k / lambda): the
// optimal distribution of the KL-regularized inner maximization.
inline std::vector<double> kl_dro_weights(std::span<const double> losses, double lambda) {
  const double hi = *std::max_element(losses.begin(), losses.end());
  std::vector<double> w(losses.size());
  double s = 0.0;
  for (std::size_t i = 0; i < losses.size(); ++i) s += w[i] = std::exp((losses[i] - hi) / lambda);
  for (double& x : w) x /= s;
  return w;
}

}  // namespace xrisk::dxo
