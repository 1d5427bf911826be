#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "xrisk/dxo/dataset.hpp"
#include "xrisk/dxo/loss.hpp"
#include "xrisk/dxo/scorer.hpp"
#include "xrisk/errors.hpp"
#include "xrisk/metrics.hpp"

namespace xrisk::dxo {

enum class Objective { pauc_kl, tpauc_kl };

inline const char* to_string(Objective o) { return o == Objective::pauc_kl ? "pauc_kl" : "tpauc_kl"; }

inline Objective objective_from_string(const std::string& s) {
  if (s == "pauc_kl" || s == "pauc") return Objective::pauc_kl;
  if (s == "tpauc_kl" || s == "tpauc") return Objective::tpauc_kl;
  throw ConfigError("unknown objective '" + s + "'");
}

struct DxoConfig {
  Objective objective = Objective::tpauc_kl;
  double lambda = 1.0;
  double lambda_prime = 1.0;
  double margin = 1.0;
  double learning_rate = 1e-5;
  std::size_t epochs = 5;
  std::size_t batch_size = 64;
  double sampling_rate = 0.5;
  double ma_gamma = 0.9;
  std::uint64_t seed = 0;
  XRiskParams eval_params{};  // bounds for the validation tpAUC in the history

  void validate() const {
    if (!(lambda > 0.0) || !std::isfinite(lambda)) throw ConfigError("lambda must be positive");
    if (!(lambda_prime > 0.0) || !std::isfinite(lambda_prime)) throw ConfigError("lambda' must be positive");
    if (!(margin > 0.0)) throw ConfigError("margin must be positive");
    if (!(learning_rate >= 0.0) || !std::isfinite(learning_rate)) throw ConfigError("learning rate must be >= 0");
    if (!(sampling_rate > 0.0 && sampling_rate < 1.0)) throw ConfigError("sampling rate must lie in (0, 1)");
    if (!(ma_gamma > 0.0 && ma_gamma <= 1.0)) throw ConfigError("moving-average gamma must lie in (0, 1]");
    eval_params.validate();
  }
};

// Objective value and its derivative with respect to every positive and
// negative score, so that the parameter gradient is
//   sum_i pos_coef[i] dh(x_i) + sum_j neg_coef[j] dh(x_j).
struct ScoreGradient {
  double value = 0.0;
  std::vector<double> pos_coef;
  std::vector<double> neg_coef;
};

// Per positive i: F_i = kl_dro({L_ij}_j, lambda), L_ij = sq_hinge(h_i - h_j).
// pauc_kl = mean_i F_i; tpauc_kl = kl_dro({F_i}_i, lambda'), which is the
// log-space form of lambda' log mean_i (mean_j exp(L_ij/lambda))^(lambda/lambda').
inline ScoreGradient pairwise_objective(std::span<const double> pos_scores, std::span<const double> neg_scores,
                                        const DxoConfig& cfg) {
  if (pos_scores.empty()) throw DegenerateSetError("positive");
  if (neg_scores.empty()) throw DegenerateSetError("negative");
  const std::size_t np = pos_scores.size();
  const std::size_t nn = neg_scores.size();

  std::vector<double> losses(nn), derivs(nn);
  auto fill_row = [&](std::size_t i) {
    for (std::size_t j = 0; j < nn; ++j) {
      const auto h = squared_hinge(cfg.margin, pos_scores[i] - neg_scores[j]);
      losses[j] = h.value;
      derivs[j] = h.derivative;
    }
  };

  std::vector<double> per_positive(np);
  for (std::size_t i = 0; i < np; ++i) {
    fill_row(i);
    per_positive[i] = kl_dro_aggregate(losses, cfg.lambda);
  }

  ScoreGradient out;
  std::vector<double> outer;
  if (cfg.objective == Objective::pauc_kl) {
    out.value = detail::mean(per_positive);
    outer.assign(np, 1.0 / static_cast<double>(np));
  } else {
    out.value = kl_dro_aggregate(per_positive, cfg.lambda_prime);
    outer = kl_dro_weights(per_positive, cfg.lambda_prime);
  }

  // Second pass recomputes each row rather than holding n+ x n- weights.
  out.pos_coef.assign(np, 0.0);
  out.neg_coef.assign(nn, 0.0);
  for (std::size_t i = 0; i < np; ++i) {
    if (outer[i] == 0.0) continue;
    fill_row(i);
    const auto p = kl_dro_weights(losses, cfg.lambda);
    for (std::size_t j = 0; j < nn; ++j) {
      const double g = outer[i] * p[j] * derivs[j];
      out.pos_coef[i] += g;
      out.neg_coef[j] -= g;
    }
  }
  return out;
}

struct ObjectiveEval {
  double value = 0.0;
  std::vector<double> gradient;
};

namespace detail {

struct ScoredSplit {
  std::vector<std::size_t> pos_idx, neg_idx;
  std::vector<double> pos_scores, neg_scores;
};

inline ScoredSplit score_split(const Scorer& scorer, const FeatureDataset& data, std::span<const std::size_t> pos_idx,
                               std::span<const std::size_t> neg_idx) {
  ScoredSplit s{{pos_idx.begin(), pos_idx.end()}, {neg_idx.begin(), neg_idx.end()}, {}, {}};
  s.pos_scores.reserve(pos_idx.size());
  s.neg_scores.reserve(neg_idx.size());
  for (auto i : pos_idx) s.pos_scores.push_back(scorer.score(data.samples[i].features));
  for (auto j : neg_idx) s.neg_scores.push_back(scorer.score(data.samples[j].features));
  return s;
}

inline std::vector<double> chain_to_params(const Scorer& scorer, const FeatureDataset& data, const ScoredSplit& split,
                                           const ScoreGradient& sg) {
  std::vector<double> grad(scorer.params().size(), 0.0);
  for (std::size_t i = 0; i < split.pos_idx.size(); ++i)
    scorer.accumulate_gradient(data.samples[split.pos_idx[i]].features, sg.pos_coef[i], grad);
  for (std::size_t j = 0; j < split.neg_idx.size(); ++j)
    scorer.accumulate_gradient(data.samples[split.neg_idx[j]].features, sg.neg_coef[j], grad);
  return grad;
}

}  // namespace detail

// Exact full-batch objective (selected by cfg.objective) and its gradient.
inline ObjectiveEval evaluate_objective(const Scorer& scorer, const FeatureDataset& data, const DxoConfig& cfg) {
  const auto pos = data.indices_of(Label::positive);
  const auto neg = data.indices_of(Label::negative);
  const auto split = detail::score_split(scorer, data, pos, neg);
  const auto sg = pairwise_objective(split.pos_scores, split.neg_scores, cfg);
  return {sg.value, detail::chain_to_params(scorer, data, split, sg)};
}

inline double pauc_objective(const Scorer& scorer, const FeatureDataset& data, DxoConfig cfg) {
  cfg.objective = Objective::pauc_kl;
  return evaluate_objective(scorer, data, cfg).value;
}

inline double tpauc_objective(const Scorer& scorer, const FeatureDataset& data, DxoConfig cfg) {
  cfg.objective = Objective::tpauc_kl;
  return evaluate_objective(scorer, data, cfg).value;
}

inline std::vector<double> objective_gradient(const Scorer& scorer, const FeatureDataset& data,
                                              const DxoConfig& cfg) {
  return evaluate_objective(scorer, data, cfg).gradient;
}

// Squared-hinge surrogate for one (positive, negative) pair.
inline double pairwise_surrogate(const Scorer& scorer, const FeatureSample& xi, const FeatureSample& xj,
                                 double margin) {
  if (xi.label != Label::positive || xj.label != Label::negative)
    throw ContractError("pairwise_surrogate expects (positive, negative), got (" + std::string(to_string(xi.label)) +
                        ", " + to_string(xj.label) + ")");
  return squared_hinge(margin, scorer.score(xi.features) - scorer.score(xj.features)).value;
}

}  // namespace xrisk::dxo
