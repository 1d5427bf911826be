#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <span>
#include <vector>

#include <nlohmann/json.hpp>

#include "xrisk/dxo/dataset.hpp"
#include "xrisk/dxo/loss.hpp"
#include "xrisk/dxo/objective.hpp"
#include "xrisk/dxo/sampler.hpp"
#include "xrisk/dxo/scorer.hpp"
#include "xrisk/errors.hpp"
#include "xrisk/metrics.hpp"

namespace xrisk::dxo {

enum class TrainMode { full_batch, mini_batch };

inline TrainMode train_mode_from_string(const std::string& s) {
  if (s == "full_batch" || s == "full") return TrainMode::full_batch;
  if (s == "mini_batch" || s == "mini") return TrainMode::mini_batch;
  throw ConfigError("unknown training mode '" + s + "'");
}

// One optimizer step. `objective` is the value the step descended (full
// objective in full-batch mode, batch objective in mini-batch mode) at the
// parameters before the update; `val_tpauc` is measured after the update.
struct HistoryEntry {
  std::size_t epoch = 0;
  std::size_t step = 0;
  double objective = 0.0;
  double val_tpauc = 0.0;

  friend bool operator==(const HistoryEntry&, const HistoryEntry&) = default;
};

struct TrainResult {
  Scorer scorer;
  std::vector<HistoryEntry> history;
  std::uint64_t seed = 0;
  double final_objective = 0.0;  // full objective on the training data after the last step
};

inline double scorer_tpauc(const Scorer& scorer, const FeatureDataset& data, const XRiskParams& params) {
  ScoreSet set;
  for (const auto& s : data.samples)
    (s.label == Label::positive ? set.positives : set.negatives).push_back({s.id, scorer.score(s.features)});
  return two_way_partial_auc(set, params);
}

namespace detail {

inline double log_mean_exp(std::span<const double> z) {
  const double hi = *std::max_element(z.begin(), z.end());
  double s = 0.0;
  for (double v : z) s += std::exp(v - hi);
  return hi + std::log(s / static_cast<double>(z.size()));
}

inline double log_add_exp(double a, double b) {
  const double hi = std::max(a, b);
  return hi + std::log(std::exp(a - hi) + std::exp(b - hi));
}

// log((1 - gamma) e^old + gamma e^fresh)
inline double log_moving_average(double log_old, double log_fresh, double gamma) {
  if (gamma >= 1.0) return log_fresh;
  return log_add_exp(std::log1p(-gamma) + log_old, std::log(gamma) + log_fresh);
}

inline bool all_finite(std::span<const double> xs) {
  return std::all_of(xs.begin(), xs.end(), [](double x) { return std::isfinite(x); });
}

inline void descend(Scorer& scorer, std::span<const double> grad, double lr) {
  auto p = scorer.params();
  for (std::size_t k = 0; k < p.size(); ++k) p[k] -= lr * grad[k];
}

// Stochastic estimator state: one moving average of the inner aggregate
// (1/n-) sum_j exp(L_ij / lambda) per positive, plus for tpauc_kl a moving
// average of the outer aggregate (1/n+) sum_i u_i^(lambda/lambda'). Both are
// kept in log space.
class MovingAverageEstimator {
 public:
  MovingAverageEstimator(std::size_t n_samples, const DxoConfig& cfg)
      : cfg_(cfg), log_u_(n_samples, std::numeric_limits<double>::quiet_NaN()) {}

  // Returns the batch objective and d(estimated objective)/d(scores).
  ScoreGradient step(std::span<const std::size_t> pos_idx, std::span<const double> pos_scores,
                     std::span<const double> neg_scores) {
    const std::size_t bp = pos_scores.size();
    const std::size_t bn = neg_scores.size();
    const double lambda = cfg_.lambda;

    ScoreGradient out;
    out.value = pairwise_objective(pos_scores, neg_scores, cfg_).value;
    out.pos_coef.assign(bp, 0.0);
    out.neg_coef.assign(bn, 0.0);

    std::vector<std::vector<double>> scaled(bp, std::vector<double>(bn));
    std::vector<std::vector<double>> derivs(bp, std::vector<double>(bn));
    std::vector<double> log_u(bp);
    for (std::size_t k = 0; k < bp; ++k) {
      for (std::size_t j = 0; j < bn; ++j) {
        const auto h = squared_hinge(cfg_.margin, pos_scores[k] - neg_scores[j]);
        scaled[k][j] = h.value / lambda;
        derivs[k][j] = h.derivative;
      }
      double& state = log_u_[pos_idx[k]];
      const double fresh = log_mean_exp(scaled[k]);
      state = std::isnan(state) ? fresh : log_moving_average(state, fresh, cfg_.ma_gamma);
      log_u[k] = state;
    }

    std::vector<double> outer(bp, 1.0 / static_cast<double>(bp));
    if (cfg_.objective == Objective::tpauc_kl) {
      const double ratio = lambda / cfg_.lambda_prime;
      std::vector<double> g(bp);
      for (std::size_t k = 0; k < bp; ++k) g[k] = ratio * log_u[k];
      const double fresh = log_mean_exp(g);
      log_v_ = std::isnan(log_v_) ? fresh : log_moving_average(log_v_, fresh, cfg_.ma_gamma);
      for (std::size_t k = 0; k < bp; ++k) outer[k] = std::exp(g[k] - log_v_) / static_cast<double>(bp);
    }

    for (std::size_t k = 0; k < bp; ++k) {
      for (std::size_t j = 0; j < bn; ++j) {
        const double w = std::exp(scaled[k][j] - log_u[k]) / static_cast<double>(bn);
        const double c = outer[k] * w * derivs[k][j];
        out.pos_coef[k] += c;
        out.neg_coef[j] -= c;
      }
    }
    return out;
  }

 private:
  DxoConfig cfg_;
  std::vector<double> log_u_;
  double log_v_ = std::numeric_limits<double>::quiet_NaN();
};

}  // namespace detail

// Trains `init` (zero linear scorer when absent) by gradient descent on the
// configured objective. The validation tpAUC in the history uses
// `validation` when given, the training data otherwise.
inline TrainResult train(const FeatureDataset& data, const DxoConfig& cfg, TrainMode mode,
                         std::optional<Scorer> init = std::nullopt, const FeatureDataset* validation = nullptr) {
  cfg.validate();
  data.validate();
  if (validation) validation->validate();
  Scorer scorer = init ? std::move(*init) : Scorer::linear(data.dim);
  if (scorer.dim() != data.dim) throw ContractError("initial scorer dimension does not match the data");
  const FeatureDataset& val = validation ? *validation : data;

  TrainResult result{scorer, {}, cfg.seed, 0.0};
  if (mode == TrainMode::full_batch) {
    result.history.reserve(cfg.epochs);
    for (std::size_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
      const auto eval = evaluate_objective(scorer, data, cfg);
      if (!std::isfinite(eval.value) || !detail::all_finite(eval.gradient)) throw DivergenceError(epoch);
      detail::descend(scorer, eval.gradient, cfg.learning_rate);
      if (!detail::all_finite(scorer.params())) throw DivergenceError(epoch);
      result.history.push_back({epoch, epoch, eval.value, scorer_tpauc(scorer, val, cfg.eval_params)});
    }
  } else {
    ControlledSampler sampler(data, cfg.batch_size, cfg.sampling_rate, cfg.seed);
    detail::MovingAverageEstimator estimator(data.samples.size(), cfg);
    std::size_t step = 0;
    for (std::size_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
      for (const auto& batch : sampler.epoch()) {
        ++step;
        const auto split = detail::score_split(scorer, data, batch.positives, batch.negatives);
        const auto sg = estimator.step(batch.positives, split.pos_scores, split.neg_scores);
        const auto grad = detail::chain_to_params(scorer, data, split, sg);
        if (!std::isfinite(sg.value) || !detail::all_finite(grad)) throw DivergenceError(epoch);
        detail::descend(scorer, grad, cfg.learning_rate);
        if (!detail::all_finite(scorer.params())) throw DivergenceError(epoch);
        result.history.push_back({epoch, step, sg.value, scorer_tpauc(scorer, val, cfg.eval_params)});
      }
    }
  }
  result.final_objective = evaluate_objective(scorer, data, cfg).value;
  result.scorer = std::move(scorer);
  return result;
}

inline nlohmann::ordered_json to_json(const Scorer& s) {
  nlohmann::ordered_json j;
  j["kind"] = to_string(s.kind());
  j["dim"] = s.dim();
  j["hidden"] = s.hidden();
  j["params"] = std::vector<double>(s.params().begin(), s.params().end());
  return j;
}

inline Scorer scorer_from_json(const nlohmann::json& j) {
  try {
    return Scorer::from_params(scorer_kind_from_string(j.at("kind").get<std::string>()), j.at("dim").get<std::size_t>(),
                               j.value("hidden", std::size_t{0}), j.at("params").get<std::vector<double>>());
  } catch (const nlohmann::json::exception& e) {
    throw ValueError(std::string("malformed scorer: ") + e.what());
  }
}

inline nlohmann::ordered_json to_json(const TrainResult& r) {
  auto j = to_json(r.scorer);
  nlohmann::ordered_json hist = nlohmann::ordered_json::array();
  for (const auto& h : r.history)
    hist.push_back({{"epoch", h.epoch}, {"step", h.step}, {"objective", h.objective}, {"val_tpauc", h.val_tpauc}});
  j["history"] = std::move(hist);
  j["seed"] = r.seed;
  j["final_objective"] = r.final_objective;
  return j;
}

}  // namespace xrisk::dxo
