#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "xrisk/core.hpp"
#include "xrisk/errors.hpp"
#include "xrisk/metrics.hpp"

namespace xrisk {

// Confusion counts for the rule score >= threshold. Rates are percentages.
struct ConfusionMetrics {
  double threshold = 0.0;
  double display_threshold = 0.0;
  std::size_t tp = 0, fp = 0, tn = 0, fn = 0;
  double fpr = 0.0;
  double tpr_recall = 0.0;
  double precision = 0.0;
  double macro_f1 = 0.0;

  friend bool operator==(const ConfusionMetrics&, const ConfusionMetrics&) = default;
};

enum class ThresholdMethod { fixed, tpr_at_fpr, recall_at_precision };

inline const char* to_string(ThresholdMethod m) {
  switch (m) {
    case ThresholdMethod::fixed: return "fixed";
    case ThresholdMethod::tpr_at_fpr: return "tpr_at_fpr";
    case ThresholdMethod::recall_at_precision: return "recall_at_precision";
  }
  return "fixed";
}

inline ThresholdMethod threshold_method_from_string(const std::string& s) {
  if (s == "fixed") return ThresholdMethod::fixed;
  if (s == "tpr_at_fpr") return ThresholdMethod::tpr_at_fpr;
  if (s == "recall_at_precision") return ThresholdMethod::recall_at_precision;
  throw ValueError("unknown threshold method '" + s + "'");
}

struct ThresholdChoice {
  ThresholdMethod method = ThresholdMethod::fixed;
  double target = 0.0;  // beta, p_r, or the fixed threshold itself
  double threshold = 0.0;
  ConfusionMetrics dev_metrics;
};

struct DeploymentRow {
  ThresholdMethod method = ThresholdMethod::fixed;
  double target = 0.0;
  double threshold = 0.0;
  ConfusionMetrics metrics;
};

namespace detail {

// Scores in [0, 1] are shown on a 0-100 scale; anything else is shown raw.
inline bool unit_interval_scores(const ScoreSet& set) {
  auto in_unit = [](const ScoredValue& v) { return v.score >= 0.0 && v.score <= 1.0; };
  return std::all_of(set.positives.begin(), set.positives.end(), in_unit) &&
         std::all_of(set.negatives.begin(), set.negatives.end(), in_unit);
}

// Percentage F1 of one class from its counts; 0 when undefined.
inline double f1_percent(std::size_t hits, std::size_t false_alarms, std::size_t misses) {
  const auto den = static_cast<double>(2 * hits + false_alarms + misses);
  if (hits == 0 || den == 0.0) return 0.0;
  return 100.0 * static_cast<double>(2 * hits) / den;
}

inline ConfusionMetrics confusion_from_counts(double threshold, bool rescale, std::size_t tp,
                                              std::size_t fp, std::size_t n_pos, std::size_t n_neg) {
  ConfusionMetrics m;
  m.threshold = threshold;
  m.display_threshold = rescale ? 100.0 * threshold : threshold;
  m.tp = tp;
  m.fp = fp;
  m.fn = n_pos - tp;
  m.tn = n_neg - fp;
  m.fpr = 100.0 * static_cast<double>(fp) / static_cast<double>(n_neg);
  m.tpr_recall = 100.0 * static_cast<double>(tp) / static_cast<double>(n_pos);
  m.precision = tp + fp == 0 ? 0.0 : 100.0 * static_cast<double>(tp) / static_cast<double>(tp + fp);
  const double f1_pos = f1_percent(m.tp, m.fp, m.fn);
  const double f1_neg = f1_percent(m.tn, m.fn, m.fp);
  m.macro_f1 = (f1_pos + f1_neg) / 2.0;
  return m;
}

}  // namespace detail

inline ConfusionMetrics confusion_at(const ScoreSet& set, double threshold) {
  set.validate();
  if (std::isnan(threshold)) throw ValueError("threshold is NaN");
  const auto tp = static_cast<std::size_t>(
      std::count_if(set.positives.begin(), set.positives.end(),
                    [&](const ScoredValue& v) { return v.score >= threshold; }));
  const auto fp = static_cast<std::size_t>(
      std::count_if(set.negatives.begin(), set.negatives.end(),
                    [&](const ScoredValue& v) { return v.score >= threshold; }));
  return detail::confusion_from_counts(threshold, detail::unit_interval_scores(set), tp, fp, set.n_pos(),
                                       set.n_neg());
}

inline ThresholdChoice fixed_threshold(const ScoreSet& set, double threshold) {
  return {ThresholdMethod::fixed, threshold, threshold, confusion_at(set, threshold)};
}

// Smallest candidate threshold whose FPR does not exceed beta, which
// maximizes TPR under the cap. The +inf sentinel (FPR 0) always qualifies.
inline ThresholdChoice threshold_at_max_fpr(const ScoreSet& set, double beta) {
  set.validate();
  if (!(beta > 0.0 && beta < 1.0)) throw ConfigError("max FPR must lie in (0, 1)");
  const auto sw = detail::sweep(set);
  const auto nn = static_cast<double>(set.n_neg());
  double chosen = kInfThreshold;
  std::size_t tp = 0, fp = 0;
  for (std::size_t k = 0; k < sw.thresholds.size(); ++k) {
    if (static_cast<double>(sw.fp[k]) / nn > beta) break;
    chosen = sw.thresholds[k];
    tp = sw.tp[k];
    fp = sw.fp[k];
  }
  return {ThresholdMethod::tpr_at_fpr, beta, chosen,
          detail::confusion_from_counts(chosen, detail::unit_interval_scores(set), tp, fp, set.n_pos(),
                                        set.n_neg())};
}

// Highest-recall candidate with precision >= p_r; equal recall prefers the
// larger threshold.
inline ThresholdChoice threshold_at_min_precision(const ScoreSet& set, double min_precision) {
  set.validate();
  if (!(min_precision > 0.0 && min_precision <= 1.0)) throw ConfigError("min precision must lie in (0, 1]");
  const auto sw = detail::sweep(set);
  double best_precision = 0.0;
  std::ptrdiff_t best = -1;
  for (std::size_t k = 0; k < sw.thresholds.size(); ++k) {
    const double precision = static_cast<double>(sw.tp[k]) / static_cast<double>(sw.tp[k] + sw.fp[k]);
    best_precision = std::max(best_precision, precision);
    if (precision < min_precision) continue;
    // tp is non-decreasing along the sweep, so only a strict gain moves the choice.
    if (best < 0 || sw.tp[k] > sw.tp[static_cast<std::size_t>(best)]) best = static_cast<std::ptrdiff_t>(k);
  }
  if (best < 0) throw UnattainablePrecisionError(min_precision, best_precision);
  const auto k = static_cast<std::size_t>(best);
  return {ThresholdMethod::recall_at_precision, min_precision, sw.thresholds[k],
          detail::confusion_from_counts(sw.thresholds[k], detail::unit_interval_scores(set), sw.tp[k],
                                        sw.fp[k], set.n_pos(), set.n_neg())};
}

// Applies dev-derived thresholds unchanged to another score set.
inline std::vector<DeploymentRow> deployment_report(const std::vector<ThresholdChoice>& choices,
                                                    const ScoreSet& deploy) {
  std::vector<DeploymentRow> rows;
  rows.reserve(choices.size());
  for (const auto& c : choices) rows.push_back({c.method, c.target, c.threshold, confusion_at(deploy, c.threshold)});
  return rows;
}

// JSON cannot carry infinity, so the sentinel threshold is written as the string "inf".
inline nlohmann::ordered_json threshold_to_json(double t) {
  if (std::isinf(t)) return t > 0 ? "inf" : "-inf";
  return t;
}

inline double threshold_from_json(const nlohmann::json& j) {
  if (j.is_string()) {
    const auto s = j.get<std::string>();
    if (s == "inf") return kInfThreshold;
    if (s == "-inf") return -kInfThreshold;
    throw ValueError("bad threshold '" + s + "'");
  }
  return j.get<double>();
}

inline nlohmann::ordered_json to_json(const ConfusionMetrics& m) {
  nlohmann::ordered_json j;
  j["threshold"] = threshold_to_json(m.threshold);
  j["display_threshold"] = threshold_to_json(m.display_threshold);
  j["tp"] = m.tp;
  j["fp"] = m.fp;
  j["tn"] = m.tn;
  j["fn"] = m.fn;
  j["fpr"] = m.fpr;
  j["tpr_recall"] = m.tpr_recall;
  j["precision"] = m.precision;
  j["macro_f1"] = m.macro_f1;
  return j;
}

inline nlohmann::ordered_json to_json(const ThresholdChoice& c) {
  nlohmann::ordered_json j;
  j["method"] = to_string(c.method);
  j["target"] = threshold_to_json(c.target);
  j["threshold"] = threshold_to_json(c.threshold);
  j["dev_metrics"] = to_json(c.dev_metrics);
  return j;
}

inline ThresholdChoice choice_from_json(const nlohmann::json& j) {
  ThresholdChoice c;
  try {
    c.method = threshold_method_from_string(j.at("method").get<std::string>());
    c.target = threshold_from_json(j.at("target"));
    c.threshold = threshold_from_json(j.at("threshold"));
    if (j.contains("dev_metrics")) {
      const auto& m = j.at("dev_metrics");
      c.dev_metrics.threshold = threshold_from_json(m.at("threshold"));
      c.dev_metrics.display_threshold = threshold_from_json(m.at("display_threshold"));
      c.dev_metrics.tp = m.at("tp").get<std::size_t>();
      c.dev_metrics.fp = m.at("fp").get<std::size_t>();
      c.dev_metrics.tn = m.at("tn").get<std::size_t>();
      c.dev_metrics.fn = m.at("fn").get<std::size_t>();
      c.dev_metrics.fpr = m.at("fpr").get<double>();
      c.dev_metrics.tpr_recall = m.at("tpr_recall").get<double>();
      c.dev_metrics.precision = m.at("precision").get<double>();
      c.dev_metrics.macro_f1 = m.at("macro_f1").get<double>();
    }
  } catch (const nlohmann::json::exception& e) {
    throw ValueError(std::string("malformed threshold choice: ") + e.what());
  }
  return c;
}

namespace detail {
inline std::string fmt2(double x) {
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.2f", x);
  return buf;
}
// Shortest text that reads back as the same double.
inline std::string fmt_full(double x) {
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}
}  // namespace detail

// CSV: method,threshold,display_threshold,fpr,tpr_recall,precision,macro_f1
inline void write_deployment_csv(std::ostream& out, const std::vector<DeploymentRow>& rows) {
  out << "method,threshold,display_threshold,fpr,tpr_recall,precision,macro_f1\n";
  for (const auto& r : rows) {
    out << to_string(r.method) << ',' << detail::fmt_full(r.threshold) << ','
        << detail::fmt2(r.metrics.display_threshold) << ',' << detail::fmt2(r.metrics.fpr) << ','
        << detail::fmt2(r.metrics.tpr_recall) << ',' << detail::fmt2(r.metrics.precision) << ','
        << detail::fmt2(r.metrics.macro_f1) << '\n';
  }
}

}  // namespace xrisk
