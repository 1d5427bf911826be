#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <tuple>
#include <vector>

#include <nlohmann/json.hpp>

#include "xrisk/core.hpp"
#include "xrisk/errors.hpp"

namespace xrisk {

// Bounds for the partial metrics: TPR >= alpha, FPR <= beta.
struct XRiskParams {
  double alpha = 0.50;
  double beta = 0.05;

  void validate() const {
    if (!(alpha >= 0.0 && alpha < 1.0)) throw ConfigError("alpha must lie in [0, 1)");
    if (!(beta > 0.0 && beta <= 1.0)) throw ConfigError("beta must lie in (0, 1]");
  }

  friend bool operator==(const XRiskParams&, const XRiskParams&) = default;
};

// Relaxed bounds used for adversarial evaluation.
inline constexpr XRiskParams kAdversarialParams{0.40, 0.30};

inline constexpr double kInfThreshold = std::numeric_limits<double>::infinity();

struct RocPoint {
  double fpr = 0.0;
  double tpr = 0.0;
  double threshold = kInfThreshold;
};

struct RocCurve {
  std::vector<RocPoint> points;  // threshold descending, starts at (0,0) @ +inf
};

struct PrPoint {
  double recall = 0.0;
  double precision = 0.0;
  double threshold = 0.0;
};

struct PrCurve {
  std::vector<PrPoint> points;  // threshold descending
};

struct XRiskReport {
  double tpauc = 0.0;
  double pauc = 0.0;
  double auc = 0.0;
  double ap = 0.0;
  XRiskParams params;
  std::size_t n_pos = 0;
  std::size_t n_neg = 0;
};

struct NamedReport {
  std::string name;
  XRiskReport report;
};

namespace detail {

// Cumulative confusion counts at each distinct score, scanning scores from
// high to low. Entry k holds the counts for rule score >= thresholds[k].
struct ThresholdSweep {
  std::vector<double> thresholds;
  std::vector<std::size_t> tp;
  std::vector<std::size_t> fp;
};

inline ThresholdSweep sweep(const ScoreSet& set) {
  std::vector<std::pair<double, bool>> all;
  all.reserve(set.n_pos() + set.n_neg());
  for (const auto& p : set.positives) all.emplace_back(p.score, true);
  for (const auto& n : set.negatives) all.emplace_back(n.score, false);
  std::sort(all.begin(), all.end(), [](const auto& a, const auto& b) { return a.first > b.first; });

  ThresholdSweep out;
  std::size_t tp = 0, fp = 0;
  for (std::size_t i = 0; i < all.size();) {
    const double t = all[i].first;
    for (; i < all.size() && all[i].first == t; ++i) (all[i].second ? tp : fp) += 1;
    out.thresholds.push_back(t);
    out.tp.push_back(tp);
    out.fp.push_back(fp);
  }
  return out;
}

// Twice the pairwise win count: 2 per strict win, 1 per tie. Exact in integers.
inline std::uint64_t doubled_wins(const std::vector<double>& pos, std::vector<double> neg) {
  std::sort(neg.begin(), neg.end());
  std::uint64_t total = 0;
  for (double s : pos) {
    const auto lo = std::lower_bound(neg.begin(), neg.end(), s);
    const auto hi = std::upper_bound(lo, neg.end(), s);
    total += 2 * static_cast<std::uint64_t>(lo - neg.begin()) + static_cast<std::uint64_t>(hi - lo);
  }
  return total;
}

inline double pairwise_win_rate(const std::vector<double>& pos, const std::vector<double>& neg) {
  const double num = static_cast<double>(doubled_wins(pos, neg));
  const double den = 2.0 * static_cast<double>(pos.size()) * static_cast<double>(neg.size());
  return 100.0 * (num / den);
}

inline std::vector<double> scores_of(const std::vector<ScoredValue>& values) {
  std::vector<double> out;
  out.reserve(values.size());
  for (const auto& v : values) out.push_back(v.score);
  return out;
}

// ceil(fraction * n), treating products within 1e-9 of an integer as that
// integer so that e.g. 0.05 * 100 selects 5 rather than 6. Result in [1, n].
inline std::size_t subset_size(double fraction, std::size_t n) {
  const double x = fraction * static_cast<double>(n);
  const double r = std::round(x);
  const double k = std::abs(x - r) <= 1e-9 * std::max(1.0, std::abs(x)) ? r : std::ceil(x);
  return std::clamp<std::size_t>(static_cast<std::size_t>(k), 1, n);
}

}  // namespace detail

inline RocCurve roc_curve(const ScoreSet& set) {
  set.validate();
  const auto sw = detail::sweep(set);
  const double np = static_cast<double>(set.n_pos());
  const double nn = static_cast<double>(set.n_neg());
  RocCurve curve;
  curve.points.reserve(sw.thresholds.size() + 1);
  curve.points.push_back({0.0, 0.0, kInfThreshold});
  for (std::size_t k = 0; k < sw.thresholds.size(); ++k)
    curve.points.push_back({static_cast<double>(sw.fp[k]) / nn, static_cast<double>(sw.tp[k]) / np,
                            sw.thresholds[k]});
  return curve;
}

inline PrCurve pr_curve(const ScoreSet& set) {
  set.validate();
  const auto sw = detail::sweep(set);
  const double np = static_cast<double>(set.n_pos());
  PrCurve curve;
  curve.points.reserve(sw.thresholds.size());
  for (std::size_t k = 0; k < sw.thresholds.size(); ++k) {
    const auto flagged = static_cast<double>(sw.tp[k] + sw.fp[k]);
    curve.points.push_back(
        {static_cast<double>(sw.tp[k]) / np, static_cast<double>(sw.tp[k]) / flagged, sw.thresholds[k]});
  }
  return curve;
}

// Probability a positive outscores a negative (ties count 1/2), on 0-100.
inline double auc(const ScoreSet& set) {
  set.validate();
  return detail::pairwise_win_rate(detail::scores_of(set.positives), detail::scores_of(set.negatives));
}

// Step-wise area under the PR curve. Tied scores enter as one block.
inline double average_precision(const ScoreSet& set) {
  const auto curve = pr_curve(set);
  double ap = 0.0;
  double prev_recall = 0.0;
  for (const auto& p : curve.points) {
    ap += (p.recall - prev_recall) * p.precision;
    prev_recall = p.recall;
  }
  return std::clamp(100.0 * ap, 0.0, 100.0);
}

struct HardSubsets {
  std::vector<ScoredValue> hard_pos;  // lowest-scored positives, ascending
  std::vector<ScoredValue> hard_neg;  // highest-scored negatives, descending
};

// n1 = ceil((1 - alpha) n+) lowest positives, n2 = ceil(beta n-) highest
// negatives. Equal scores at the cut are broken by ascending id.
inline HardSubsets hardest_subsets(const ScoreSet& set, const XRiskParams& params) {
  set.validate();
  params.validate();
  HardSubsets out{set.positives, set.negatives};
  std::sort(out.hard_pos.begin(), out.hard_pos.end(), [](const ScoredValue& a, const ScoredValue& b) {
    return std::tie(a.score, a.id) < std::tie(b.score, b.id);
  });
  std::sort(out.hard_neg.begin(), out.hard_neg.end(), [](const ScoredValue& a, const ScoredValue& b) {
    return a.score != b.score ? a.score > b.score : a.id < b.id;
  });
  out.hard_pos.resize(detail::subset_size(1.0 - params.alpha, set.n_pos()));
  out.hard_neg.resize(detail::subset_size(params.beta, set.n_neg()));
  return out;
}

// One-way partial AUC: all positives against the ceil(beta n-) hardest negatives.
inline double partial_auc(const ScoreSet& set, double beta) {
  const auto hard = hardest_subsets(set, {0.0, beta});
  return detail::pairwise_win_rate(detail::scores_of(set.positives), detail::scores_of(hard.hard_neg));
}

inline double two_way_partial_auc(const ScoreSet& set, const XRiskParams& params) {
  const auto hard = hardest_subsets(set, params);
  return detail::pairwise_win_rate(detail::scores_of(hard.hard_pos), detail::scores_of(hard.hard_neg));
}

inline XRiskReport evaluate(const ScoreSet& set, const XRiskParams& params = {}) {
  set.validate();
  params.validate();
  XRiskReport r;
  r.tpauc = two_way_partial_auc(set, params);
  r.pauc = partial_auc(set, params.beta);
  r.auc = auc(set);
  r.ap = average_precision(set);
  r.params = params;
  r.n_pos = set.n_pos();
  r.n_neg = set.n_neg();
  return r;
}

// Descending lexicographic order on (tpauc, pauc, auc, ap); exact ties by name.
inline std::vector<NamedReport> rank_reports(std::vector<NamedReport> reports) {
  for (const auto& r : reports)
    if (!(r.report.params == reports.front().report.params))
      throw ParamMismatchError("report '" + r.name + "' uses different alpha/beta than '" +
                               reports.front().name + "'");
  std::stable_sort(reports.begin(), reports.end(), [](const NamedReport& a, const NamedReport& b) {
    const auto ka = std::tie(a.report.tpauc, a.report.pauc, a.report.auc, a.report.ap);
    const auto kb = std::tie(b.report.tpauc, b.report.pauc, b.report.auc, b.report.ap);
    if (ka != kb) return ka > kb;
    return a.name < b.name;
  });
  return reports;
}

inline double round2(double x) { return std::round(x * 100.0) / 100.0; }

// Flat JSON row; metrics rounded to two decimals here only.
inline nlohmann::ordered_json to_json(const NamedReport& r) {
  nlohmann::ordered_json j;
  j["name"] = r.name;
  j["alpha"] = r.report.params.alpha;
  j["beta"] = r.report.params.beta;
  j["tpauc"] = round2(r.report.tpauc);
  j["pauc"] = round2(r.report.pauc);
  j["auc"] = round2(r.report.auc);
  j["ap"] = round2(r.report.ap);
  j["n_pos"] = r.report.n_pos;
  j["n_neg"] = r.report.n_neg;
  return j;
}

inline NamedReport report_from_json(const nlohmann::json& j) {
  NamedReport r;
  try {
    r.name = j.at("name").get<std::string>();
    r.report.params = {j.at("alpha").get<double>(), j.at("beta").get<double>()};
    r.report.tpauc = j.at("tpauc").get<double>();
    r.report.pauc = j.at("pauc").get<double>();
    r.report.auc = j.at("auc").get<double>();
    r.report.ap = j.at("ap").get<double>();
    r.report.n_pos = j.at("n_pos").get<std::size_t>();
    r.report.n_neg = j.at("n_neg").get<std::size_t>();
  } catch (const nlohmann::json::exception& e) {
    throw ValueError(std::string("malformed report: ") + e.what());
  }
  return r;
}

}  // namespace xrisk
