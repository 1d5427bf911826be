#include <cmath>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "xrisk/metrics.hpp"

namespace xrisk {
namespace {

using S = ScoreSet;

void expect_roc(const RocCurve& c, const std::vector<std::pair<double, double>>& fpr_tpr) {
  ASSERT_EQ(c.points.size(), fpr_tpr.size());
  for (std::size_t k = 0; k < fpr_tpr.size(); ++k) {
    EXPECT_DOUBLE_EQ(c.points[k].fpr, fpr_tpr[k].first) << "point " << k;
    EXPECT_DOUBLE_EQ(c.points[k].tpr, fpr_tpr[k].second) << "point " << k;
  }
}

TEST(RocCurve, PerfectSeparation) {
  const auto c = roc_curve(S::from_scores({0.9}, {0.1}));
  expect_roc(c, {{0, 0}, {0, 1}, {1, 1}});
  EXPECT_TRUE(std::isinf(c.points[0].threshold));
  EXPECT_DOUBLE_EQ(c.points[1].threshold, 0.9);
  EXPECT_DOUBLE_EQ(c.points[2].threshold, 0.1);
}

TEST(RocCurve, FullTieCollapses) {
  const auto c = roc_curve(S::from_scores({0.5}, {0.5}));
  expect_roc(c, {{0, 0}, {1, 1}});
  EXPECT_DOUBLE_EQ(c.points[1].threshold, 0.5);
}

TEST(RocCurve, InterleavedSweep) {
  expect_roc(roc_curve(S::from_scores({0.8, 0.4}, {0.6, 0.2})), {{0, 0}, {0, 0.5}, {0.5, 0.5}, {0.5, 1}, {1, 1}});
}

TEST(RocCurve, MonotoneOnRandomSets) {
  Rng rng(11);
  for (int t = 0; t < 200; ++t) {
    const auto c = roc_curve(oracle::random_set(rng, 50, t % 2 == 0));
    EXPECT_EQ(c.points.front().fpr, 0.0);
    EXPECT_EQ(c.points.front().tpr, 0.0);
    EXPECT_EQ(c.points.back().fpr, 1.0);
    EXPECT_EQ(c.points.back().tpr, 1.0);
    for (std::size_t k = 1; k < c.points.size(); ++k) {
      EXPECT_GE(c.points[k].fpr, c.points[k - 1].fpr);
      EXPECT_GE(c.points[k].tpr, c.points[k - 1].tpr);
      EXPECT_LT(c.points[k].threshold, c.points[k - 1].threshold);
    }
  }
}

TEST(PrCurve, Examples) {
  auto c = pr_curve(S::from_scores({0.9}, {0.1}));
  EXPECT_DOUBLE_EQ(c.points[0].recall, 1.0);
  EXPECT_DOUBLE_EQ(c.points[0].precision, 1.0);

  c = pr_curve(S::from_scores({0.5}, {0.5}));
  ASSERT_EQ(c.points.size(), 1u);
  EXPECT_DOUBLE_EQ(c.points[0].recall, 1.0);
  EXPECT_DOUBLE_EQ(c.points[0].precision, 0.5);

  c = pr_curve(S::from_scores({0.9, 0.5}, {0.7}));
  ASSERT_EQ(c.points.size(), 3u);
  EXPECT_DOUBLE_EQ(c.points[0].threshold, 0.9);
  EXPECT_DOUBLE_EQ(c.points[0].recall, 0.5);
  EXPECT_DOUBLE_EQ(c.points[0].precision, 1.0);
  EXPECT_DOUBLE_EQ(c.points[1].recall, 0.5);
  EXPECT_DOUBLE_EQ(c.points[1].precision, 0.5);
  EXPECT_DOUBLE_EQ(c.points[2].recall, 1.0);
  EXPECT_DOUBLE_EQ(c.points[2].precision, 2.0 / 3.0);
}

TEST(Auc, Examples) {
  EXPECT_DOUBLE_EQ(auc(S::from_scores({0.9}, {0.1})), 100.0);
  EXPECT_DOUBLE_EQ(auc(S::from_scores({0.5}, {0.5})), 50.0);
  EXPECT_DOUBLE_EQ(auc(S::from_scores({0.8, 0.4}, {0.6, 0.2})), 75.0);
}

TEST(Auc, DegenerateSetRejected) {
  EXPECT_THROW(auc(S::from_scores({}, {0.1})), DegenerateSetError);
  EXPECT_THROW(auc(S::from_scores({0.1}, {})), DegenerateSetError);
  EXPECT_THROW(auc(S::from_scores({NAN}, {0.1})), ValueError);
}

TEST(AveragePrecision, Examples) {
  EXPECT_DOUBLE_EQ(average_precision(S::from_scores({0.9}, {0.1})), 100.0);
  EXPECT_NEAR(average_precision(S::from_scores({0.9, 0.5}, {0.7})), 250.0 / 3.0, 1e-12);
  EXPECT_DOUBLE_EQ(average_precision(S::from_scores({0.4}, {0.6})), 50.0);
}

TEST(AveragePrecision, TiedBlockIsOrderIndependent) {
  // Positive and negative tied at the top enter together: P = 1/2 at R = 1/2.
  const auto a = average_precision(S::from_scores({0.9, 0.1}, {0.9}));
  const auto b = average_precision(ScoreSet{{{"z", 0.9}, {"y", 0.1}}, {{"a", 0.9}}});
  EXPECT_DOUBLE_EQ(a, b);
  EXPECT_NEAR(a, 100.0 * (0.5 * 0.5 + 0.5 * (2.0 / 3.0)), 1e-12);
}

TEST(AveragePrecision, MatchesThresholdWalkOracle) {
  Rng rng(5);
  for (int t = 0; t < 300; ++t) {
    const auto s = oracle::random_set(rng, 40, t % 2 == 1);
    EXPECT_NEAR(average_precision(s), oracle::average_precision(s), 1e-9);
  }
}

TEST(HardestSubsets, Examples) {
  const auto h = hardest_subsets(S::from_scores({0.8, 0.4}, {0.6, 0.2}), {0.5, 0.5});
  ASSERT_EQ(h.hard_pos.size(), 1u);
  ASSERT_EQ(h.hard_neg.size(), 1u);
  EXPECT_DOUBLE_EQ(h.hard_pos[0].score, 0.4);
  EXPECT_DOUBLE_EQ(h.hard_neg[0].score, 0.6);

  const auto full = hardest_subsets(S::from_scores({0.8, 0.4, 0.1}, {0.6, 0.2}), {0.0, 1.0});
  EXPECT_EQ(full.hard_pos.size(), 3u);
  EXPECT_EQ(full.hard_neg.size(), 2u);

  std::vector<double> ten(10);
  for (int i = 0; i < 10; ++i) ten[static_cast<std::size_t>(i)] = i / 10.0;
  EXPECT_EQ(hardest_subsets(S::from_scores({1.0}, ten), {0.5, 0.05}).hard_neg.size(), 1u);
}

TEST(HardestSubsets, CeilingOnExactProducts) {
  std::vector<double> hundred(100, 0.5);
  EXPECT_EQ(hardest_subsets(S::from_scores({1.0}, hundred), {0.5, 0.05}).hard_neg.size(), 5u);
  EXPECT_EQ(hardest_subsets(S::from_scores(hundred, {0.0}), {0.4, 0.3}).hard_pos.size(), 60u);
  EXPECT_EQ(hardest_subsets(S::from_scores(hundred, {0.0}), {0.8, 0.3}).hard_pos.size(), 20u);
}

TEST(HardestSubsets, BoundaryTiesBreakByAscendingId) {
  const ScoreSet s{{{"p2", 0.3}, {"p1", 0.3}, {"p0", 0.9}}, {{"nb", 0.7}, {"na", 0.7}, {"nc", 0.1}}};
  const auto h = hardest_subsets(s, {0.6, 0.3});
  ASSERT_EQ(h.hard_pos.size(), 2u);
  ASSERT_EQ(h.hard_neg.size(), 1u);
  EXPECT_EQ(h.hard_pos[0].id, "p1");
  EXPECT_EQ(h.hard_neg[0].id, "na");
  EXPECT_EQ(hardest_subsets(s, {0.9, 0.3}).hard_pos[0].id, "p1");
}

TEST(PartialAuc, Examples) {
  EXPECT_DOUBLE_EQ(partial_auc(S::from_scores({0.8, 0.4}, {0.6, 0.2}), 0.5), 50.0);
  EXPECT_DOUBLE_EQ(partial_auc(S::from_scores({0.9}, {0.1, 0.2}), 0.5), 100.0);
  const auto s = S::from_scores({0.3, 0.7, 0.2}, {0.25, 0.1, 0.9});
  EXPECT_EQ(partial_auc(s, 1.0), auc(s));
}

TEST(TwoWayPartialAuc, Examples) {
  EXPECT_DOUBLE_EQ(two_way_partial_auc(S::from_scores({0.8, 0.4}, {0.6, 0.2}), {0.5, 0.5}), 0.0);
  const auto s = S::from_scores({0.3, 0.7, 0.2}, {0.25, 0.1, 0.9});
  EXPECT_EQ(two_way_partial_auc(s, {0.0, 1.0}), auc(s));
  for (double a : {0.0, 0.3, 0.5, 0.99})
    for (double b : {0.01, 0.05, 0.5, 1.0})
      EXPECT_DOUBLE_EQ(two_way_partial_auc(S::from_scores({0.9, 0.8}, {0.1, 0.2}), {a, b}), 100.0);
}

TEST(Params, Validation) {
  const auto s = S::from_scores({1}, {0});
  EXPECT_THROW(two_way_partial_auc(s, {1.0, 0.5}), ConfigError);
  EXPECT_THROW(two_way_partial_auc(s, {-0.1, 0.5}), ConfigError);
  EXPECT_THROW(partial_auc(s, 0.0), ConfigError);
  EXPECT_THROW(partial_auc(s, 1.5), ConfigError);
}

TEST(Evaluate, Examples) {
  auto r = evaluate(S::from_scores({0.9}, {0.1}), {0.5, 0.05});
  EXPECT_DOUBLE_EQ(r.tpauc, 100.0);
  EXPECT_DOUBLE_EQ(r.pauc, 100.0);
  EXPECT_DOUBLE_EQ(r.auc, 100.0);
  EXPECT_DOUBLE_EQ(r.ap, 100.0);

  r = evaluate(S::from_scores({0.8, 0.4}, {0.6, 0.2}), {0.5, 0.5});
  EXPECT_DOUBLE_EQ(r.tpauc, 0.0);
  EXPECT_DOUBLE_EQ(r.pauc, 50.0);
  EXPECT_DOUBLE_EQ(r.auc, 75.0);
  EXPECT_NEAR(r.ap, 83.33, 0.005);
  EXPECT_EQ(r.n_pos, 2u);
  EXPECT_EQ(r.n_neg, 2u);
}

TEST(Metrics, OracleEquivalenceAndOrdering) {
  Rng rng(2024);
  const XRiskParams params[] = {{0.5, 0.05}, {0.4, 0.3}, {0.8, 0.05}};
  for (int t = 0; t < 400; ++t) {
    const auto s = oracle::random_set(rng, 50, t % 3 == 0);
    ASSERT_NEAR(auc(s), oracle::auc(s), 1e-9);
    for (const auto& p : params) {
      const double tp = two_way_partial_auc(s, p);
      const double pa = partial_auc(s, p.beta);
      ASSERT_NEAR(tp, oracle::tpauc(s, p.alpha, p.beta), 1e-9);
      ASSERT_NEAR(pa, oracle::pauc(s, p.beta), 1e-9);
      ASSERT_LE(tp, pa);
      ASSERT_LE(pa, auc(s));
    }
  }
}

TEST(Metrics, SwappingClassesComplementsAuc) {
  Rng rng(9);
  for (int t = 0; t < 100; ++t) {
    const auto s = oracle::random_set(rng, 30, t % 2 == 0);
    const ScoreSet swapped{s.negatives, s.positives};
    EXPECT_NEAR(auc(swapped), 100.0 - auc(s), 1e-9);
  }
}

TEST(Metrics, RankStatisticsIgnoreMonotoneTransforms) {
  Rng rng(3);
  for (int t = 0; t < 100; ++t) {
    const auto s = oracle::random_set(rng, 50, t % 2 == 0);
    auto mapped = s;
    for (auto* side : {&mapped.positives, &mapped.negatives})
      for (auto& v : *side) v.score = std::exp(v.score);
    const auto a = evaluate(s), b = evaluate(mapped);
    EXPECT_EQ(a.tpauc, b.tpauc);
    EXPECT_EQ(a.pauc, b.pauc);
    EXPECT_EQ(a.auc, b.auc);
    EXPECT_NEAR(a.ap, b.ap, 1e-9);
  }
}

NamedReport named(const char* name, double tp, double pa, double au, double ap, XRiskParams p = {}) {
  return {name, {tp, pa, au, ap, p, 10, 10}};
}

TEST(RankReports, LexicographicDescending) {
  auto r = rank_reports({named("B", 5, 75, 95, 85), named("A", 10, 70, 90, 80)});
  EXPECT_EQ(r[0].name, "A");
  EXPECT_EQ(r[1].name, "B");

  r = rank_reports({named("AICD", 2.67, 61.78, 74.57, 63.49), named("MAGE", 3.56, 62.18, 78.88, 66.17)});
  EXPECT_EQ(r[0].name, "MAGE");

  r = rank_reports({named("B", 0, 61, 74, 63), named("A", 0, 62, 78, 66)});
  EXPECT_EQ(r[0].name, "A");

  r = rank_reports({named("x", 0, 60, 80, 70), named("y", 0, 60, 80, 71)});
  EXPECT_EQ(r[0].name, "y");

  r = rank_reports({named("b", 1, 2, 3, 4), named("a", 1, 2, 3, 4)});
  EXPECT_EQ(r[0].name, "a");
  EXPECT_EQ(r[1].name, "b");
}

TEST(RankReports, MixedParamsRejected) {
  EXPECT_THROW(rank_reports({named("a", 1, 2, 3, 4), named("b", 1, 2, 3, 4, {0.4, 0.3})}), ParamMismatchError);
}

TEST(ReportJson, FlatRoundedRow) {
  const NamedReport r{"news", evaluate(S::from_scores({0.9, 0.5}, {0.7}), {0.5, 0.05})};
  EXPECT_EQ(to_json(r).dump(),
            R"({"name":"news","alpha":0.5,"beta":0.05,"tpauc":0.0,"pauc":50.0,"auc":50.0,"ap":83.33,"n_pos":2,"n_neg":1})");
  const auto back = report_from_json(nlohmann::json::parse(to_json(r).dump()));
  EXPECT_EQ(back.name, "news");
  EXPECT_DOUBLE_EQ(back.report.ap, 83.33);
}

}  // namespace
}  // namespace xrisk
