#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <set>

#include "hetlink/error.hpp"
#include "hetlink/metrics.hpp"
#include "hetlink/rng.hpp"

namespace hetlink {
namespace {

struct Scored {
  std::vector<double> z;
  std::vector<int> y;
};

// Scores on a coarse grid so ties are common.
Scored random_set(Rng& rng, std::size_t n, int grid = 20) {
  Scored s;
  for (std::size_t i = 0; i < n; ++i) {
    s.z.push_back(static_cast<double>(rng.below(static_cast<std::uint64_t>(grid))) / grid);
    s.y.push_back(rng.bernoulli(0.4) ? 1 : 0);
  }
  s.y[0] = 1;
  s.y[1] = 0;
  return s;
}

double brute_auc(const Scored& s) {
  double sum = 0;
  std::size_t pn = 0;
  for (std::size_t i = 0; i < s.z.size(); ++i) {
    if (!s.y[i]) continue;
    for (std::size_t j = 0; j < s.z.size(); ++j) {
      if (s.y[j]) continue;
      ++pn;
      sum += s.z[i] > s.z[j] ? 1.0 : s.z[i] == s.z[j] ? 0.5 : 0.0;
    }
  }
  return sum / static_cast<double>(pn);
}

double brute_pr(const Scored& s) {
  std::set<double, std::greater<>> thresholds(s.z.begin(), s.z.end());
  const double pos = static_cast<double>(std::count(s.y.begin(), s.y.end(), 1));
  double area = 0, prev_recall = 0;
  for (double t : thresholds) {
    double tp = 0, fp = 0;
    for (std::size_t i = 0; i < s.z.size(); ++i) {
      if (s.z[i] < t) continue;
      (s.y[i] ? tp : fp) += 1;
    }
    const double recall = tp / pos, precision = tp / (tp + fp);
    area += (recall - prev_recall) * precision;
    prev_recall = recall;
  }
  return area;
}

TEST(ThresholdMetrics, PerfectSeparation) {
  const std::vector<double> z{0.9, 0.8, 0.3, 0.2};
  const std::vector<int> y{1, 1, 0, 0};
  const auto m = threshold_metrics(z, y);
  EXPECT_EQ(m.accuracy, 1);
  EXPECT_EQ(m.f1, 1);
  EXPECT_EQ(m.precision, 1);
  EXPECT_EQ(m.recall, 1);
  EXPECT_EQ(m.specificity, 1);
}

TEST(ThresholdMetrics, DegeneratePredictor) {
  const std::vector<double> z{0.0, 0.0};
  const std::vector<int> y{1, 0};
  const auto m = threshold_metrics(z, y);
  EXPECT_EQ(m.precision, 0);
  EXPECT_EQ(m.recall, 0);
  EXPECT_EQ(m.f1, 0);
  EXPECT_EQ(m.specificity, 1);
  EXPECT_EQ(m.accuracy, 0.5);
}

TEST(ThresholdMetrics, HandConfusionMatrix) {
  const std::vector<double> z{0.6, 0.6, 0.4};
  const std::vector<int> y{1, 0, 0};
  const auto m = threshold_metrics(z, y);
  EXPECT_DOUBLE_EQ(m.precision, 0.5);
  EXPECT_DOUBLE_EQ(m.recall, 1);
  EXPECT_DOUBLE_EQ(m.specificity, 0.5);
  EXPECT_DOUBLE_EQ(m.f1, 2.0 / 3);
  EXPECT_DOUBLE_EQ(m.accuracy, 2.0 / 3);
}

TEST(ThresholdMetrics, ZeroThresholdAndEmpty) {
  const std::vector<double> z{0.1, 0.0, 0.7};
  const std::vector<int> y{1, 0, 0};
  const auto m = threshold_metrics(z, y, 0.0);
  EXPECT_EQ(m.recall, 1);
  EXPECT_EQ(m.specificity, 0);
  try {
    threshold_metrics(std::vector<double>{}, std::vector<int>{});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::EmptyInput);
  }
}

TEST(RocAuc, OrderingsAndSingleClass) {
  const std::vector<double> z{0.9, 0.8, 0.3, 0.2};
  EXPECT_EQ(roc_auc(z, std::vector<int>{1, 1, 0, 0}), 1.0);
  EXPECT_EQ(roc_auc(z, std::vector<int>{0, 0, 1, 1}), 0.0);
  try {
    roc_auc(z, std::vector<int>{1, 1, 1, 1});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::SingleClassInput);
  }
}

TEST(RocAuc, MatchesBruteForceWithTies) {
  Rng rng(31);
  for (int trial = 0; trial < 200; ++trial) {
    const Scored s = random_set(rng, 200, trial % 2 ? 10 : 1000);
    EXPECT_EQ(roc_auc(s.z, s.y), brute_auc(s));
  }
}

TEST(RocAuc, InvariantsUnderTransformAndFlip) {
  Rng rng(5);
  for (int trial = 0; trial < 50; ++trial) {
    Scored s = random_set(rng, 60, 7);
    const double a = roc_auc(s.z, s.y);
    std::vector<double> t(s.z.size());
    std::transform(s.z.begin(), s.z.end(), t.begin(), [](double v) { return std::exp(3 * v) - 1; });
    EXPECT_EQ(roc_auc(t, s.y), a);
    for (int& y : s.y) y = 1 - y;
    EXPECT_NEAR(roc_auc(s.z, s.y) + a, 1.0, 1e-15);
  }
}

TEST(RocAuc, AllTiedBalancedIsHalf) {
  const std::vector<double> z(10, 0.5);
  const std::vector<int> y{1, 0, 1, 0, 1, 0, 1, 0, 1, 0};
  EXPECT_EQ(roc_auc(z, y), 0.5);
  EXPECT_EQ(threshold_metrics(z, y).accuracy, 0.5);
}

TEST(PrAuc, ClosedFormsAndOracle) {
  const std::vector<double> z{0.9, 0.8, 0.3, 0.2};
  EXPECT_EQ(pr_auc(z, std::vector<int>{1, 1, 0, 0}), 1.0);
  const std::vector<double> tied(8, 0.3);
  EXPECT_DOUBLE_EQ(pr_auc(tied, std::vector<int>{1, 0, 0, 1, 0, 1, 0, 0}), 3.0 / 8);
  EXPECT_THROW(pr_auc(z, std::vector<int>{0, 0, 0, 0}), Error);
  Rng rng(17);
  for (int trial = 0; trial < 300; ++trial) {
    const Scored s = random_set(rng, 50, trial % 3 ? 8 : 1000);
    EXPECT_NEAR(pr_auc(s.z, s.y), brute_pr(s), 1e-12);
  }
}

TEST(MetricRow, FormatsInTableOrder) {
  MetricReport m;
  m.accuracy = 0.5;
  m.f1 = 0.25;
  m.precision = 1;
  m.recall = 0.125;
  m.roc_auc = 0.75;
  m.pr_auc = 0.1;
  m.specificity = 0;
  EXPECT_EQ(metric_header(), "acc\tf1\tprec\trec\trocauc\tprauc\tspec");
  EXPECT_EQ(metric_row(m), "0.5\t0.25\t1\t0.125\t0.75\t0.1\t0");
  for (double v : {0.1, 1.0 / 3, 0.8729384719283746, 1e-300}) EXPECT_EQ(std::stod(format_double(v)), v);
}

TEST(EvaluateScores, ValuesInUnitRange) {
  Rng rng(2);
  const Scored s = random_set(rng, 100);
  const MetricReport m = evaluate_scores(s.z, s.y);
  for (double v : {m.accuracy, m.f1, m.precision, m.recall, m.roc_auc, m.pr_auc, m.specificity}) {
    EXPECT_GE(v, 0.0);
    EXPECT_LE(v, 1.0);
  }
  EXPECT_EQ(m.threshold, 0.5);
}

}  // namespace
}  // namespace hetlink
