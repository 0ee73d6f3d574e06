#pragma once

#include <iosfwd>
#include <span>
#include <string>

namespace hetlink {

struct ThresholdMetrics {
  double accuracy = 0;
  double f1 = 0;
  double precision = 0;
  double recall = 0;
  double specificity = 0;
};

/// Confusion-matrix metrics with the rule "predict positive when z >= threshold".
/// Zero denominators yield 0. Throws EmptyInput on an empty set.
ThresholdMetrics threshold_metrics(std::span<const double> probs, std::span<const int> labels, double threshold = 0.5);

/// Mann-Whitney ROC-AUC; tied positive/negative pairs count one half.
/// Throws SingleClassInput unless both classes are present.
double roc_auc(std::span<const double> probs, std::span<const int> labels);

/// Step-wise PR-AUC: sum over descending distinct thresholds of
/// (R_k - R_{k-1}) * P_k, starting from recall 0.
double pr_auc(std::span<const double> probs, std::span<const int> labels);

struct MetricReport {
  double accuracy = 0;
  double f1 = 0;
  double precision = 0;
  double recall = 0;
  double roc_auc = 0;
  double pr_auc = 0;
  double specificity = 0;
  double threshold = 0.5;
};

MetricReport evaluate_scores(std::span<const double> probs, std::span<const int> labels, double threshold = 0.5);

/// "acc\tf1\tprec\trec\trocauc\tprauc\tspec"
std::string metric_header();
/// One row in header order, printed with round-trip precision.
std::string metric_row(const MetricReport& m);

/// Shortest text that parses back to exactly `value`.
std::string format_double(double value);

}  // namespace hetlink
