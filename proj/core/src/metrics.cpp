#include "hetlink/metrics.hpp"

#include <algorithm>
#include <charconv>
#include <numeric>
#include <vector>

#include "hetlink/error.hpp"

namespace hetlink {

namespace {

void check_lengths(std::span<const double> probs, std::span<const int> labels) {
  if (probs.size() != labels.size()) {
    throw Error(ErrorCode::ShapeError,
                std::to_string(probs.size()) + " scores vs " + std::to_string(labels.size()) + " labels");
  }
}

double ratio(double num, double den) { return den > 0 ? num / den : 0.0; }

/// Indices sorted by descending score; index order breaks ties for determinism.
std::vector<std::size_t> descending_order(std::span<const double> probs) {
  std::vector<std::size_t> order(probs.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return probs[a] > probs[b]; });
  return order;
}

}  // namespace

ThresholdMetrics threshold_metrics(std::span<const double> probs, std::span<const int> labels, double threshold) {
  check_lengths(probs, labels);
  if (probs.empty()) throw Error(ErrorCode::EmptyInput, "no scored pairs");
  double tp = 0, fp = 0, tn = 0, fn = 0;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    const bool predicted = probs[i] >= threshold;
    const bool actual = labels[i] == 1;
    if (predicted && actual) ++tp;
    else if (predicted) ++fp;
    else if (actual) ++fn;
    else ++tn;
  }
  ThresholdMetrics m;
  m.accuracy = (tp + tn) / static_cast<double>(probs.size());
  m.precision = ratio(tp, tp + fp);
  m.recall = ratio(tp, tp + fn);
  m.specificity = ratio(tn, tn + fp);
  m.f1 = ratio(2 * m.precision * m.recall, m.precision + m.recall);
  return m;
}

double roc_auc(std::span<const double> probs, std::span<const int> labels) {
  check_lengths(probs, labels);
  std::vector<std::size_t> order(probs.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return probs[a] < probs[b]; });

  // Sum of midranks of the positives, doubled to stay in integers.
  std::uint64_t rank_sum_x2 = 0;
  std::uint64_t n_pos = 0;
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    std::uint64_t pos_in_block = 0;
    while (j < order.size() && probs[order[j]] == probs[order[i]]) {
      pos_in_block += labels[order[j]] == 1;
      ++j;
    }
    // 1-based ranks i+1..j have midrank (i+1+j)/2.
    rank_sum_x2 += pos_in_block * (i + 1 + j);
    n_pos += pos_in_block;
    i = j;
  }
  const std::uint64_t n_neg = probs.size() - n_pos;
  if (n_pos == 0 || n_neg == 0) throw Error(ErrorCode::SingleClassInput, "ROC-AUC needs both classes");

  const std::uint64_t u_x2 = rank_sum_x2 - n_pos * (n_pos + 1);
  return static_cast<double>(u_x2) / (2.0 * static_cast<double>(n_pos) * static_cast<double>(n_neg));
}

double pr_auc(std::span<const double> probs, std::span<const int> labels) {
  check_lengths(probs, labels);
  const auto n_pos = static_cast<double>(std::count(labels.begin(), labels.end(), 1));
  if (n_pos == 0) throw Error(ErrorCode::SingleClassInput, "PR-AUC needs at least one positive");

  const auto order = descending_order(probs);
  double tp = 0, fp = 0, prev_recall = 0, area = 0;
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j < order.size() && probs[order[j]] == probs[order[i]]) {
      (labels[order[j]] == 1 ? tp : fp) += 1;
      ++j;
    }
    const double recall = tp / n_pos;
    const double precision = tp / (tp + fp);
    area += (recall - prev_recall) * precision;
    prev_recall = recall;
    i = j;
  }
  return area;
}

MetricReport evaluate_scores(std::span<const double> probs, std::span<const int> labels, double threshold) {
  const ThresholdMetrics t = threshold_metrics(probs, labels, threshold);
  MetricReport r;
  r.accuracy = t.accuracy;
  r.f1 = t.f1;
  r.precision = t.precision;
  r.recall = t.recall;
  r.specificity = t.specificity;
  r.roc_auc = roc_auc(probs, labels);
  r.pr_auc = pr_auc(probs, labels);
  r.threshold = threshold;
  return r;
}

std::string metric_header() { return "acc\tf1\tprec\trec\trocauc\tprauc\tspec"; }

std::string format_double(double value) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value);
  return std::string(buf, ptr);
}

std::string metric_row(const MetricReport& m) {
  return format_double(m.accuracy) + '\t' + format_double(m.f1) + '\t' + format_double(m.precision) + '\t' +
         format_double(m.recall) + '\t' + format_double(m.roc_auc) + '\t' + format_double(m.pr_auc) + '\t' +
         format_double(m.specificity);
}

}  // namespace hetlink
