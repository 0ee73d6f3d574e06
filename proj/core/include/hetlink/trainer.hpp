#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "hetlink/dataset.hpp"
#include "hetlink/graph.hpp"
#include "hetlink/metrics.hpp"
#include "hetlink/model.hpp"

namespace hetlink {

struct TrainConfig {
  double learning_rate = 0.001;
  int epochs = 100;
  std::size_t batch_size = 512;
  double w0 = 1.0;  // negative-class weight
  double w1 = 1.0;  // positive-class weight
  double weight_decay = 0.01;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  std::uint64_t seed = 0;
  bool resample_train_negatives = false;
  bool full_graph_batching = false;
  bool one_hop_batches = false;  // 1-hop batch subgraphs; layer-2 inputs are then truncated
  double threshold = 0.5;
  ModelConfig model;

  /// Throws ConfigError when a field is out of range.
  void validate() const;
};

struct LossResult {
  double mean = 0;
  std::vector<double> grad;  // per-pair dl/ds (not divided by the batch size)
};

/// Weighted logistic loss on logits:
/// l(s, y) = w1 * y * log(1 + e^-s) + w0 * (1 - y) * log(1 + e^s).
LossResult logistic_loss(std::span<const double> scores, std::span<const int> labels, double w0, double w1);

/// log(1 + e^x) without overflow.
double softplus(double x) noexcept;

struct OptimizerState {
  Matrix m0, v0, m1, v1;
  std::uint64_t step = 0;

  static OptimizerState zeros_like(const ModelParams& params);
};

/// One AdamW step with bias-corrected moments; weight decay is applied to the
/// weights directly (p -= lr * decay * p) before the adaptive update.
void adamw_step(ModelParams& params, const Gradients& grads, OptimizerState& state, const TrainConfig& cfg);

/// Training pairs shuffled by (seed, epoch) and cut into batches; the last may be short.
std::vector<std::vector<LabeledPair>> make_batches(std::span<const LabeledPair> pairs, std::size_t batch_size,
                                                   std::uint64_t seed, std::uint64_t epoch);

struct Subgraph {
  SparseMatrix op;                  // global operator restricted to `nodes`
  std::vector<NodeIndex> nodes;     // local -> global, sorted
  std::vector<NodePair> pairs;      // batch pairs in local indices
};

/// Local neighbourhood of a batch: endpoints plus all nodes within `hops`
/// steps along nonzero off-diagonal entries of the operator. With hops = 2 the
/// endpoint embeddings of a two-layer encoder equal their full-graph values.
Subgraph induced_subgraph(const SparseMatrix& op, std::span<const LabeledPair> batch, int hops = 2);

/// Gathers rows of `features` for the subgraph's nodes.
Matrix gather_rows(const Matrix& features, std::span<const NodeIndex> nodes);

/// Eval-mode forward pass over the full graph, scoring `pairs`.
std::vector<double> predict_probabilities(const ModelParams& params, const SparseMatrix& op, const Matrix& features,
                                          std::span<const LabeledPair> pairs);

MetricReport evaluate_pairs(const ModelParams& params, const SparseMatrix& op, const Matrix& features,
                            std::span<const LabeledPair> pairs, double threshold = 0.5);

struct EpochRecord {
  int epoch = 0;  // 1-based
  double loss = 0;
  MetricReport val;
  double seconds = 0;
};

struct TrainLog {
  std::vector<EpochRecord> epochs;
  int best_epoch = 0;  // 1-based; 0 when no epoch ran
  double initial_loss = 0;
};

struct TrainResult {
  ModelParams best;
  ModelParams last;
  TrainLog log;
};

/// Mean batch loss of `params` over the training pairs, in eval mode.
double dataset_loss(const ModelParams& params, const SparseMatrix& op, const Matrix& features,
                    std::span<const LabeledPair> pairs, const TrainConfig& cfg);

/// Mini-batch training with per-epoch validation; returns the parameters of the
/// epoch with the highest validation ROC-AUC (earliest on ties).
///
/// `graph` is the full graph, used only when training negatives are resampled.
TrainResult train(const HeteroGraph& graph, const SparseMatrix& op, const Matrix& features, const EdgeSplit& split,
                  const TrainConfig& cfg);

/// TSV with header `epoch loss val_acc val_f1 val_prec val_rec val_rocauc val_prauc val_spec`.
std::string format_train_log(const TrainLog& log);

}  // namespace hetlink
