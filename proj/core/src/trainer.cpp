#include "hetlink/trainer.hpp"

#include <spdlog/spdlog.h>

#include <chrono>
#include <cmath>
#include <limits>
#include <sstream>

#include "hetlink/error.hpp"
#include "hetlink/rng.hpp"

namespace hetlink {

void TrainConfig::validate() const {
  auto fail = [](const std::string& what) { throw Error(ErrorCode::ConfigError, what); };
  if (!(learning_rate >= 0.0) || !std::isfinite(learning_rate)) fail("learning rate must be >= 0");
  if (epochs < 1) fail("epochs must be >= 1");
  if (batch_size < 1) fail("batch size must be >= 1");
  if (!(w0 >= 0.0) || !(w1 >= 0.0)) fail("class weights must be >= 0");
  if (!(weight_decay >= 0.0)) fail("weight decay must be >= 0");
  if (!(model.dropout >= 0.0 && model.dropout < 1.0)) fail("dropout must be in [0, 1)");
  if (model.in_dim == 0 || model.hidden_dim == 0 || model.embed_dim == 0) fail("layer widths must be positive");
}

double softplus(double x) noexcept {
  // log(1 + e^x) = max(x, 0) + log1p(e^-|x|)
  return std::max(x, 0.0) + std::log1p(std::exp(-std::abs(x)));
}

LossResult logistic_loss(std::span<const double> scores, std::span<const int> labels, double w0, double w1) {
  if (scores.size() != labels.size()) {
    throw Error(ErrorCode::ShapeError,
                std::to_string(scores.size()) + " scores vs " + std::to_string(labels.size()) + " labels");
  }
  LossResult r;
  r.grad.resize(scores.size());
  double total = 0.0;
  for (std::size_t k = 0; k < scores.size(); ++k) {
    const double s = scores[k];
    const double p = sigmoid(s);
    if (labels[k] == 1) {
      total += w1 * softplus(-s);
      r.grad[k] = w1 * (p - 1.0);
    } else {
      total += w0 * softplus(s);
      r.grad[k] = w0 * p;
    }
  }
  r.mean = scores.empty() ? 0.0 : total / static_cast<double>(scores.size());
  return r;
}

OptimizerState OptimizerState::zeros_like(const ModelParams& params) {
  OptimizerState s;
  s.m0 = s.v0 = Matrix::Zero(params.w0.rows(), params.w0.cols());
  s.m1 = s.v1 = Matrix::Zero(params.w1.rows(), params.w1.cols());
  return s;
}

namespace {

void adamw_update(Matrix& p, const Matrix& g, Matrix& m, Matrix& v, const TrainConfig& cfg, double bc1, double bc2) {
  p *= 1.0 - cfg.learning_rate * cfg.weight_decay;
  m = cfg.beta1 * m + (1.0 - cfg.beta1) * g;
  v = cfg.beta2 * v + (1.0 - cfg.beta2) * g.cwiseProduct(g);
  const double step_size = cfg.learning_rate / bc1;
  const double inv_sqrt_bc2 = 1.0 / std::sqrt(bc2);
  p.array() -= step_size * m.array() / ((v.array().sqrt() * inv_sqrt_bc2) + cfg.epsilon);
}

}  // namespace

void adamw_step(ModelParams& params, const Gradients& grads, OptimizerState& state, const TrainConfig& cfg) {
  if (grads.w0.rows() != params.w0.rows() || grads.w0.cols() != params.w0.cols() ||
      grads.w1.rows() != params.w1.rows() || grads.w1.cols() != params.w1.cols()) {
    throw Error(ErrorCode::ShapeError, "gradient shapes do not match parameters");
  }
  if (state.m0.size() == 0) state = OptimizerState::zeros_like(params);
  if (!grads.w0.allFinite() || !grads.w1.allFinite()) {
    throw Error(ErrorCode::NonFiniteGradient, "at optimizer step " + std::to_string(state.step + 1));
  }
  ++state.step;
  const double t = static_cast<double>(state.step);
  const double bc1 = 1.0 - std::pow(cfg.beta1, t);
  const double bc2 = 1.0 - std::pow(cfg.beta2, t);
  adamw_update(params.w0, grads.w0, state.m0, state.v0, cfg, bc1, bc2);
  adamw_update(params.w1, grads.w1, state.m1, state.v1, cfg, bc1, bc2);
}

std::vector<std::vector<LabeledPair>> make_batches(std::span<const LabeledPair> pairs, std::size_t batch_size,
                                                   std::uint64_t seed, std::uint64_t epoch) {
  if (batch_size == 0) throw Error(ErrorCode::ConfigError, "batch size must be >= 1");
  std::vector<LabeledPair> order(pairs.begin(), pairs.end());
  Rng rng = Rng::stream(seed, "batches", epoch);
  rng.shuffle(std::span(order));

  std::vector<std::vector<LabeledPair>> batches;
  for (std::size_t start = 0; start < order.size(); start += batch_size) {
    const std::size_t end = std::min(order.size(), start + batch_size);
    batches.emplace_back(order.begin() + static_cast<std::ptrdiff_t>(start),
                         order.begin() + static_cast<std::ptrdiff_t>(end));
  }
  return batches;
}

Subgraph induced_subgraph(const SparseMatrix& op, std::span<const LabeledPair> batch, int hops) {
  const std::size_t n = op.rows;
  std::vector<char> seen(n, 0);
  std::vector<NodeIndex> frontier;
  for (const auto& pair : batch) {
    for (NodeIndex x : {pair.u, pair.v}) {
      if (x >= n) throw Error(ErrorCode::IndexError, "batch node " + std::to_string(x) + " outside operator");
      if (!seen[x]) {
        seen[x] = 1;
        frontier.push_back(x);
      }
    }
  }
  for (int h = 0; h < hops && !frontier.empty(); ++h) {
    std::vector<NodeIndex> next;
    for (NodeIndex i : frontier) {
      for (std::size_t k = op.row_ptr[i]; k < op.row_ptr[i + 1]; ++k) {
        const NodeIndex j = op.col_idx[k];
        if (!seen[j] && op.values[k] != 0.0) {
          seen[j] = 1;
          next.push_back(j);
        }
      }
    }
    frontier = std::move(next);
  }

  Subgraph sub;
  std::vector<std::int64_t> local(n, -1);
  for (NodeIndex i = 0; i < n; ++i) {
    if (seen[i]) {
      local[i] = static_cast<std::int64_t>(sub.nodes.size());
      sub.nodes.push_back(i);
    }
  }

  SparseMatrix& m = sub.op;
  m.rows = m.cols = sub.nodes.size();
  m.row_ptr.assign(1, 0);
  for (NodeIndex g : sub.nodes) {
    for (std::size_t k = op.row_ptr[g]; k < op.row_ptr[g + 1]; ++k) {
      const std::int64_t j = local[op.col_idx[k]];
      if (j < 0) continue;
      m.col_idx.push_back(static_cast<NodeIndex>(j));
      m.values.push_back(op.values[k]);
    }
    m.row_ptr.push_back(m.col_idx.size());
  }

  sub.pairs.reserve(batch.size());
  for (const auto& pair : batch) {
    sub.pairs.push_back(NodePair{static_cast<NodeIndex>(local[pair.u]), static_cast<NodeIndex>(local[pair.v])});
  }
  return sub;
}

Matrix gather_rows(const Matrix& features, std::span<const NodeIndex> nodes) {
  Matrix out(static_cast<Eigen::Index>(nodes.size()), features.cols());
  for (std::size_t k = 0; k < nodes.size(); ++k) out.row(static_cast<Eigen::Index>(k)) = features.row(nodes[k]);
  return out;
}

namespace {

std::vector<NodePair> node_pairs(std::span<const LabeledPair> pairs) {
  std::vector<NodePair> out;
  out.reserve(pairs.size());
  for (const auto& p : pairs) out.push_back(NodePair{p.u, p.v});
  return out;
}

std::vector<int> labels_of(std::span<const LabeledPair> pairs) {
  std::vector<int> out;
  out.reserve(pairs.size());
  for (const auto& p : pairs) out.push_back(p.label);
  return out;
}

}  // namespace

std::vector<double> predict_probabilities(const ModelParams& params, const SparseMatrix& op, const Matrix& features,
                                          std::span<const LabeledPair> pairs) {
  const ForwardTrace trace = encode(params, op, features, false, 0);
  return decode_pairs(trace.z, node_pairs(pairs)).probabilities;
}

MetricReport evaluate_pairs(const ModelParams& params, const SparseMatrix& op, const Matrix& features,
                            std::span<const LabeledPair> pairs, double threshold) {
  const auto probs = predict_probabilities(params, op, features, pairs);
  const auto labels = labels_of(pairs);
  return evaluate_scores(probs, labels, threshold);
}

double dataset_loss(const ModelParams& params, const SparseMatrix& op, const Matrix& features,
                    std::span<const LabeledPair> pairs, const TrainConfig& cfg) {
  const ForwardTrace trace = encode(params, op, features, false, 0);
  const Decoded d = decode_pairs(trace.z, node_pairs(pairs));
  return logistic_loss(d.scores, labels_of(pairs), cfg.w0, cfg.w1).mean;
}

TrainResult train(const HeteroGraph& graph, const SparseMatrix& op, const Matrix& features, const EdgeSplit& split,
                  const TrainConfig& cfg) {
  cfg.validate();
  if (static_cast<std::size_t>(features.cols()) != cfg.model.in_dim) {
    throw Error(ErrorCode::ShapeError, "model input width " + std::to_string(cfg.model.in_dim) +
                                           " vs feature width " + std::to_string(features.cols()));
  }

  ModelParams params = init_params(cfg.seed, cfg.model);
  OptimizerState state = OptimizerState::zeros_like(params);
  const std::vector<LabeledPair> frozen_train = split.pairs(SplitPart::Train);
  const std::vector<LabeledPair> val_pairs = split.pairs(SplitPart::Val);
  const int hops = cfg.one_hop_batches ? 1 : 2;

  TrainResult result;
  result.log.initial_loss = dataset_loss(params, op, features, frozen_train, cfg);
  result.best = params;
  double best_auc = -std::numeric_limits<double>::infinity();

  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    const auto started = std::chrono::steady_clock::now();
    std::vector<LabeledPair> pool = frozen_train;
    if (cfg.resample_train_negatives) {
      pool = split.positives[SplitPart::Train];
      const auto neg = resample_train_negatives(graph, split, cfg.seed, static_cast<std::uint64_t>(epoch));
      pool.insert(pool.end(), neg.begin(), neg.end());
    }

    const auto batches = make_batches(pool, cfg.batch_size, cfg.seed, static_cast<std::uint64_t>(epoch));
    double loss_sum = 0.0;
    std::size_t seen = 0;
    for (std::size_t b = 0; b < batches.size(); ++b) {
      const auto& batch = batches[b];
      const std::uint64_t dropout_seed =
          Rng::stream(cfg.seed, "dropout", (static_cast<std::uint64_t>(epoch) << 32) | b).next_u64();

      Subgraph sub;
      const SparseMatrix* batch_op = &op;
      const Matrix* batch_x = &features;
      Matrix local_x;
      std::vector<NodePair> pairs;
      if (cfg.full_graph_batching) {
        pairs = node_pairs(batch);
      } else {
        sub = induced_subgraph(op, batch, hops);
        local_x = gather_rows(features, sub.nodes);
        batch_op = &sub.op;
        batch_x = &local_x;
        pairs = sub.pairs;
      }

      ForwardTrace trace = encode(params, *batch_op, *batch_x, true, dropout_seed);
      decode_pairs(trace, pairs);
      LossResult loss = logistic_loss(trace.scores, labels_of(batch), cfg.w0, cfg.w1);
      for (double& g : loss.grad) g /= static_cast<double>(batch.size());
      const Gradients grads = backward(trace, loss.grad);
      try {
        adamw_step(params, grads, state, cfg);
      } catch (const Error& e) {
        if (e.code() != ErrorCode::NonFiniteGradient) throw;
        throw Error(ErrorCode::NonFiniteGradient, "epoch " + std::to_string(epoch) + ", batch " + std::to_string(b));
      }
      loss_sum += loss.mean * static_cast<double>(batch.size());
      seen += batch.size();
    }

    EpochRecord rec;
    rec.epoch = epoch;
    rec.loss = seen ? loss_sum / static_cast<double>(seen) : 0.0;
    rec.val = evaluate_pairs(params, op, features, val_pairs, cfg.threshold);
    rec.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    if (rec.val.roc_auc > best_auc) {
      best_auc = rec.val.roc_auc;
      result.best = params;
      result.log.best_epoch = epoch;
    }
    spdlog::debug("epoch {} loss {:.6f} val_rocauc {:.4f}", epoch, rec.loss, rec.val.roc_auc);
    result.log.epochs.push_back(rec);
  }
  result.last = std::move(params);
  return result;
}

std::string format_train_log(const TrainLog& log) {
  std::ostringstream os;
  os << "epoch\tloss\tval_acc\tval_f1\tval_prec\tval_rec\tval_rocauc\tval_prauc\tval_spec\n";
  for (const auto& r : log.epochs) {
    os << r.epoch << '\t' << format_double(r.loss) << '\t' << metric_row(r.val) << '\n';
  }
  return os.str();
}

}  // namespace hetlink
