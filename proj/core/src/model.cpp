#include "hetlink/model.hpp"

#include <cmath>
#include <string>

#include "hetlink/error.hpp"
#include "hetlink/rng.hpp"

namespace hetlink {

std::string_view to_string(FinalActivation act) noexcept { return act == FinalActivation::Relu ? "relu" : "none"; }

FinalActivation parse_final_activation(std::string_view text) {
  if (text == "relu") return FinalActivation::Relu;
  if (text == "none") return FinalActivation::None;
  throw Error(ErrorCode::ConfigError, "final activation must be relu|none, got '" + std::string(text) + "'");
}

namespace {

Matrix glorot(Rng& rng, std::size_t fan_in, std::size_t fan_out) {
  const double bound = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
  Matrix m(static_cast<Eigen::Index>(fan_in), static_cast<Eigen::Index>(fan_out));
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) m(i, j) = rng.uniform(-bound, bound);
  }
  return m;
}

Matrix dropout_mask(std::uint64_t seed, std::uint64_t layer, Eigen::Index rows, Eigen::Index cols, double p) {
  Rng rng = Rng::stream(seed, "dropout", layer);
  const double keep_scale = 1.0 / (1.0 - p);
  Matrix mask(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    for (Eigen::Index j = 0; j < cols; ++j) mask(i, j) = rng.uniform() < p ? 0.0 : keep_scale;
  }
  return mask;
}

}  // namespace

ModelParams init_params(std::uint64_t seed, const ModelConfig& config) {
  ModelParams params;
  params.config = config;
  Rng rng = Rng::stream(seed, "init");
  params.w0 = glorot(rng, config.in_dim, config.hidden_dim);
  params.w1 = glorot(rng, config.hidden_dim, config.embed_dim);
  return params;
}

ForwardTrace encode(const ModelParams& params, const SparseMatrix& op, const Matrix& features, bool training,
                    std::uint64_t dropout_seed) {
  if (static_cast<std::size_t>(features.cols()) != static_cast<std::size_t>(params.w0.rows())) {
    throw Error(ErrorCode::ShapeError, "feature width " + std::to_string(features.cols()) + " vs W0 input " +
                                           std::to_string(params.w0.rows()));
  }
  if (op.rows != static_cast<std::size_t>(features.rows()) || op.cols != op.rows) {
    throw Error(ErrorCode::ShapeError, "operator " + std::to_string(op.rows) + "x" + std::to_string(op.cols) +
                                           " vs " + std::to_string(features.rows()) + " feature rows");
  }
  if (params.w1.rows() != params.w0.cols()) throw Error(ErrorCode::ShapeError, "W0/W1 inner dimensions differ");

  ForwardTrace t;
  t.op = &op;
  t.features = &features;
  t.w1 = params.w1;
  t.final_activation = params.config.final_activation;
  const double p = params.config.dropout;
  const bool drop = training && p > 0.0;

  // A (X W0) is cheaper than (A X) W0 since the hidden width is smaller.
  Matrix xw = features * params.w0;
  t.h1_pre = op.multiply(xw);
  t.h1 = t.h1_pre.cwiseMax(0.0);
  if (drop) {
    t.mask1 = dropout_mask(dropout_seed, 1, t.h1.rows(), t.h1.cols(), p);
    t.h1.array() *= t.mask1.array();
  }

  Matrix hw = t.h1 * params.w1;
  t.z_pre = op.multiply(hw);
  t.z = t.final_activation == FinalActivation::Relu ? Matrix(t.z_pre.cwiseMax(0.0)) : t.z_pre;
  if (drop) {
    t.mask2 = dropout_mask(dropout_seed, 2, t.z.rows(), t.z.cols(), p);
    t.z.array() *= t.mask2.array();
  }
  return t;
}

double sigmoid(double s) noexcept {
  if (s >= 0) return 1.0 / (1.0 + std::exp(-s));
  const double e = std::exp(s);
  return e / (1.0 + e);
}

Decoded decode_pairs(const Matrix& z, std::span<const NodePair> pairs) {
  Decoded out;
  out.scores.reserve(pairs.size());
  out.probabilities.reserve(pairs.size());
  const auto n = static_cast<std::size_t>(z.rows());
  for (const auto& pair : pairs) {
    if (pair.u >= n || pair.v >= n) {
      throw Error(ErrorCode::IndexError,
                  "pair (" + std::to_string(pair.u) + ", " + std::to_string(pair.v) + ") with " + std::to_string(n) +
                      " embeddings");
    }
    // Canonical order makes s(i,j) and s(j,i) bit-identical.
    const NodeIndex a = std::min(pair.u, pair.v);
    const NodeIndex b = std::max(pair.u, pair.v);
    double s = 0.0;
    for (Eigen::Index k = 0; k < z.cols(); ++k) s += z(a, k) * z(b, k);
    out.scores.push_back(s);
    out.probabilities.push_back(sigmoid(s));
  }
  return out;
}

const ForwardTrace& decode_pairs(ForwardTrace& trace, std::span<const NodePair> pairs) {
  Decoded d = decode_pairs(trace.z, pairs);
  trace.pairs.assign(pairs.begin(), pairs.end());
  trace.scores = std::move(d.scores);
  trace.probabilities = std::move(d.probabilities);
  return trace;
}

Gradients backward(const ForwardTrace& t, std::span<const double> grad_scores) {
  if (!t.has_intermediates() || t.h1_pre.size() == 0 || t.z_pre.size() == 0) {
    throw Error(ErrorCode::StaleTrace, "trace has no retained intermediates");
  }
  if (t.pairs.size() != grad_scores.size() || t.scores.size() != t.pairs.size()) {
    throw Error(ErrorCode::StaleTrace, "trace holds " + std::to_string(t.pairs.size()) + " decoded pairs, got " +
                                           std::to_string(grad_scores.size()) + " upstream gradients");
  }

  const SparseMatrix& op = *t.op;
  Matrix dz = Matrix::Zero(t.z.rows(), t.z.cols());
  for (std::size_t k = 0; k < t.pairs.size(); ++k) {
    const double g = grad_scores[k];
    if (g == 0.0) continue;
    const auto [u, v] = t.pairs[k];
    dz.row(u).noalias() += g * t.z.row(v);
    dz.row(v).noalias() += g * t.z.row(u);
  }

  // Layer 2: Z = act(A H1 W1) * mask2
  Matrix dz_pre = std::move(dz);
  if (t.mask2.size() > 0) dz_pre.array() *= t.mask2.array();
  if (t.final_activation == FinalActivation::Relu) {
    dz_pre.array() *= (t.z_pre.array() > 0.0).cast<double>();
  }
  // The propagation operator is symmetric, so A^T dZ = A dZ.
  Matrix dhw = op.multiply(dz_pre);
  Gradients g;
  g.w1.noalias() = t.h1.transpose() * dhw;

  // Layer 1: H1 = relu(A X W0) * mask1
  Matrix dh1 = dhw * t.w1.transpose();
  if (t.mask1.size() > 0) dh1.array() *= t.mask1.array();
  dh1.array() *= (t.h1_pre.array() > 0.0).cast<double>();
  Matrix dxw = op.multiply(dh1);
  g.w0.noalias() = t.features->transpose() * dxw;
  return g;
}

}  // namespace hetlink
