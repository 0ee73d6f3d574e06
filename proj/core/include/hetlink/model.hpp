#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "hetlink/graph.hpp"
#include "hetlink/matrix.hpp"

namespace hetlink {

enum class FinalActivation { Relu, None };

std::string_view to_string(FinalActivation act) noexcept;
FinalActivation parse_final_activation(std::string_view text);

struct ModelConfig {
  std::size_t in_dim = 1792;
  std::size_t hidden_dim = 112;
  std::size_t embed_dim = 28;
  double dropout = 0.5;
  FinalActivation final_activation = FinalActivation::Relu;
};

/// Two bias-free GCN weight matrices.
struct ModelParams {
  ModelConfig config;
  Matrix w0;  // in_dim x hidden_dim
  Matrix w1;  // hidden_dim x embed_dim
};

/// Glorot-uniform weights, bound sqrt(6 / (fan_in + fan_out)).
ModelParams init_params(std::uint64_t seed, const ModelConfig& config);

struct NodePair {
  NodeIndex u = 0;
  NodeIndex v = 0;
};

/// Intermediates of one forward pass, retained for the backward pass.
///
/// The trace refers to the operator and features it was computed from;
/// both must outlive it.
struct ForwardTrace {
  const SparseMatrix* op = nullptr;
  const Matrix* features = nullptr;
  Matrix w1;  // copy of the second-layer weights used in the forward pass
  FinalActivation final_activation = FinalActivation::Relu;

  Matrix h1_pre;  // A X W0
  Matrix h1;      // relu(h1_pre), dropped out
  Matrix z_pre;   // A H1 W1
  Matrix z;       // act(z_pre), dropped out
  Matrix mask1;   // empty in evaluation mode; entries 0 or 1/(1-p)
  Matrix mask2;

  std::vector<NodePair> pairs;  // filled by decode_pairs(trace, ...)
  std::vector<double> scores;
  std::vector<double> probabilities;

  bool has_intermediates() const noexcept { return op != nullptr && features != nullptr && z.size() > 0; }
};

/// Two-layer GCN forward pass.
///
/// H1 = relu(A X W0) then dropout; Z = act(A H1 W1) then dropout. Dropout is
/// inverted (survivors scaled by 1/(1-p)) and only active when `training`.
ForwardTrace encode(const ModelParams& params, const SparseMatrix& op, const Matrix& features, bool training,
                    std::uint64_t dropout_seed);

inline ForwardTrace encode(const ModelParams& params, const PropagationOperator& op, const Matrix& features,
                           bool training, std::uint64_t dropout_seed) {
  return encode(params, op.matrix, features, training, dropout_seed);
}

struct Decoded {
  std::vector<double> scores;         // s = sum_k z_ik z_jk
  std::vector<double> probabilities;  // sigmoid(s)
};

double sigmoid(double s) noexcept;

/// Hadamard-product-sum decoder over rows of `z`.
Decoded decode_pairs(const Matrix& z, std::span<const NodePair> pairs);

/// Decodes and records the pairs in the trace for a later backward pass.
const ForwardTrace& decode_pairs(ForwardTrace& trace, std::span<const NodePair> pairs);

struct Gradients {
  Matrix w0;
  Matrix w1;
};

/// Gradient of sum_t grad_scores[t] * s_t with respect to W0 and W1.
///
/// Replays the dropout masks stored in the trace and sends each pair's
/// gradient to both endpoints. Throws StaleTrace if the trace lacks
/// intermediates or decoded pairs.
Gradients backward(const ForwardTrace& trace, std::span<const double> grad_scores);

}  // namespace hetlink
