#pragma once

#include <Eigen/Dense>

namespace hetlink {

/// Dense row-major storage used for features, activations and weights.
using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;

}  // namespace hetlink
