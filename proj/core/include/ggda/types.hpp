#pragma once

#include <Eigen/Dense>
#include <cstdint>

namespace ggda {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Label value for vertices without a class.
inline constexpr int kUnlabeled = -1;

}  // namespace ggda
