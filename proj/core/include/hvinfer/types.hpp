#pragma once

#include <Eigen/Dense>

namespace hvinfer {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

}  // namespace hvinfer
