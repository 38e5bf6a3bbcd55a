#pragma once

#include <Eigen/Dense>
#include <cstdint>

namespace stochinv {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

} // namespace stochinv
