#pragma once

#include <Eigen/Dense>

namespace pclqr {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using ComplexVector = Eigen::VectorXcd;

}  // namespace pclqr
