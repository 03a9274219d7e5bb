#pragma once

#include <functional>

#include <Eigen/Dense>

namespace fq {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

// Symmetric linear map given only through its action.
using LinearOperator = std::function<Vector(const Vector&)>;

}  // namespace fq
