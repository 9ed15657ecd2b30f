#pragma once

#include <Eigen/Dense>
#include <complex>

namespace maser {

using Complex = std::complex<double>;
using Ket = Eigen::VectorXcd;
using Operator = Eigen::MatrixXcd;
using DensityMatrix = Eigen::MatrixXcd;
using Superoperator = Eigen::MatrixXcd;

inline constexpr Complex I{0.0, 1.0};

}  // namespace maser
