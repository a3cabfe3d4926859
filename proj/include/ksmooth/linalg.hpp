#pragma once

#include <Eigen/Dense>

#include <complex>

namespace ksmooth {

using cplx = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;
using RealVector = Eigen::VectorXd;
using Index = Eigen::Index;

inline constexpr cplx kI{0.0, 1.0};

// Largest singular value (spectral norm). Full SVD; fine at desk scale.
double operator_norm(const Matrix& m);

// max_jk |m_jk|
double max_abs(const Matrix& m);

}  // namespace ksmooth
