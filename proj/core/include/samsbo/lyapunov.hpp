#pragma once

#include <Eigen/Dense>

namespace samsbo {

/// Solves A·P + P·Aᵀ + Q = 0 for Hurwitz A (Bartels–Stewart on the complex
/// Schur form). Throws StabilityError when an eigenvalue of A has a
/// nonnegative real part.
Eigen::MatrixXd lyapunov_solve(const Eigen::MatrixXd& a, const Eigen::MatrixXd& q);

/// Largest real part over the eigenvalues of A.
double spectral_abscissa(const Eigen::MatrixXd& a);

/// H₂ norm √trace(C P Cᵀ) of ẋ = Ax + Bw, z = Cx, with A P + P Aᵀ + B Bᵀ = 0.
double h2_norm(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b, const Eigen::MatrixXd& c);

}  // namespace samsbo
