#pragma once

#include <Eigen/Dense>

namespace samsbo::linalg {

/// Symmetric PSD square root; negative eigenvalues from round-off are clamped.
Eigen::MatrixXd sym_sqrt(const Eigen::MatrixXd& a);

/// Largest singular value.
double spectral_norm(const Eigen::MatrixXd& a);

double min_eigenvalue(const Eigen::MatrixXd& symmetric);
double max_eigenvalue(const Eigen::MatrixXd& symmetric);

/// Cholesky with escalating diagonal jitter: starts at `initial` (absolute),
/// multiplies by 10 until `maximum`, then throws NumericalError.
/// Returns the jitter that was finally added (0 when none was needed).
struct JitteredCholesky {
  Eigen::LLT<Eigen::MatrixXd> llt;
  double jitter = 0.0;
};
JitteredCholesky cholesky_with_jitter(const Eigen::MatrixXd& a, double initial,
                                      double maximum);

/// Type-7 (linear interpolation between order statistics) quantile.
double quantile(Eigen::VectorXd values, double q);

}  // namespace samsbo::linalg
