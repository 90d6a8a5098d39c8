#pragma once

#include <Eigen/Dense>
#include <vector>

#include "samsbo/dataset.hpp"
#include "samsbo/kernels.hpp"

namespace samsbo {

/// Marginal likelihood and GP weights for two tasks with a unit-diagonal
/// correlation matrix, as a function of the off-diagonal entry r.
///
/// With the data grouped by task, K + σ_n² I = [[A, rC], [rCᵀ, B]]. One
/// O(n³) precomputation diagonalizes W = L_B⁻¹ CᵀA⁻¹C L_B⁻ᵀ = QΘQᵀ, after
/// which log det(K + σ_n² I) = log det A + log det B + Σ log(1 − r²θ_k) and
/// the quadratic form cost O(n) per r, and the weight vector O(n²).
class TwoTaskLikelihood {
 public:
  TwoTaskLikelihood(const MultiTaskDataset& data, const KernelParams& params);

  double log_likelihood(double r) const;
  /// (K_r + σ_n² I)⁻¹ ỹ in the original row order of the dataset.
  Eigen::VectorXd alpha(double r) const;

  Eigen::Index size() const { return n1_ + n2_; }

 private:
  Eigen::Index n1_ = 0;
  Eigen::Index n2_ = 0;
  std::vector<Eigen::Index> order_;  // grouped position -> original row
  double constant_ = 0.0;            // r-independent part of the log likelihood
  Eigen::VectorXd theta_;
  Eigen::VectorXd a_;
  Eigen::VectorXd b_;
  Eigen::VectorXd ainv_y1_;
  Eigen::MatrixXd ainv_c_;   // A⁻¹C
  Eigen::MatrixXd back_;     // L_B⁻ᵀ Q
};

}  // namespace samsbo
