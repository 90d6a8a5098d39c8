#pragma once

#include <Eigen/Dense>

#include "samsbo/correlation.hpp"
#include "samsbo/dataset.hpp"

namespace samsbo {

/// Norm selector used for the input space (p) and the task space (q).
enum class Norm { L1, L2, LInf };

/// Hyperparameters of the squared-exponential base kernel plus the
/// observation noise of the GP likelihood.
struct KernelParams {
  double signal_variance = 1.0;
  Eigen::VectorXd lengthscales = Eigen::VectorXd::Ones(1);
  double noise_variance = 1e-4;

  int dimension() const { return static_cast<int>(lengthscales.size()); }
  /// Throws std::invalid_argument on non-positive variance or lengthscale.
  void validate() const;
};

/// σ_f² · exp(−½ (x−x')ᵀ Δ⁻² (x−x')), Δ = diag(lengthscales).
double se_kernel(const Eigen::Ref<const Eigen::VectorXd>& x,
                 const Eigen::Ref<const Eigen::VectorXd>& x_prime,
                 const KernelParams& params);

/// Cross-kernel matrix between the rows of `a` and the rows of `b`.
Eigen::MatrixXd se_kernel_matrix(const Eigen::MatrixXd& a,
                                 const Eigen::MatrixXd& b,
                                 const KernelParams& params);

/// Σ_{z,z'} · se_kernel(x, x').
double multitask_kernel(const Eigen::Ref<const Eigen::VectorXd>& x, TaskIndex z,
                        const Eigen::Ref<const Eigen::VectorXd>& x_prime,
                        TaskIndex z_prime, const CorrelationMatrix& sigma,
                        const KernelParams& params);

/// Multi-task Gram: entry (i, j) = Σ_{z_i z_j} k(x_i, x_j). No noise term.
Eigen::MatrixXd gram(const MultiTaskDataset& data, const CorrelationMatrix& sigma,
                     const KernelParams& params);

/// Applies task weights Σ_{z_i z_j} to a precomputed base Gram k(X, X).
Eigen::MatrixXd apply_task_weights(const Eigen::MatrixXd& base_gram,
                                   const std::vector<TaskIndex>& tasks,
                                   const Eigen::MatrixXd& sigma);

/// Lipschitz constant L_k of the SE kernel in its first argument with respect
/// to ‖·‖_p, from the analytic gradient bound. For p = ∞ this is
/// σ_f²·√d / (ϑ_min·√e); for p ∈ {1, 2} it is σ_f² / (ϑ_min·√e).
double kernel_lipschitz(const KernelParams& params, Norm p);

/// Numerical counterpart of kernel_lipschitz: maximizes the dual norm of the
/// kernel gradient over a lattice of differences in [−1, 1]^d (d ≤ 3) or
/// random differences otherwise. Never exceeds the analytic value.
double kernel_lipschitz_numeric(const KernelParams& params, Norm p,
                                int nodes_per_axis = 401);

/// L_K = q·L_k with q the largest diagonal entry of Σ.
double multitask_lipschitz(const CorrelationMatrix& sigma, double kernel_lipschitz);

}  // namespace samsbo
