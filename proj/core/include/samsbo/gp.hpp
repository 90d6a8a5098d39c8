#pragma once

#include <Eigen/Dense>
#include <cstdint>

#include "samsbo/correlation.hpp"
#include "samsbo/dataset.hpp"
#include "samsbo/kernels.hpp"

namespace samsbo {

struct Prediction {
  double mean = 0.0;
  double variance = 0.0;
};

struct BatchPrediction {
  Eigen::VectorXd mean;
  Eigen::VectorXd variance;
};

/// Exact multi-task GP posterior under the separable kernel Σ·k.
/// Immutable after construction; concurrent queries are safe.
class Posterior {
 public:
  /// Factorizes K + σ_n² I. A diagonal jitter of 1e-10·σ_f² is always added
  /// and escalated tenfold up to 1e-6·σ_f² on failure; beyond that a
  /// NumericalError is thrown.
  Posterior(MultiTaskDataset data, CorrelationMatrix sigma, KernelParams params);

  Prediction predict(const Eigen::Ref<const Eigen::VectorXd>& x, TaskIndex z) const;
  /// Rows of `points` are query inputs, all on task `z`.
  BatchPrediction predict_batch(const Eigen::MatrixXd& points, TaskIndex z) const;
  Eigen::VectorXd mean(const Eigen::MatrixXd& points, TaskIndex z) const;

  /// Cross-covariance between observations and queries, K((X,Z), (points,z)).
  Eigen::MatrixXd cross_covariance(const Eigen::MatrixXd& points, TaskIndex z) const;
  /// L⁻¹·cross_covariance; posterior covariance of queries a, b is
  /// prior(a, b) − V_aᵀ V_b.
  Eigen::MatrixXd whitened_cross(const Eigen::MatrixXd& points, TaskIndex z) const;

  /// √(αᵀ K α): RKHS norm of the posterior mean in the native space of Σ·k.
  double mean_rkhs_norm() const;

  const MultiTaskDataset& dataset() const { return data_; }
  const CorrelationMatrix& sigma() const { return sigma_; }
  const KernelParams& params() const { return params_; }
  /// Lower Cholesky factor of K + σ_n² I (+ jitter).
  const Eigen::MatrixXd& chol() const { return chol_; }
  /// (K + σ_n² I)⁻¹ ỹ.
  const Eigen::VectorXd& alpha() const { return alpha_; }
  double jitter() const { return jitter_; }
  /// Noise-free multi-task Gram matrix of the training inputs.
  const Eigen::MatrixXd& gram() const { return gram_; }

 private:
  MultiTaskDataset data_;
  CorrelationMatrix sigma_;
  KernelParams params_;
  Eigen::MatrixXd gram_;
  Eigen::MatrixXd chol_;
  Eigen::VectorXd alpha_;
  double jitter_ = 0.0;
};

Posterior fit(const MultiTaskDataset& data, const CorrelationMatrix& sigma,
              const KernelParams& params);

Prediction predict(const Posterior& posterior, const Eigen::Ref<const Eigen::VectorXd>& x,
                   TaskIndex z);

/// log N(ỹ | 0, K + σ_n² I).
double log_marginal_likelihood(const MultiTaskDataset& data,
                               const CorrelationMatrix& sigma,
                               const KernelParams& params);

double posterior_mean_rkhs_norm(const Posterior& posterior);

/// Posterior means at the rows of `points` on task `z`.
Eigen::VectorXd posterior_mean_values(const Posterior& posterior,
                                      const Eigen::MatrixXd& points, TaskIndex z);

/// Lower Cholesky factor of `system` using the jitter policy above. Returns the
/// factor and writes the jitter used to `jitter_out`.
Eigen::MatrixXd factorize_with_jitter(const Eigen::MatrixXd& system,
                                      double signal_variance, double* jitter_out);

/// Number of predictive variances clamped at zero after falling below −1e-8.
std::uint64_t variance_clamp_events();

}  // namespace samsbo
