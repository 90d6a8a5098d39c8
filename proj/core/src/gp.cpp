#include "samsbo/gp.hpp"

#include <atomic>
#include <cmath>
#include <iostream>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "samsbo/errors.hpp"

namespace samsbo {

namespace {

constexpr double kInitialJitter = 1e-10;
constexpr double kMaximumJitter = 1e-6;
constexpr double kClampWarnBelow = -1e-8;

std::atomic<std::uint64_t> g_clamp_events{0};
std::atomic<bool> g_clamp_warned{false};

double clamp_variance(double v) {
  if (v < 0.0) {
    if (v < kClampWarnBelow) {
      g_clamp_events.fetch_add(1, std::memory_order_relaxed);
      if (!g_clamp_warned.exchange(true)) {
        std::cerr << "warning: predictive variance " << v
                  << " clamped to zero (further occurrences are counted only)\n";
      }
    }
    return 0.0;
  }
  return v;
}

}  // namespace

std::uint64_t variance_clamp_events() { return g_clamp_events.load(); }

Eigen::MatrixXd factorize_with_jitter(const Eigen::MatrixXd& system,
                                      double signal_variance, double* jitter_out) {
  const Eigen::Index n = system.rows();
  for (double jitter = kInitialJitter; jitter <= kMaximumJitter * (1 + 1e-9);
       jitter *= 10.0) {
    Eigen::MatrixXd shifted = system;
    shifted.diagonal().array() += jitter * signal_variance;
    Eigen::LLT<Eigen::MatrixXd> llt(shifted);
    if (llt.info() == Eigen::Success) {
      if (jitter_out != nullptr) *jitter_out = jitter * signal_variance;
      return llt.matrixL();
    }
  }
  std::ostringstream msg;
  msg << "GP system matrix (" << n << "x" << n
      << ") is not positive definite after jitter " << kMaximumJitter * signal_variance;
  throw NumericalError(msg.str());
}

Posterior::Posterior(MultiTaskDataset data, CorrelationMatrix sigma, KernelParams params)
    : data_(std::move(data)), sigma_(std::move(sigma)), params_(std::move(params)) {
  params_.validate();
  if (params_.dimension() != data_.dimension()) {
    throw std::invalid_argument("lengthscale count differs from input dimension");
  }
  if (sigma_.size() != data_.num_tasks()) {
    throw std::invalid_argument("correlation matrix size differs from task count");
  }
  gram_ = samsbo::gram(data_, sigma_, params_);
  const Eigen::Index n = data_.size();
  if (n == 0) {
    chol_.resize(0, 0);
    alpha_.resize(0);
    return;
  }
  Eigen::MatrixXd system = gram_;
  system.diagonal().array() += params_.noise_variance;
  chol_ = factorize_with_jitter(system, params_.signal_variance, &jitter_);
  const auto l = chol_.triangularView<Eigen::Lower>();
  alpha_ = chol_.transpose().triangularView<Eigen::Upper>().solve(l.solve(data_.observations()));
}

Eigen::MatrixXd Posterior::cross_covariance(const Eigen::MatrixXd& points,
                                            TaskIndex z) const {
  z.check(sigma_.size());
  const Eigen::MatrixXd base = se_kernel_matrix(data_.inputs(), points, params_);
  Eigen::MatrixXd out = base;
  for (Eigen::Index i = 0; i < base.rows(); ++i) {
    out.row(i) *= sigma_(data_.task(i).zero_based(), z.zero_based());
  }
  return out;
}

Eigen::MatrixXd Posterior::whitened_cross(const Eigen::MatrixXd& points,
                                          TaskIndex z) const {
  Eigen::MatrixXd kx = cross_covariance(points, z);
  if (data_.size() == 0) return kx;
  chol_.triangularView<Eigen::Lower>().solveInPlace(kx);
  return kx;
}

BatchPrediction Posterior::predict_batch(const Eigen::MatrixXd& points, TaskIndex z) const {
  z.check(sigma_.size());
  const double prior = sigma_(z.zero_based(), z.zero_based()) * params_.signal_variance;
  BatchPrediction out;
  if (data_.size() == 0) {
    out.mean = Eigen::VectorXd::Zero(points.rows());
    out.variance = Eigen::VectorXd::Constant(points.rows(), prior);
    return out;
  }
  Eigen::MatrixXd kx = cross_covariance(points, z);
  out.mean = kx.transpose() * alpha_;
  chol_.triangularView<Eigen::Lower>().solveInPlace(kx);
  out.variance = (prior - kx.colwise().squaredNorm().array()).matrix().transpose();
  for (Eigen::Index i = 0; i < out.variance.size(); ++i) {
    out.variance(i) = clamp_variance(out.variance(i));
  }
  return out;
}

Eigen::VectorXd Posterior::mean(const Eigen::MatrixXd& points, TaskIndex z) const {
  if (data_.size() == 0) return Eigen::VectorXd::Zero(points.rows());
  return cross_covariance(points, z).transpose() * alpha_;
}

Prediction Posterior::predict(const Eigen::Ref<const Eigen::VectorXd>& x,
                              TaskIndex z) const {
  const Eigen::MatrixXd point = x.transpose();
  const BatchPrediction b = predict_batch(point, z);
  return {b.mean(0), b.variance(0)};
}

double Posterior::mean_rkhs_norm() const {
  if (data_.size() == 0) return 0.0;
  return std::sqrt(std::max(0.0, alpha_.dot(gram_ * alpha_)));
}

Posterior fit(const MultiTaskDataset& data, const CorrelationMatrix& sigma,
              const KernelParams& params) {
  return Posterior(data, sigma, params);
}

Prediction predict(const Posterior& posterior, const Eigen::Ref<const Eigen::VectorXd>& x,
                   TaskIndex z) {
  return posterior.predict(x, z);
}

double log_marginal_likelihood(const MultiTaskDataset& data,
                               const CorrelationMatrix& sigma,
                               const KernelParams& params) {
  if (data.empty()) return 0.0;
  const Posterior post(data, sigma, params);
  const double n = static_cast<double>(data.size());
  return -0.5 * data.observations().dot(post.alpha()) -
         post.chol().diagonal().array().log().sum() -
         0.5 * n * std::log(2.0 * std::numbers::pi);
}

double posterior_mean_rkhs_norm(const Posterior& posterior) {
  return posterior.mean_rkhs_norm();
}

Eigen::VectorXd posterior_mean_values(const Posterior& posterior,
                                      const Eigen::MatrixXd& points, TaskIndex z) {
  return posterior.mean(points, z);
}

}  // namespace samsbo
