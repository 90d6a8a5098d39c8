#include "samsbo/kernels.hpp"

#include <cmath>
#include <random>
#include <sstream>
#include <stdexcept>

namespace samsbo {

namespace {

void check_same_dimension(Eigen::Index a, Eigen::Index b, Eigen::Index d) {
  if (a != d || b != d) {
    std::ostringstream msg;
    msg << "dimension mismatch: inputs of size " << a << " and " << b
        << " against " << d << " lengthscales";
    throw std::invalid_argument(msg.str());
  }
}

double dual_norm(const Eigen::VectorXd& g, Norm p) {
  switch (p) {
    case Norm::LInf: return g.lpNorm<1>();
    case Norm::L2: return g.norm();
    case Norm::L1: return g.lpNorm<Eigen::Infinity>();
  }
  return 0.0;
}

// Dual norm of ∇_x k(x, x') at difference r = x − x'.
double gradient_dual_norm(const Eigen::VectorXd& r, const KernelParams& params,
                          Norm p) {
  const Eigen::ArrayXd scaled = r.array() / params.lengthscales.array();
  const double k = params.signal_variance * std::exp(-0.5 * scaled.square().sum());
  const Eigen::VectorXd grad =
      (k * r.array() / params.lengthscales.array().square()).matrix();
  return dual_norm(grad, p);
}

}  // namespace

void KernelParams::validate() const {
  if (!(signal_variance > 0.0) || !std::isfinite(signal_variance)) {
    throw std::invalid_argument("signal variance must be positive");
  }
  if (lengthscales.size() == 0) {
    throw std::invalid_argument("at least one lengthscale is required");
  }
  if (!(lengthscales.array() > 0.0).all() || !lengthscales.allFinite()) {
    throw std::invalid_argument("lengthscales must be positive");
  }
  if (!(noise_variance >= 0.0) || !std::isfinite(noise_variance)) {
    throw std::invalid_argument("noise variance must be nonnegative");
  }
}

double se_kernel(const Eigen::Ref<const Eigen::VectorXd>& x,
                 const Eigen::Ref<const Eigen::VectorXd>& x_prime,
                 const KernelParams& params) {
  check_same_dimension(x.size(), x_prime.size(), params.lengthscales.size());
  const double q =
      ((x - x_prime).array() / params.lengthscales.array()).square().sum();
  return params.signal_variance * std::exp(-0.5 * q);
}

Eigen::MatrixXd se_kernel_matrix(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b,
                                 const KernelParams& params) {
  const Eigen::Index d = params.lengthscales.size();
  if (a.rows() > 0 && b.rows() > 0) check_same_dimension(a.cols(), b.cols(), d);
  const Eigen::RowVectorXd inv = params.lengthscales.cwiseInverse().transpose();
  const Eigen::MatrixXd as = a.array().rowwise() * inv.array();
  const Eigen::MatrixXd bs = b.array().rowwise() * inv.array();
  const Eigen::VectorXd an = as.rowwise().squaredNorm();
  const Eigen::VectorXd bn = bs.rowwise().squaredNorm();
  Eigen::MatrixXd sq = -2.0 * as * bs.transpose();
  sq.colwise() += an;
  sq.rowwise() += bn.transpose();
  return params.signal_variance * (-0.5 * sq.array().max(0.0)).exp().matrix();
}

double multitask_kernel(const Eigen::Ref<const Eigen::VectorXd>& x, TaskIndex z,
                        const Eigen::Ref<const Eigen::VectorXd>& x_prime,
                        TaskIndex z_prime, const CorrelationMatrix& sigma,
                        const KernelParams& params) {
  z.check(sigma.size());
  z_prime.check(sigma.size());
  return sigma(z.zero_based(), z_prime.zero_based()) * se_kernel(x, x_prime, params);
}

Eigen::MatrixXd apply_task_weights(const Eigen::MatrixXd& base_gram,
                                   const std::vector<TaskIndex>& tasks,
                                   const Eigen::MatrixXd& sigma) {
  const auto n = static_cast<Eigen::Index>(tasks.size());
  Eigen::MatrixXd out(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    const Eigen::Index zj = tasks[static_cast<std::size_t>(j)].zero_based();
    for (Eigen::Index i = 0; i < n; ++i) {
      out(i, j) = sigma(tasks[static_cast<std::size_t>(i)].zero_based(), zj) *
                  base_gram(i, j);
    }
  }
  return out;
}

Eigen::MatrixXd gram(const MultiTaskDataset& data, const CorrelationMatrix& sigma,
                     const KernelParams& params) {
  if (sigma.size() != data.num_tasks()) {
    throw std::invalid_argument("correlation matrix size differs from task count");
  }
  const Eigen::MatrixXd base = se_kernel_matrix(data.inputs(), data.inputs(), params);
  return apply_task_weights(base, data.tasks(), sigma.matrix());
}

double kernel_lipschitz(const KernelParams& params, Norm p) {
  params.validate();
  const double lmin = params.lengthscales.minCoeff();
  const double base = params.signal_variance / (lmin * std::sqrt(std::exp(1.0)));
  if (p == Norm::LInf) return base * std::sqrt(static_cast<double>(params.dimension()));
  return base;
}

double kernel_lipschitz_numeric(const KernelParams& params, Norm p,
                                int nodes_per_axis) {
  params.validate();
  const int d = params.dimension();
  double best = 0.0;
  if (d <= 3) {
    // The gradient norm is even in every coordinate of r, so [0, 1]^d suffices.
    Eigen::VectorXi idx = Eigen::VectorXi::Zero(d);
    const double h = 1.0 / (nodes_per_axis - 1);
    while (true) {
      const Eigen::VectorXd r = idx.cast<double>() * h;
      best = std::max(best, gradient_dual_norm(r, params, p));
      int k = 0;
      while (k < d && ++idx(k) == nodes_per_axis) idx(k++) = 0;
      if (k == d) break;
    }
    return best;
  }
  std::mt19937_64 rng(0x5eedULL);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int s = 0; s < 200000; ++s) {
    Eigen::VectorXd r(d);
    for (int i = 0; i < d; ++i) r(i) = unit(rng);
    best = std::max(best, gradient_dual_norm(r, params, p));
  }
  return best;
}

double multitask_lipschitz(const CorrelationMatrix& sigma, double kernel_lipschitz) {
  return sigma.max_diagonal() * kernel_lipschitz;
}

}  // namespace samsbo
