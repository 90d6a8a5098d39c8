#pragma once

// Randomized inequality suites shared by the unit tests and the acceptance
// binary. Each returns how many checks ran and how many failed beyond slack.

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "oracles.hpp"
#include "samsbo/bounds.hpp"
#include "samsbo/gp.hpp"

namespace property {

struct Outcome {
  long instances = 0;
  long checks = 0;
  long violations = 0;
  double worst_excess = -std::numeric_limits<double>::infinity();  // largest lhs − rhs seen

  void record(double lhs, double rhs, double slack) {
    ++checks;
    worst_excess = std::max(worst_excess, lhs - rhs);
    if (lhs > rhs + slack) ++violations;
  }
};

inline samsbo::KernelParams small_params(std::mt19937_64& rng, int d) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  samsbo::KernelParams p;
  p.signal_variance = 0.5 + unit(rng);
  p.lengthscales = Eigen::VectorXd::Constant(d, 0.15 + 0.35 * unit(rng));
  p.noise_variance = std::pow(10.0, -3.0 + 2.0 * unit(rng));
  return p;
}

/// λ‖f‖_{H_Σ} ≥ ‖f‖_{H_{Σ'}} for finite expansions f = Σ_i c_i K_Σ(·, (x_i, z_i)).
/// ‖f‖_{H_{Σ'}} is computed twice: by the augmented Gram form
/// Σ c_i c_j e_{z_i}ᵀ Σ Σ'⁻¹ Σ e_{z_j} k(x_i, x_j) and by explicit features.
inline Outcome norm_transfer(std::uint64_t seed, int instances, double slack = 1e-8) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> size(1, 8);
  std::normal_distribution<double> normal(0.0, 1.0);
  Outcome out;
  for (int t = 0; t < instances; ++t) {
    const int u = 2 + t % 3;
    const samsbo::MultiTaskDataset d = oracle::random_dataset(rng, size(rng), 1 + t % 2, u);
    const samsbo::KernelParams p = small_params(rng, d.dimension());
    const Eigen::MatrixXd s = oracle::random_covariance(rng, u);
    const Eigen::MatrixXd sp = oracle::random_covariance(rng, u);
    Eigen::VectorXd c(d.size());
    for (Eigen::Index i = 0; i < c.size(); ++i) c(i) = normal(rng);

    const double norm_s = std::sqrt(std::max(0.0, c.dot(oracle::dense_gram(d, s, p) * c)));
    const Eigen::MatrixXd transfer_weights = s * sp.inverse() * s;
    const double norm_sp_gram =
        std::sqrt(std::max(0.0, c.dot(oracle::dense_gram(d, transfer_weights, p) * c)));
    const Eigen::MatrixXd phi = oracle::base_features(d, p);
    const Eigen::VectorXd w = oracle::feature_weights(d, phi, s, c);
    const double norm_sp_feat = oracle::transfer(w, s, sp, phi.rows()).norm();
    const double lambda = samsbo::operator_norm_lambda(samsbo::CorrelationMatrix(s),
                                                       samsbo::CorrelationMatrix(sp));
    ++out.instances;
    out.record(norm_sp_gram, lambda * norm_s, slack * (1.0 + lambda * norm_s));
    out.record(norm_sp_feat, lambda * norm_s, slack * (1.0 + lambda * norm_s));
    // The two computations of the same norm must agree.
    out.record(std::abs(norm_sp_gram - norm_sp_feat), 0.0, 1e-6 * (1.0 + norm_sp_gram));
  }
  return out;
}

struct PairInstance {
  samsbo::MultiTaskDataset data;
  samsbo::KernelParams params;
  samsbo::CorrelationMatrix sigma;
  samsbo::CorrelationMatrix sigma_prime;
};

inline PairInstance random_pair(std::mt19937_64& rng, int t) {
  std::uniform_int_distribution<int> size(2, 10);
  const int u = 2 + t % 2;
  samsbo::MultiTaskDataset d = oracle::random_dataset(rng, size(rng), 1 + t % 2, u);
  samsbo::KernelParams p = small_params(rng, d.dimension());
  return {std::move(d), p, samsbo::CorrelationMatrix(oracle::random_correlation(rng, u)),
          samsbo::CorrelationMatrix(oracle::random_correlation(rng, u))};
}

/// |μ^{Σ'}_z(x) − μ^Σ_z(x)| ≤ ν σ^{Σ'}_z(x) at random queries and every task.
inline Outcome mean_gap(std::uint64_t seed, int instances, int queries, double slack = 1e-8) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  Outcome out;
  for (int t = 0; t < instances; ++t) {
    const PairInstance inst = random_pair(rng, t);
    const int u = inst.sigma.size();
    const double nu = samsbo::nu_factor(inst.data, inst.sigma_prime, {inst.sigma}, inst.params);
    const samsbo::Posterior prime(inst.data, inst.sigma_prime, inst.params);
    const samsbo::Posterior member(inst.data, inst.sigma, inst.params);
    Eigen::MatrixXd q(queries, inst.data.dimension());
    for (Eigen::Index i = 0; i < q.size(); ++i) q.data()[i] = unit(rng);
    ++out.instances;
    for (int z = 1; z <= u; ++z) {
      const samsbo::BatchPrediction a = prime.predict_batch(q, samsbo::TaskIndex{z});
      const samsbo::BatchPrediction b = member.predict_batch(q, samsbo::TaskIndex{z});
      for (int i = 0; i < queries; ++i) {
        const double rhs = nu * std::sqrt(a.variance(i));
        out.record(std::abs(a.mean(i) - b.mean(i)), rhs, slack * (1.0 + rhs));
      }
    }
  }
  return out;
}

/// σ^Σ_z(x) ≤ γ σ^{Σ'}_z(x) with γ = max(1, √‖Σ'⁻¹Σ‖₂).
inline Outcome variance_ratio(std::uint64_t seed, int instances, int queries, double slack = 1e-8) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  Outcome out;
  for (int t = 0; t < instances; ++t) {
    const PairInstance inst = random_pair(rng, t);
    const int u = inst.sigma.size();
    const double gamma = std::max(1.0, samsbo::gamma_factor(inst.sigma_prime, {inst.sigma}));
    const samsbo::Posterior prime(inst.data, inst.sigma_prime, inst.params);
    const samsbo::Posterior member(inst.data, inst.sigma, inst.params);
    Eigen::MatrixXd q(queries, inst.data.dimension());
    for (Eigen::Index i = 0; i < q.size(); ++i) q.data()[i] = unit(rng);
    ++out.instances;
    for (int z = 1; z <= u; ++z) {
      const samsbo::BatchPrediction a = prime.predict_batch(q, samsbo::TaskIndex{z});
      const samsbo::BatchPrediction b = member.predict_batch(q, samsbo::TaskIndex{z});
      for (int i = 0; i < queries; ++i) {
        const double rhs = gamma * std::sqrt(a.variance(i));
        out.record(std::sqrt(b.variance(i)), rhs, slack * (1.0 + rhs));
      }
    }
  }
  return out;
}

}  // namespace property
