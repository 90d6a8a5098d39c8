#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "samsbo/correlation.hpp"
#include "samsbo/dataset.hpp"
#include "samsbo/hyperposterior.hpp"
#include "samsbo/kernels.hpp"

namespace samsbo {

struct DiscretizationSpec {
  double tau = 0.001;
  int dimension = 1;
  Norm norm_p = Norm::LInf;

  /// ⌈1/(2τ) + 1⌉ points per axis.
  std::uint64_t points_per_axis() const;
  /// Throws std::overflow_error when the cardinality exceeds 64 bits.
  std::uint64_t cardinality() const;
  double log_cardinality() const;
};

struct ScalingBundle {
  double beta_b = 0.0;
  double nu = 0.0;
  double gamma = 1.0;
  double beta_bar = 0.0;
  double omega_mu = 0.0;
  double omega_sigma = 0.0;
  double L_f = 0.0;
  double psi = 0.0;
  double delta = 0.05;
  double rho = 0.15;
};

/// Either per-latent RKHS norms or the full Gram matrix of inner products
/// ⟨h_i, h_j⟩ of the latent functions.
struct LatentNormSpec {
  Eigen::MatrixXd inner_products;

  static LatentNormSpec from_norms(const Eigen::VectorXd& norms);
  static LatentNormSpec from_inner_products(Eigen::MatrixXd g);
  /// ‖h‖ = √(Σ_i ‖h_i‖²).
  double total_norm() const;
};

/// (M + √(N + 2√(N ln(1/δ)) + 2 ln(1/δ)))².
double beta_freq(double rkhs_norm, long n_obs, double delta);

/// √‖Σ'⁻¹Σ‖₂.
double operator_norm_lambda(const CorrelationMatrix& sigma,
                            const CorrelationMatrix& sigma_prime);

/// √(Σ_ij [Σ⁻¹]_ij ⟨h_i, h_j⟩).
double rkhs_norm_exact(const CorrelationMatrix& sigma, const Eigen::MatrixXd& inner_products);

/// β_f with the norm replaced by √‖Σ'⁻¹‖₂·‖h‖.
double beta_freq_robust(const LatentNormSpec& latent, const CorrelationMatrix& sigma_prime,
                        long n_obs, double delta);

std::uint64_t covering_number(double tau, int d);

/// 2 ln(|ℐ|/δ).
double beta_bayes(std::uint64_t cardinality, double delta);
double beta_bayes_from_log(double log_cardinality, double delta);

/// max over members of √(2τ q L_k)·mean_norms[i], q the member's largest
/// diagonal entry. `mean_norms` are the RKHS norms of the members' posterior
/// means in their own native spaces.
double modulus_mu(double tau, double L_k, const std::vector<CorrelationMatrix>& members,
                  const std::vector<double>& mean_norms);
/// max over members of √(2τ q L_k).
double modulus_sigma(double tau, double L_k, const std::vector<CorrelationMatrix>& members);

struct LipschitzGrid {
  /// Lattice nodes per axis (spacing 1/(nodes−1) on [0, 1]^d).
  int nodes_per_axis = 200;
  /// For d > 1 with more than max_lattice_points lattice nodes, the slopes are
  /// taken between random base points and their axis neighbours instead.
  int max_lattice_points = 2500;
  int random_base_points = 300;
  std::uint64_t seed = 0;
  double safety_factor = 1.2;
};

/// Empirical (1−δ)-quantile over n_paths exact GP sample paths of the largest
/// axis-aligned finite-difference slope, inflated by the safety factor.
/// Throws ConfigError when the spacing exceeds ϑ_min/4.
double estimate_feature_lipschitz(const KernelParams& params, double delta, int n_paths,
                                  const LipschitzGrid& grid = {});

/// max over members of ‖Σ^{1/2}𝟙‖_q · L_h.
double sample_lipschitz_bound(const std::vector<CorrelationMatrix>& members, double L_h,
                              Norm q = Norm::L2);

/// √(max over members of ‖Σ'⁻¹Σ‖₂).
double gamma_factor(const CorrelationMatrix& sigma_prime,
                    const std::vector<CorrelationMatrix>& members);

/// GP weights for one correlation matrix on a fixed dataset.
struct MemberFit {
  CorrelationMatrix sigma;
  Eigen::VectorXd alpha;
};

/// Quantities shared by all members on one dataset: base Gram, tasks, noise.
class BoundGeometry {
 public:
  BoundGeometry(const MultiTaskDataset& data, const KernelParams& params);

  /// Posterior means of every task at every training input, n × u.
  Eigen::MatrixXd training_means(const MemberFit& fit) const;
  /// αᵀ K_Σ α, the squared RKHS norm of the member's posterior mean.
  double mean_norm_squared(const MemberFit& fit) const;
  /// ‖μ^{Σ'} − μ^Σ‖²_{H_{Σ'}} + (1/σ_n²) Σ_n (μ^{Σ'}_{z_n}(x_n) − μ^Σ_{z_n}(x_n))²,
  /// the data term taken over the observed input/task pairs.
  double nu_squared(const MemberFit& prime, const MemberFit& member) const;

  const Eigen::MatrixXd& base_gram() const { return base_; }

 private:
  /// base · (α restricted to task t), one column per task.
  Eigen::MatrixXd task_products(const Eigen::VectorXd& alpha) const;
  double weighted_quadratic(const Eigen::VectorXd& left, const Eigen::MatrixXd& right_products,
                            const Eigen::MatrixXd& weights) const;

  Eigen::MatrixXd base_;
  std::vector<TaskIndex> tasks_;
  int num_tasks_;
  double noise_;
};

/// ν from posterior fits of Σ' and every member; members are deduplicated.
double nu_factor(const MultiTaskDataset& data, const CorrelationMatrix& sigma_prime,
                 const std::vector<CorrelationMatrix>& members, const KernelParams& params);
double nu_factor(const BoundGeometry& geometry, const MemberFit& prime,
                 const std::vector<MemberFit>& members);

struct BundleOptions {
  bool include_psi = false;
  Norm norm_q = Norm::L2;
  /// L_h; a negative value requests estimate_feature_lipschitz with defaults.
  double feature_lipschitz = -1.0;
  int lipschitz_paths = 500;
};

ScalingBundle scaling_bundle(const MultiTaskDataset& data, const CorrelationMatrix& sigma_prime,
                             const ConfidenceSet& set, const DiscretizationSpec& spec,
                             const KernelParams& params, double delta,
                             const BundleOptions& options = {});
/// Same, from precomputed member fits (the prime fit need not be a member).
ScalingBundle scaling_bundle(const BoundGeometry& geometry, const MemberFit& prime,
                             const std::vector<MemberFit>& members, double rho,
                             const DiscretizationSpec& spec, const KernelParams& params,
                             double delta, const BundleOptions& options = {});

/// True iff β²Σ − Σ' is positive semidefinite.
bool kernel_dominance(const CorrelationMatrix& sigma, const CorrelationMatrix& sigma_prime,
                      double beta);

/// Unique members (exact equality), preserving first occurrence.
std::vector<CorrelationMatrix> unique_members(const std::vector<CorrelationMatrix>& members);

}  // namespace samsbo
