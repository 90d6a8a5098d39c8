#include "samsbo/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>
#include <stdexcept>

#include "samsbo/errors.hpp"
#include "samsbo/gp.hpp"
#include "samsbo/linalg.hpp"

namespace samsbo {

namespace {

void check_delta(double delta) {
  if (!(delta > 0.0 && delta < 1.0)) throw std::invalid_argument("delta must lie in (0, 1)");
}

double noise_term(long n_obs, double delta) {
  if (n_obs < 0) throw std::invalid_argument("observation count must be nonnegative");
  const double n = static_cast<double>(n_obs);
  const double log_inv = std::log(1.0 / delta);
  return std::sqrt(n + 2.0 * std::sqrt(n * log_inv) + 2.0 * log_inv);
}

double vector_norm(const Eigen::VectorXd& v, Norm q) {
  switch (q) {
    case Norm::L1: return v.lpNorm<1>();
    case Norm::L2: return v.norm();
    case Norm::LInf: return v.lpNorm<Eigen::Infinity>();
  }
  return v.norm();
}

Eigen::MatrixXd checked_inverse(const CorrelationMatrix& sigma) {
  const Eigen::MatrixXd inv = sigma.inverse();
  if (!inv.allFinite()) throw NumericalError("correlation matrix is numerically singular");
  return inv;
}

}  // namespace

std::uint64_t DiscretizationSpec::points_per_axis() const {
  if (!(tau > 0.0)) throw std::invalid_argument("tau must be positive");
  return static_cast<std::uint64_t>(std::ceil(1.0 / (2.0 * tau) + 1.0 - 1e-9));
}

std::uint64_t DiscretizationSpec::cardinality() const {
  if (dimension < 1) throw std::invalid_argument("dimension must be at least 1");
  const std::uint64_t per_axis = points_per_axis();
  std::uint64_t out = 1;
  for (int i = 0; i < dimension; ++i) {
    if (out > std::numeric_limits<std::uint64_t>::max() / per_axis) {
      throw std::overflow_error("covering number exceeds 64 bits; use log_cardinality");
    }
    out *= per_axis;
  }
  return out;
}

double DiscretizationSpec::log_cardinality() const {
  if (dimension < 1) throw std::invalid_argument("dimension must be at least 1");
  return static_cast<double>(dimension) * std::log(static_cast<double>(points_per_axis()));
}

LatentNormSpec LatentNormSpec::from_norms(const Eigen::VectorXd& norms) {
  if ((norms.array() < 0.0).any()) throw std::invalid_argument("norms must be nonnegative");
  return LatentNormSpec{norms.array().square().matrix().asDiagonal()};
}

LatentNormSpec LatentNormSpec::from_inner_products(Eigen::MatrixXd g) {
  if (g.rows() != g.cols()) throw std::invalid_argument("inner products must be square");
  if (linalg::min_eigenvalue(0.5 * (g + g.transpose())) < -1e-10 * std::max(1.0, g.norm())) {
    throw std::invalid_argument("inner-product matrix is not positive semidefinite");
  }
  return LatentNormSpec{std::move(g)};
}

double LatentNormSpec::total_norm() const {
  return std::sqrt(std::max(0.0, inner_products.trace()));
}

double beta_freq(double rkhs_norm, long n_obs, double delta) {
  if (!(rkhs_norm >= 0.0)) throw std::invalid_argument("RKHS norm must be nonnegative");
  check_delta(delta);
  const double root = rkhs_norm + noise_term(n_obs, delta);
  return root * root;
}

double operator_norm_lambda(const CorrelationMatrix& sigma,
                            const CorrelationMatrix& sigma_prime) {
  if (sigma.size() != sigma_prime.size()) throw std::invalid_argument("size mismatch");
  return std::sqrt(linalg::spectral_norm(checked_inverse(sigma_prime) * sigma.matrix()));
}

double rkhs_norm_exact(const CorrelationMatrix& sigma, const Eigen::MatrixXd& inner_products) {
  if (inner_products.rows() != sigma.size() || inner_products.cols() != sigma.size()) {
    throw std::invalid_argument("inner-product matrix size differs from task count");
  }
  const double sq = checked_inverse(sigma).cwiseProduct(inner_products).sum();
  return std::sqrt(std::max(0.0, sq));
}

double beta_freq_robust(const LatentNormSpec& latent, const CorrelationMatrix& sigma_prime,
                        long n_obs, double delta) {
  const double lambda = std::sqrt(linalg::spectral_norm(checked_inverse(sigma_prime)));
  return beta_freq(lambda * latent.total_norm(), n_obs, delta);
}

std::uint64_t covering_number(double tau, int d) {
  if (!(tau > 0.0 && tau < 1.0)) throw std::invalid_argument("tau must lie in (0, 1)");
  return DiscretizationSpec{tau, d, Norm::LInf}.cardinality();
}

double beta_bayes(std::uint64_t cardinality, double delta) {
  if (cardinality < 1) throw std::invalid_argument("cardinality must be at least 1");
  return beta_bayes_from_log(std::log(static_cast<double>(cardinality)), delta);
}

double beta_bayes_from_log(double log_cardinality, double delta) {
  if (!(delta > 0.0 && delta <= 1.0)) throw std::invalid_argument("delta must lie in (0, 1]");
  return 2.0 * (log_cardinality - std::log(delta));
}

double modulus_mu(double tau, double L_k, const std::vector<CorrelationMatrix>& members,
                  const std::vector<double>& mean_norms) {
  if (members.size() != mean_norms.size()) {
    throw std::invalid_argument("one mean norm per member required");
  }
  double out = 0.0;
  for (std::size_t i = 0; i < members.size(); ++i) {
    out = std::max(out, std::sqrt(2.0 * tau * members[i].max_diagonal() * L_k) * mean_norms[i]);
  }
  return out;
}

double modulus_sigma(double tau, double L_k, const std::vector<CorrelationMatrix>& members) {
  double out = 0.0;
  for (const CorrelationMatrix& m : members) {
    out = std::max(out, std::sqrt(2.0 * tau * m.max_diagonal() * L_k));
  }
  return out;
}

double estimate_feature_lipschitz(const KernelParams& params, double delta, int n_paths,
                                  const LipschitzGrid& grid) {
  params.validate();
  check_delta(delta);
  if (n_paths < 1) throw std::invalid_argument("need at least one sample path");
  if (grid.nodes_per_axis < 2) throw ConfigError("lattice needs at least two nodes per axis");
  const int d = params.dimension();
  const double h = 1.0 / (grid.nodes_per_axis - 1);
  const double min_ls = params.lengthscales.minCoeff();
  if (h > min_ls / 4.0) {
    std::ostringstream msg;
    msg << "Lipschitz grid spacing " << h << " exceeds a quarter of the smallest lengthscale "
        << min_ls;
    throw ConfigError(msg.str());
  }

  // Points plus the (from, to) index pairs whose slopes are measured.
  Eigen::MatrixXd points;
  std::vector<std::pair<Eigen::Index, Eigen::Index>> pairs;
  const double lattice_size = std::pow(static_cast<double>(grid.nodes_per_axis), d);
  if (lattice_size <= grid.max_lattice_points) {
    const auto total = static_cast<Eigen::Index>(lattice_size);
    points.resize(total, d);
    for (Eigen::Index idx = 0; idx < total; ++idx) {
      Eigen::Index rem = idx;
      Eigen::Index stride = 1;
      for (int k = 0; k < d; ++k) {
        const Eigen::Index coord = rem % grid.nodes_per_axis;
        rem /= grid.nodes_per_axis;
        points(idx, k) = static_cast<double>(coord) * h;
        if (coord + 1 < grid.nodes_per_axis) pairs.emplace_back(idx, idx + stride);
        stride *= grid.nodes_per_axis;
      }
    }
  } else {
    std::mt19937_64 rng(grid.seed ^ 0x9e3779b97f4a7c15ULL);
    std::uniform_real_distribution<double> unif(0.0, 1.0 - h);
    const Eigen::Index m = grid.random_base_points;
    points.resize(m * (d + 1), d);
    for (Eigen::Index b = 0; b < m; ++b) {
      const Eigen::Index base = b * (d + 1);
      for (int k = 0; k < d; ++k) points(base, k) = unif(rng);
      for (int k = 0; k < d; ++k) {
        points.row(base + 1 + k) = points.row(base);
        points(base + 1 + k, k) += h;
        pairs.emplace_back(base, base + 1 + k);
      }
    }
  }

  const Eigen::MatrixXd cov = se_kernel_matrix(points, points, params);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cov);
  const Eigen::MatrixXd factor =
      eig.eigenvectors() * eig.eigenvalues().cwiseMax(0.0).cwiseSqrt().asDiagonal();

  std::mt19937_64 rng(grid.seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::MatrixXd xi(points.rows(), n_paths);
  for (Eigen::Index j = 0; j < xi.cols(); ++j) {
    for (Eigen::Index i = 0; i < xi.rows(); ++i) xi(i, j) = normal(rng);
  }
  const Eigen::MatrixXd paths = factor * xi;
  Eigen::VectorXd slopes(n_paths);
  for (int j = 0; j < n_paths; ++j) {
    double best = 0.0;
    for (const auto& [a, b] : pairs) {
      best = std::max(best, std::abs(paths(b, j) - paths(a, j)) / h);
    }
    slopes(j) = best;
  }
  return grid.safety_factor * linalg::quantile(slopes, 1.0 - delta);
}

double sample_lipschitz_bound(const std::vector<CorrelationMatrix>& members, double L_h,
                              Norm q) {
  double out = 0.0;
  for (const CorrelationMatrix& m : members) {
    const Eigen::VectorXd v =
        linalg::sym_sqrt(m.matrix()) * Eigen::VectorXd::Ones(m.size());
    out = std::max(out, vector_norm(v, q) * L_h);
  }
  return out;
}

double gamma_factor(const CorrelationMatrix& sigma_prime,
                    const std::vector<CorrelationMatrix>& members) {
  const Eigen::MatrixXd inv = checked_inverse(sigma_prime);
  double worst = 0.0;
  for (const CorrelationMatrix& m : members) {
    if (m.size() != sigma_prime.size()) throw std::invalid_argument("size mismatch");
    worst = std::max(worst, linalg::spectral_norm(inv * m.matrix()));
  }
  return std::sqrt(worst);
}

BoundGeometry::BoundGeometry(const MultiTaskDataset& data, const KernelParams& params)
    : base_(se_kernel_matrix(data.inputs(), data.inputs(), params)),
      tasks_(data.tasks()),
      num_tasks_(data.num_tasks()),
      noise_(params.noise_variance) {}

Eigen::MatrixXd BoundGeometry::task_products(const Eigen::VectorXd& alpha) const {
  const Eigen::Index n = base_.rows();
  Eigen::MatrixXd masked = Eigen::MatrixXd::Zero(n, num_tasks_);
  for (Eigen::Index i = 0; i < n; ++i) masked(i, tasks_[static_cast<std::size_t>(i)].zero_based()) = alpha(i);
  return base_ * masked;
}

double BoundGeometry::weighted_quadratic(const Eigen::VectorXd& left,
                                         const Eigen::MatrixXd& right_products,
                                         const Eigen::MatrixXd& weights) const {
  // Σ_ij left_i W_{z_i z_j} k(x_i, x_j) right_j
  const Eigen::MatrixXd mixed = right_products * weights;  // (i, t) = Σ_s P(i,s) W_{s t}
  double out = 0.0;
  for (Eigen::Index i = 0; i < left.size(); ++i) {
    out += left(i) * mixed(i, tasks_[static_cast<std::size_t>(i)].zero_based());
  }
  return out;
}

Eigen::MatrixXd BoundGeometry::training_means(const MemberFit& fit) const {
  return task_products(fit.alpha) * fit.sigma.matrix();
}

double BoundGeometry::mean_norm_squared(const MemberFit& fit) const {
  return std::max(0.0, weighted_quadratic(fit.alpha, task_products(fit.alpha),
                                          fit.sigma.matrix()));
}

double BoundGeometry::nu_squared(const MemberFit& prime, const MemberFit& member) const {
  if (base_.rows() == 0) return 0.0;
  const Eigen::MatrixXd p_prime = task_products(prime.alpha);
  const Eigen::MatrixXd p_member = task_products(member.alpha);
  const Eigen::MatrixXd& s = member.sigma.matrix();
  const Eigen::MatrixXd transported = s * checked_inverse(prime.sigma) * s;
  const double rkhs_sq = weighted_quadratic(prime.alpha, p_prime, prime.sigma.matrix()) -
                         2.0 * weighted_quadratic(prime.alpha, p_member, s) +
                         weighted_quadratic(member.alpha, p_member, transported);
  // Data-fit term at the observed (x_n, z_n) pairs.
  const Eigen::MatrixXd diff = p_prime * prime.sigma.matrix() - p_member * s;
  double data_fit = 0.0;
  for (Eigen::Index i = 0; i < diff.rows(); ++i) {
    const double e = diff(i, tasks_[static_cast<std::size_t>(i)].zero_based());
    data_fit += e * e;
  }
  data_fit /= noise_;
  return std::max(0.0, rkhs_sq) + data_fit;
}

std::vector<CorrelationMatrix> unique_members(const std::vector<CorrelationMatrix>& members) {
  std::vector<CorrelationMatrix> out;
  for (const CorrelationMatrix& m : members) {
    if (std::find(out.begin(), out.end(), m) == out.end()) out.push_back(m);
  }
  return out;
}

namespace {

std::vector<MemberFit> fit_members(const MultiTaskDataset& data,
                                   const std::vector<CorrelationMatrix>& members,
                                   const KernelParams& params) {
  std::vector<MemberFit> fits;
  for (const CorrelationMatrix& m : unique_members(members)) {
    fits.push_back({m, Posterior(data, m, params).alpha()});
  }
  return fits;
}

}  // namespace

double nu_factor(const BoundGeometry& geometry, const MemberFit& prime,
                 const std::vector<MemberFit>& members) {
  double worst = 0.0;
  for (const MemberFit& m : members) {
    if (m.sigma == prime.sigma) continue;  // identical posteriors
    worst = std::max(worst, geometry.nu_squared(prime, m));
  }
  return std::sqrt(worst);
}

double nu_factor(const MultiTaskDataset& data, const CorrelationMatrix& sigma_prime,
                 const std::vector<CorrelationMatrix>& members, const KernelParams& params) {
  if (data.empty()) return 0.0;
  const BoundGeometry geometry(data, params);
  const MemberFit prime{sigma_prime, Posterior(data, sigma_prime, params).alpha()};
  return nu_factor(geometry, prime, fit_members(data, members, params));
}

ScalingBundle scaling_bundle(const BoundGeometry& geometry, const MemberFit& prime,
                             const std::vector<MemberFit>& members, double rho,
                             const DiscretizationSpec& spec, const KernelParams& params,
                             double delta, const BundleOptions& options) {
  check_delta(delta);
  if (members.empty()) throw std::invalid_argument("confidence set is empty");
  ScalingBundle b;
  b.delta = delta;
  b.rho = rho;
  std::vector<CorrelationMatrix> sigmas;
  sigmas.reserve(members.size());
  for (const MemberFit& m : members) sigmas.push_back(m.sigma);
  b.beta_b = beta_bayes_from_log(spec.log_cardinality(), delta);
  b.gamma = gamma_factor(prime.sigma, sigmas);
  b.nu = nu_factor(geometry, prime, members);
  const double root = b.nu + b.gamma * std::sqrt(b.beta_b);
  b.beta_bar = root * root;
  if (options.include_psi) {
    const double lk = kernel_lipschitz(params, spec.norm_p);
    std::vector<double> norms;
    norms.reserve(members.size());
    for (const MemberFit& m : members) norms.push_back(std::sqrt(geometry.mean_norm_squared(m)));
    b.omega_mu = modulus_mu(spec.tau, lk, sigmas, norms);
    b.omega_sigma = modulus_sigma(spec.tau, lk, sigmas);
    const double lh = options.feature_lipschitz >= 0.0
                          ? options.feature_lipschitz
                          : estimate_feature_lipschitz(params, delta, options.lipschitz_paths);
    b.L_f = sample_lipschitz_bound(sigmas, lh, options.norm_q);
    b.psi = b.L_f * spec.tau + b.omega_mu + std::sqrt(b.beta_b) * b.omega_sigma;
  }
  return b;
}

ScalingBundle scaling_bundle(const MultiTaskDataset& data, const CorrelationMatrix& sigma_prime,
                             const ConfidenceSet& set, const DiscretizationSpec& spec,
                             const KernelParams& params, double delta,
                             const BundleOptions& options) {
  const BoundGeometry geometry(data, params);
  const MemberFit prime{sigma_prime, Posterior(data, sigma_prime, params).alpha()};
  return scaling_bundle(geometry, prime, fit_members(data, set.members, params), set.rho,
                        spec, params, delta, options);
}

bool kernel_dominance(const CorrelationMatrix& sigma, const CorrelationMatrix& sigma_prime,
                      double beta) {
  if (sigma.size() != sigma_prime.size()) throw std::invalid_argument("size mismatch");
  const Eigen::MatrixXd diff = beta * beta * sigma.matrix() - sigma_prime.matrix();
  const double scale = std::max(beta * beta * sigma.matrix().norm(), sigma_prime.matrix().norm());
  return linalg::min_eigenvalue(0.5 * (diff + diff.transpose())) >= -1e-10 * scale;
}

}  // namespace samsbo
