#include "samsbo/coverage.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

#include "samsbo/bounds.hpp"
#include "samsbo/gp.hpp"
#include "samsbo/hyperposterior.hpp"
#include "samsbo/safe_opt.hpp"

namespace samsbo {
namespace {

KernelParams one_dimensional(double signal_variance, double lengthscale, double noise_variance) {
  KernelParams p;
  p.signal_variance = signal_variance;
  p.lengthscales = Eigen::VectorXd::Constant(1, lengthscale);
  p.noise_variance = noise_variance;
  p.validate();
  return p;
}

Eigen::MatrixXd unit_grid(int n) {
  if (n < 2) throw std::invalid_argument("coverage grid needs at least two points");
  return Eigen::VectorXd::LinSpaced(n, 0.0, 1.0);
}

// The bound must hold at every grid point of every task.
bool bound_holds(const Posterior& post, const Eigen::MatrixXd& grid,
                 const Eigen::MatrixXd& truth, double root_beta, double psi) {
  for (int z = 1; z <= post.sigma().size(); ++z) {
    const BatchPrediction pred = post.predict_batch(grid, TaskIndex{z});
    for (Eigen::Index i = 0; i < grid.rows(); ++i) {
      const double error = std::abs(truth(i, z - 1) - pred.mean(i));
      if (error > root_beta * std::sqrt(pred.variance(i)) + psi) return false;
    }
  }
  return true;
}

CoverageReport finish(std::string suite, int trials, int successes, double nominal,
                      double slack) {
  CoverageReport r;
  r.suite = std::move(suite);
  r.trials = trials;
  r.successes = successes;
  r.coverage = trials > 0 ? static_cast<double>(successes) / trials : 1.0;
  r.target = nominal - slack;
  r.passed = trials == 0 || r.coverage >= r.target;
  return r;
}

double draw_beta(std::mt19937_64& rng, double a, double b) {
  std::gamma_distribution<double> ga(a, 1.0);
  std::gamma_distribution<double> gb(b, 1.0);
  const double x = ga(rng);
  const double y = gb(rng);
  return x / (x + y);
}

}  // namespace

CoverageReport frequentist_coverage(const FrequentistCoverageConfig& c) {
  if (c.trials < 0) throw std::invalid_argument("trials must be nonnegative");
  if (c.trials == 0) return finish("frequentist", 0, 0, 1.0 - c.delta, c.slack);
  if (c.observations < 1 || c.expansion_terms < 1) {
    throw std::invalid_argument("coverage needs observations and expansion terms");
  }
  const KernelParams params = one_dimensional(c.signal_variance, c.lengthscale, c.noise_variance);
  const CorrelationMatrix sigma = CorrelationMatrix::two_task(c.correlation);
  std::mt19937_64 rng(c.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> normal(0.0, 1.0);

  MultiTaskDataset centers(1, 2);
  for (int j = 0; j < c.expansion_terms; ++j) {
    centers.add(Eigen::VectorXd::Constant(1, unit(rng)), TaskIndex{1 + j % 2}, 0.0);
  }
  Eigen::VectorXd coeff(c.expansion_terms);
  for (Eigen::Index j = 0; j < coeff.size(); ++j) coeff(j) = normal(rng);
  const double norm = std::sqrt(coeff.dot(gram(centers, sigma, params) * coeff));

  const auto f = [&](const Eigen::VectorXd& x, TaskIndex z) {
    double v = 0.0;
    for (Eigen::Index j = 0; j < centers.size(); ++j) {
      v += coeff(j) * multitask_kernel(x, z, centers.input(j), centers.task(j), sigma, params);
    }
    return v;
  };

  MultiTaskDataset design(1, 2);
  for (int n = 0; n < c.observations; ++n) {
    const Eigen::VectorXd x = Eigen::VectorXd::Constant(1, unit(rng));
    const TaskIndex z{1 + n % 2};
    design.add(x, z, f(x, z));
  }
  const Eigen::VectorXd clean = design.observations();

  const Eigen::MatrixXd grid = unit_grid(c.grid_points);
  Eigen::MatrixXd truth(grid.rows(), 2);
  for (Eigen::Index i = 0; i < grid.rows(); ++i) {
    for (int z = 1; z <= 2; ++z) truth(i, z - 1) = f(grid.row(i).transpose(), TaskIndex{z});
  }

  const double root_beta = std::sqrt(beta_freq(norm, c.observations, c.delta));
  const double noise_std = std::sqrt(c.noise_variance);
  int successes = 0;
  for (int t = 0; t < c.trials; ++t) {
    Eigen::VectorXd y = clean;
    for (Eigen::Index n = 0; n < y.size(); ++n) y(n) += noise_std * normal(rng);
    const Posterior post(design.with_observations(y), sigma, params);
    if (bound_holds(post, grid, truth, root_beta, 0.0)) ++successes;
  }
  return finish("frequentist", c.trials, successes, 1.0 - c.delta, c.slack);
}

CoverageReport bayesian_coverage(const BayesianCoverageConfig& c) {
  if (c.trials < 0) throw std::invalid_argument("trials must be nonnegative");
  const double nominal = (1.0 - c.delta) * (1.0 - c.rho);
  if (c.trials == 0) return finish("bayesian", 0, 0, nominal, c.slack);
  if (c.observations_per_task < 1) throw std::invalid_argument("coverage needs observations");
  const KernelParams params = one_dimensional(c.signal_variance, c.lengthscale, c.noise_variance);
  const Eigen::MatrixXd grid = unit_grid(c.grid_points);
  const Eigen::Index g = grid.rows();
  const int m = c.observations_per_task;
  const double r_max = max_correlation(McmcConfig{}.max_abs_coordinate);
  const DiscretizationSpec spec{c.tau, 1, Norm::LInf};
  BundleOptions options;
  options.include_psi = c.include_psi;
  if (c.include_psi) {
    LipschitzGrid lg;
    lg.seed = c.seed ^ 0x5eedULL;
    options.feature_lipschitz = estimate_feature_lipschitz(params, c.delta, 500, lg);
  }

  std::mt19937_64 rng(c.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> normal(0.0, 1.0);
  int successes = 0;
  for (int t = 0; t < c.trials; ++t) {
    const double r = std::min(std::abs(2.0 * draw_beta(rng, c.eta, c.eta) - 1.0), r_max);
    const CorrelationMatrix truth_sigma = CorrelationMatrix::two_task(r);

    // Joint prior draw over the grid of both tasks and the training inputs.
    MultiTaskDataset joint(1, 2);
    for (int z = 1; z <= 2; ++z) {
      for (Eigen::Index i = 0; i < g; ++i) joint.add(grid.row(i).transpose(), TaskIndex{z}, 0.0);
    }
    for (int z = 1; z <= 2; ++z) {
      for (int n = 0; n < m; ++n) {
        joint.add(Eigen::VectorXd::Constant(1, unit(rng)), TaskIndex{z}, 0.0);
      }
    }
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(gram(joint, truth_sigma, params));
    const Eigen::VectorXd roots = eig.eigenvalues().cwiseMax(0.0).cwiseSqrt();
    Eigen::VectorXd w(joint.size());
    for (Eigen::Index i = 0; i < w.size(); ++i) w(i) = normal(rng);
    const Eigen::VectorXd sample = eig.eigenvectors() * roots.cwiseProduct(w);

    Eigen::MatrixXd truth(g, 2);
    truth.col(0) = sample.segment(0, g);
    truth.col(1) = sample.segment(g, g);
    MultiTaskDataset data(1, 2);
    const double noise_std = std::sqrt(c.noise_variance);
    for (Eigen::Index i = 2 * g; i < joint.size(); ++i) {
      data.add(joint.input(i), joint.task(i), sample(i) + noise_std * normal(rng));
    }

    McmcConfig mc;
    mc.seed = derive_seed(c.seed, static_cast<std::uint64_t>(t), 1);
    const EmpiricalHyperPosterior hyper =
        sample_hyperposterior(data, HyperPrior{c.eta, true}, params, c.mcmc_samples, mc);
    const ConfidenceSet set = confidence_set(hyper, c.rho);
    const CorrelationMatrix& prime = set.members[select_sigma_prime(set)];
    const ScalingBundle bundle =
        scaling_bundle(data, prime, set, spec, params, c.delta, options);
    const Posterior post(data, prime, params);
    if (bound_holds(post, grid, truth, std::sqrt(bundle.beta_bar), bundle.psi)) ++successes;
  }
  return finish("bayesian", c.trials, successes, nominal, c.slack);
}

}  // namespace samsbo
