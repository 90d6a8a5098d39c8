#pragma once

#include <cstdint>
#include <string>

namespace samsbo {

/// Outcome of a Monte Carlo coverage campaign. A trial succeeds when the
/// bound holds at every grid point of every task.
struct CoverageReport {
  std::string suite;
  int trials = 0;
  int successes = 0;
  double coverage = 0.0;  // successes / trials, 1 when trials = 0
  double target = 0.0;    // nominal probability minus the slack
  bool passed = true;
};

/// Two tasks on [0, 1]. The ground truth is a fixed finite kernel expansion in
/// the native space of Σ'·k, so its RKHS norm is exact. Each trial redraws the
/// Gaussian observation noise (standard deviation σ_n) and checks
/// |f_z − μ_z| ≤ √β_f·σ_z on the grid.
struct FrequentistCoverageConfig {
  int trials = 500;
  int observations = 30;
  int grid_points = 200;
  int expansion_terms = 8;
  double delta = 0.05;
  double correlation = 0.6;
  double lengthscale = 0.2;
  double signal_variance = 1.0;
  double noise_variance = 0.01;
  double slack = 0.05;
  std::uint64_t seed = 0;
};

CoverageReport frequentist_coverage(const FrequentistCoverageConfig& config);

/// Two tasks on [0, 1]. Each trial draws Σ from the LKJ(η) prior folded onto
/// nonnegative correlations, samples f from the multi-task GP prior, observes
/// every task at random inputs, and runs hyper-posterior sampling, the
/// confidence set, the Σ' selection and the robust scaling factor. The trial
/// succeeds when |f_z − μ^{Σ'}_z| ≤ √β̄_b·σ^{Σ'}_z + ψ on the grid.
struct BayesianCoverageConfig {
  int trials = 200;
  int observations_per_task = 20;
  int grid_points = 200;
  double delta = 0.05;
  double rho = 0.15;
  double eta = 0.1;
  double tau = 0.001;
  double lengthscale = 0.2;
  double signal_variance = 1.0;
  double noise_variance = 0.01;
  int mcmc_samples = 200;
  bool include_psi = true;
  double slack = 0.05;
  std::uint64_t seed = 0;
};

CoverageReport bayesian_coverage(const BayesianCoverageConfig& config);

}  // namespace samsbo
