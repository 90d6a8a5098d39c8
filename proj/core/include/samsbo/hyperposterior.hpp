#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <vector>

#include "samsbo/correlation.hpp"
#include "samsbo/dataset.hpp"
#include "samsbo/kernels.hpp"

namespace samsbo {

struct HyperPrior {
  double eta = 0.1;
  /// Restrict the support to matrices with nonnegative entries.
  bool nonnegative = true;
};

struct McmcConfig {
  int chains = 1;
  double burn_in_fraction = 0.5;
  std::uint64_t seed = 0;
  double target_acceptance = 0.3;
  double initial_step = 1.0;
  /// Bound on each unconstrained coordinate; the largest reachable
  /// correlation is tanh(max_abs_coordinate).
  double max_abs_coordinate = 5.0;
  /// Use the O(n)-per-proposal likelihood for two tasks.
  bool two_task_fast_path = true;
  /// Unconstrained starting point (length u(u−1)/2); chain 0 starts exactly
  /// here, further chains start from small perturbations.
  std::optional<Eigen::VectorXd> warm_start;
};

struct McmcDiagnostics {
  double acceptance_rate = 0.0;
  int chain_length = 0;
  int burn_in = 0;
  double final_step = 0.0;
};

struct EmpiricalHyperPosterior {
  std::vector<CorrelationMatrix> samples;
  /// Unnormalized log posterior (log likelihood + LKJ log density) per sample.
  std::vector<double> log_densities;
  McmcDiagnostics diagnostics;
  /// Last unconstrained state of chain 0, usable as the next warm start.
  Eigen::VectorXd final_state;
};

struct ConfidenceSet {
  std::vector<CorrelationMatrix> members;
  std::vector<double> log_densities;
  double rho = 0.0;
};

/// (η − 1)·log det Σ. Throws std::invalid_argument unless Σ has unit diagonal.
double lkj_log_density(const CorrelationMatrix& sigma, double eta);

/// Largest reachable two-task correlation for a given coordinate bound.
double max_correlation(double max_abs_coordinate);

/// Maps an unconstrained vector of length u(u−1)/2 to a correlation matrix
/// through canonical partial correlations z = tanh(y). Also returns the log
/// Jacobian of the map from y to the correlation matrix.
struct ConstrainedCorrelation {
  Eigen::MatrixXd matrix;
  double log_jacobian = 0.0;
};
ConstrainedCorrelation correlation_from_unconstrained(const Eigen::VectorXd& y);

/// Adaptive random-walk Metropolis over p(Σ | X̃, ỹ) ∝ exp(log likelihood)·LKJ.
/// For two tasks the coordinate s maps to r = tanh|s|, which folds the
/// symmetric density onto r ≥ 0. For more tasks proposals with a negative
/// entry are rejected. Throws ChainFailure when the post-burn-in acceptance
/// rate is below 0.01.
EmpiricalHyperPosterior sample_hyperposterior(const MultiTaskDataset& data,
                                              const HyperPrior& prior,
                                              const KernelParams& params,
                                              int n_samples,
                                              const McmcConfig& config = {});

/// Keeps the ⌈(1 − ρ)·n⌉ samples with the highest recorded log density.
ConfidenceSet confidence_set(const EmpiricalHyperPosterior& posterior, double rho);

}  // namespace samsbo
