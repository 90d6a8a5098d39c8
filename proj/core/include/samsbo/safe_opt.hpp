#pragma once

#include <Eigen/Dense>
#include <chrono>
#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "samsbo/bounds.hpp"
#include "samsbo/correlation.hpp"
#include "samsbo/dataset.hpp"
#include "samsbo/gp.hpp"
#include "samsbo/hyperposterior.hpp"
#include "samsbo/kernels.hpp"
#include "samsbo/problems.hpp"

namespace samsbo {

enum class Algorithm { SaMSBO, SafeUCB, UCB, MultiTaskUCB };

std::string to_string(Algorithm a);
/// Accepts samsbo, safe-ucb, ucb, multi-task-ucb; throws std::invalid_argument.
Algorithm parse_algorithm(const std::string& name);
bool is_safe(Algorithm a);
bool is_multitask(Algorithm a);

struct OptimizerConfig {
  Algorithm algorithm = Algorithm::SaMSBO;
  int iterations = 40;
  double delta = 0.05;
  double rho = 0.15;
  double tau = 0.001;
  double eta = 0.1;
  /// Supplementary evaluations per iteration and task; 0 means 2d.
  int supplementary_batch = 0;
  int grid_points = 2048;
  int mcmc_samples = 200;
  /// Resample the hyper-posterior every this many iterations.
  int hyper_refresh = 1;
  bool include_psi = false;
  /// Kernel hyperparameters in normalized/standardized units.
  double lengthscale = 0.2;
  double signal_variance = 1.0;
  double noise_variance = 1e-4;
  int initial_seeds = 5;
  /// Extra candidates per iteration drawn around main-task inputs, with
  /// Gaussian perturbations of local_radius·lengthscale/√d per coordinate.
  int local_candidates = 256;
  double local_radius = 0.5;
  std::uint64_t seed = 0;
};

/// Input normalization box → [0, 1]^d and pooled output standardization.
struct Transforms {
  Box box;
  double mean = 0.0;
  double scale = 1.0;

  Eigen::VectorXd normalize(const Eigen::VectorXd& x) const { return box.to_unit(x); }
  Eigen::VectorXd denormalize(const Eigen::VectorXd& u) const { return box.from_unit(u); }
  double standardize(double y) const { return (y - mean) / scale; }
  double destandardize(double v) const { return v * scale + mean; }
};

/// Mean and population standard deviation of all observations of every task.
/// A standard deviation below 1e-8 gives scale 1.
Transforms fit_transforms(const MultiTaskDataset& data, const Box& box);

/// Normalized inputs and standardized observations.
MultiTaskDataset apply_transforms(const MultiTaskDataset& data, const Transforms& t);

struct CandidateGrid {
  Eigen::MatrixXd points;  // rows in [0, 1)^d
  Eigen::Index size() const { return points.rows(); }
};

/// Low-discrepancy lattice of n points in the unit cube.
CandidateGrid make_grid(int n, int d);

struct SafeSet {
  std::vector<bool> mask;
  double threshold = 0.0;  // standardized units
  Eigen::Index count() const;
};

/// mask[i] = μ₁(x_i) + √β̄·σ₁(x_i) + ψ ≤ threshold.
SafeSet safe_set(const BatchPrediction& main, const ScalingBundle& bundle, double threshold_std);
SafeSet safe_set(const Posterior& posterior, const ScalingBundle& bundle, double threshold_std,
                 const CandidateGrid& grid);

/// argmin over safe candidates of μ − √β̄·σ, lowest index on ties.
/// Throws NoSafeAction when the safe set is empty.
Eigen::Index acquire_main(const BatchPrediction& main, const SafeSet& safe, double beta_bar);
/// Same over every candidate.
Eigen::Index acquire_unconstrained(const BatchPrediction& main, double beta_bar);

/// Greedy batch maximizing the posterior variance of task z, conditioning on
/// earlier picks at noise level σ_n². Lowest index on ties.
std::vector<Eigen::Index> acquire_supplementary(const Posterior& posterior,
                                                const CandidateGrid& grid, TaskIndex z,
                                                int batch_size);

/// Index of the member minimizing max_j ‖Σ_i⁻¹Σ_j‖₂; earlier members win ties.
std::size_t select_sigma_prime(const ConfidenceSet& set);

struct TraceRecord {
  int iteration = 0;
  int task = 1;
  Eigen::VectorXd x;
  double observed = 0.0;
  double true_value = 0.0;
  double best_so_far = 0.0;
  double beta_bar = 0.0;
  int confidence_set_size = 0;
  double gamma = 1.0;
  double nu = 0.0;
  long safe_set_size = -1;
  bool stalled = false;
  double wall_time = 0.0;  // seconds since the run started
};

struct OptimizationState {
  explicit OptimizationState(MultiTaskDataset initial) : data(std::move(initial)) {}

  MultiTaskDataset data;  // original units
  Transforms transforms;
  ConfidenceSet confidence_set;
  CorrelationMatrix sigma_prime = CorrelationMatrix::identity(1);
  ScalingBundle bundle;
  int iteration = 0;
  std::optional<Eigen::VectorXd> best_input;
  double best_value = 0.0;
  int violation_count = 0;
  long last_safe_set_size = -1;
  bool last_stalled = false;
  std::optional<Eigen::VectorXd> mcmc_warm_start;
};

/// One run of an algorithm on a problem. Owns its generator; two instances
/// with equal configuration produce identical traces.
class Optimizer {
 public:
  Optimizer(const Problem& problem, OptimizerConfig config);

  /// Evaluates the safe seeds on the main task.
  void initialize(const std::vector<Eigen::VectorXd>& seeds);
  void step();

  const OptimizationState& state() const { return state_; }
  const std::vector<TraceRecord>& trace() const { return trace_; }
  const CandidateGrid& grid() const { return grid_; }
  const OptimizerConfig& config() const { return config_; }
  KernelParams kernel_params() const;
  int model_tasks() const { return model_tasks_; }
  int batch_size() const;

 private:
  void observe(TaskIndex z, const Eigen::VectorXd& x);
  void update_hyperposterior(const MultiTaskDataset& standardized);
  void record(TaskIndex z, const Eigen::VectorXd& x, double observed, double truth);
  /// Fixed grid plus the local cloud for this iteration (unit cube).
  CandidateGrid candidates() const;

  const Problem& problem_;
  OptimizerConfig config_;
  int model_tasks_;
  CandidateGrid grid_;
  std::mt19937_64 noise_rng_;
  OptimizationState state_;
  std::vector<TraceRecord> trace_;
  std::chrono::steady_clock::time_point start_;
  double feature_lipschitz_ = -1.0;  // L_h, estimated on first use
};

/// Deterministic seed mixing (splitmix64 over the arguments).
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t a, std::uint64_t b = 0);

/// Seeds from the problem (count config.initial_seeds, derived from
/// config.seed), then config.iterations steps.
std::vector<TraceRecord> run(const Problem& problem, const OptimizerConfig& config);

}  // namespace samsbo
