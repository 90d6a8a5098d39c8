#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <memory>
#include <random>
#include <string>
#include <vector>

#include "samsbo/correlation.hpp"

namespace samsbo {

struct Box {
  Eigen::VectorXd lower;
  Eigen::VectorXd upper;

  int dimension() const { return static_cast<int>(lower.size()); }
  Eigen::VectorXd width() const { return upper - lower; }
  bool contains(const Eigen::VectorXd& x) const;
  /// Affine map of a unit-cube point into the box.
  Eigen::VectorXd from_unit(const Eigen::VectorXd& unit) const;
  Eigen::VectorXd to_unit(const Eigen::VectorXd& x) const;
};

/// Ground-truth optimization problem with a main task (1) and supplementary
/// tasks (2..u). Immutable after construction.
class Problem {
 public:
  virtual ~Problem() = default;

  virtual std::string name() const = 0;
  virtual int num_tasks() const = 0;
  virtual const Box& domain() const = 0;
  virtual double threshold() const = 0;
  /// Noise-free value of task z at x (original units).
  virtual double evaluate_true(TaskIndex z, const Eigen::VectorXd& x) const = 0;

  int dimension() const { return domain().dimension(); }
  /// Standard deviation of the additive Gaussian observation noise.
  double noise_std() const { return noise_std_; }
  void set_noise_std(double s);
  /// Noisy observation drawn with the caller's generator.
  double evaluate(TaskIndex z, const Eigen::VectorXd& x, std::mt19937_64& rng) const;

  /// `count` inputs drawn uniformly from the domain whose true main-task value
  /// is at most threshold() − margin. Throws std::runtime_error after
  /// max_draws unsuccessful draws.
  std::vector<Eigen::VectorXd> safe_seeds(int count, std::uint64_t seed, double margin = 0.0,
                                          int max_draws = 1000000) const;

  /// Standard deviation of the true main-task values below `cap` over a fixed
  /// low-discrepancy set of `points` inputs.
  double output_scale(int points = 1024, double cap = 1e300) const;

 private:
  double noise_std_ = 0.0;
};

/// Points i = 0..n−1 of the additive recurrence frac(0.5 + i·a) with
/// a_k = φ_d^{−k}, φ_d the positive root of x^{d+1} = x + 1. Rows in [0, 1)^d.
Eigen::MatrixXd lattice_sequence(int n, int d);

double powell(const Eigen::VectorXd& x);
double branin(const Eigen::VectorXd& x);

enum class SyntheticKind { Powell, Branin };

struct SyntheticSpec {
  SyntheticKind kind = SyntheticKind::Branin;
  int dimension = 2;
  int num_tasks = 2;
  double shift_factor = 0.3;
  std::uint64_t seed = 0;
  /// Overrides the standard threshold when positive.
  double threshold = -1.0;
};

/// Powell on [−4, 5]^d (T = 35000) or Branin on [−5, 10] × [0, 15] (T = 150).
/// Supplementary task t evaluates the base function at x + shift_t with
/// shift_t = s_t ∘ factor·width/2 and random signs s_t ∈ {−1, +1}^d.
class SyntheticProblem final : public Problem {
 public:
  explicit SyntheticProblem(const SyntheticSpec& spec);

  std::string name() const override;
  int num_tasks() const override { return spec_.num_tasks; }
  const Box& domain() const override { return box_; }
  double threshold() const override { return threshold_; }
  double evaluate_true(TaskIndex z, const Eigen::VectorXd& x) const override;

  double base(const Eigen::VectorXd& x) const;
  /// Shift applied to task z (zero for the main task).
  const Eigen::VectorXd& shift(TaskIndex z) const;
  const SyntheticSpec& spec() const { return spec_; }

 private:
  SyntheticSpec spec_;
  Box box_;
  double threshold_;
  std::vector<Eigen::VectorXd> shifts_;
};

/// base(x + shift) with the shift given explicitly.
double shifted_supplementary(const SyntheticProblem& problem, const Eigen::VectorXd& x,
                             const Eigen::VectorXd& shift);

struct LaserChainSpec {
  int subsystems = 5;
  double disturbance_factor = 0.3;
  int num_tasks = 2;
  std::uint64_t seed = 0;
  double threshold = 40.0;
  /// Scales every noise input matrix.
  double noise_gain = 2.8;
  double kp_max = 3.0;
  double ki_min = 0.05;
  double ki_max = 6.0;
};

/// First-order colouring filter ẋ = a·x + b·w, d = c·x.
struct FilterModel {
  double a = -1.0;
  double b = 1.0;
  double c = 1.0;
};

/// Serial chain of N second-order lasers, each tracking its predecessor
/// (the first tracks a filtered reference) under PI control, with filtered
/// white-noise timing disturbances at every laser output. The cost is the H₂
/// norm from the N+1 noise inputs to the N tracking errors. Parameters are
/// (Kp_1, Ki_1, …, Kp_N, Ki_N). Unstable loops cost 10·T.
class LaserChainProblem final : public Problem {
 public:
  explicit LaserChainProblem(const LaserChainSpec& spec);

  std::string name() const override { return "laser"; }
  int num_tasks() const override { return spec_.num_tasks; }
  const Box& domain() const override { return box_; }
  double threshold() const override { return spec_.threshold; }
  double evaluate_true(TaskIndex z, const Eigen::VectorXd& x) const override;

  double penalty() const { return 10.0 * spec_.threshold; }
  /// Filters (reference first) used by task z.
  const std::vector<FilterModel>& filters(TaskIndex z) const;

  struct StateSpace {
    Eigen::MatrixXd a;
    Eigen::MatrixXd b;
    Eigen::MatrixXd c;
  };
  StateSpace closed_loop(const Eigen::VectorXd& gains, TaskIndex z) const;
  const LaserChainSpec& spec() const { return spec_; }

 private:
  LaserChainSpec spec_;
  Box box_;
  std::vector<double> omega_;
  std::vector<double> zeta_;
  std::vector<std::vector<FilterModel>> filters_;  // per task
};

/// H₂ cost of the closed loop for task z, or the penalty when unstable.
double h2_cost(const Eigen::VectorXd& gains, const LaserChainProblem& problem, TaskIndex z);

}  // namespace samsbo
