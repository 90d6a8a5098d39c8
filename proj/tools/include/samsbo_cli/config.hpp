#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "samsbo/problems.hpp"
#include "samsbo/safe_opt.hpp"

namespace samsbo::cli {

/// Parse failure with the offending line (0 when not tied to a line).
class ConfigParseError : public std::runtime_error {
 public:
  ConfigParseError(const std::string& origin, int line, const std::string& message);
  int line() const { return line_; }

 private:
  int line_;
};

enum class ProblemKind { Branin, Powell, Laser };

std::string to_string(ProblemKind p);
ProblemKind parse_problem(const std::string& name);

/// Kernel settings used when the config leaves them unset.
struct ProblemDefaults {
  double lengthscale;
  double signal_variance;
};
ProblemDefaults problem_defaults(ProblemKind p);

struct ExperimentConfig {
  ProblemKind problem = ProblemKind::Branin;
  /// Powell only; a multiple of 4.
  int dimension = 4;
  int subsystems = 5;
  int num_tasks = 2;
  double disturbance = 0.3;
  std::optional<double> threshold;

  std::vector<Algorithm> algorithms{Algorithm::SaMSBO, Algorithm::SafeUCB};
  int iterations = 40;
  int repetitions = 15;
  double delta = 0.05;
  double rho = 0.15;
  double tau = 0.001;
  double eta = 0.1;
  int supplementary_batch = 0;
  int grid_points = 2048;
  int mcmc_samples = 200;
  int hyper_refresh = 1;
  bool include_psi = false;
  std::optional<double> lengthscale;
  std::optional<double> signal_variance;
  double noise_variance = 1e-4;
  /// Observation noise standard deviation as a fraction of the problem's
  /// output scale.
  double observation_noise = 0.0;
  int initial_seeds = 5;
  int local_candidates = 256;
  double local_radius = 0.5;

  std::uint64_t seed = 0;
  int jobs = 1;
  std::string out = "results";

  int frequentist_trials = 500;
  int bayesian_trials = 200;

  bool operator==(const ExperimentConfig&) const = default;
};

/// `key = value` lines; `#` starts a comment. Unknown keys, malformed values
/// and out-of-range values raise ConfigParseError naming the line and key.
ExperimentConfig parse_config_text(const std::string& text, const std::string& origin = "<config>");
ExperimentConfig parse_config(const std::string& path);
std::string serialize_config(const ExperimentConfig& config);
/// Throws ConfigParseError (line 0) when a combination of values is invalid.
void validate(const ExperimentConfig& config, const std::string& origin = "<config>");

/// Seeds of one repetition. Shared by all algorithms so that they see the same
/// disturbance and the same initial inputs.
struct RepetitionSeeds {
  std::uint64_t problem = 0;
  std::uint64_t optimizer = 0;
};
RepetitionSeeds repetition_seeds(const ExperimentConfig& config, int repetition);

std::unique_ptr<Problem> make_problem(const ExperimentConfig& config, std::uint64_t problem_seed);
OptimizerConfig optimizer_config(const ExperimentConfig& config, Algorithm algorithm,
                                 std::uint64_t optimizer_seed);

}  // namespace samsbo::cli
