#pragma once

#include <filesystem>
#include <iosfwd>
#include <vector>

#include "samsbo_cli/config.hpp"

namespace samsbo::cli {

/// Runs every algorithm for every repetition and writes raw_<algorithm>.csv,
/// aggregate_<algorithm>.csv and manifest.json into `out_dir`. Returns 0
/// unless every repetition failed.
int cmd_run(const ExperimentConfig& config, const std::filesystem::path& out_dir, std::ostream& log);

/// Frequentist and Bayesian coverage campaigns; writes coverage.json into
/// `out_dir` and one line per suite to `log`. Returns 0 when every suite passes.
int cmd_verify_bounds(const ExperimentConfig& config, const std::filesystem::path& out_dir,
                      std::ostream& log);

/// Long-format table (algorithm, iteration, median, q10, q90, mean, std).
int cmd_plotdata(const std::vector<std::filesystem::path>& inputs, std::ostream& out);

}  // namespace samsbo::cli
