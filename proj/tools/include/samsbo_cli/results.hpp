#pragma once

#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "samsbo/safe_opt.hpp"

namespace samsbo::cli {

/// Column order of the raw per-evaluation CSV.
const std::vector<std::string>& raw_columns();
/// Column order of the per-algorithm aggregate CSV.
const std::vector<std::string>& aggregate_columns();
/// Column order of the long-format plot table.
const std::vector<std::string>& plot_columns();

/// Linear interpolation between order statistics: h = (n − 1)·p.
double quantile(std::vector<double> values, double p);

struct Summary {
  double median = 0.0;
  double q10 = 0.0;
  double q90 = 0.0;
  double mean = 0.0;
  double std = 0.0;  // n − 1 denominator, 0 for a single value
};
Summary summarize(const std::vector<double>& values);

/// Shortest round-trip decimal form; "nan" and "inf" for non-finite values.
std::string format_number(double v);

struct RepetitionTrace {
  int repetition = 0;
  std::vector<TraceRecord> trace;
};

/// One row per trace record. `violations` is the running count of main-task
/// evaluations whose true value exceeds the threshold.
void write_raw_csv(std::ostream& out, Algorithm algorithm, double threshold,
                   const std::vector<RepetitionTrace>& repetitions);

/// Best-so-far after each main-task iteration (iteration ≥ 1), keyed by
/// iteration, one value per repetition.
using IterationTable = std::map<int, std::vector<double>>;
IterationTable best_by_iteration(const std::vector<RepetitionTrace>& repetitions);

void write_aggregate_csv(std::ostream& out, const IterationTable& table);

/// Reads raw CSVs and groups best-so-far by algorithm and iteration. Throws
/// std::runtime_error naming the file on a header mismatch or a bad row.
std::map<std::string, IterationTable> read_raw_csvs(const std::vector<std::filesystem::path>& paths);

void write_plot_csv(std::ostream& out, const std::map<std::string, IterationTable>& tables);

}  // namespace samsbo::cli
