#include "samsbo_cli/results.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <utility>

namespace samsbo::cli {
namespace {

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(line);
  while (std::getline(in, item, sep)) out.push_back(item);
  if (!line.empty() && line.back() == sep) out.emplace_back();
  return out;
}

std::string join(const std::vector<std::string>& items, char sep) {
  std::string out;
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (i) out += sep;
    out += items[i];
  }
  return out;
}

double parse_number(const std::string& s) {
  if (s == "nan") return std::nan("");
  if (s == "inf") return std::numeric_limits<double>::infinity();
  if (s == "-inf") return -std::numeric_limits<double>::infinity();
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw std::invalid_argument("bad number '" + s + "'");
  }
  return v;
}

int parse_int(const std::string& s) {
  int v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw std::invalid_argument("bad integer '" + s + "'");
  }
  return v;
}

void write_summary_row(std::ostream& out, const Summary& s) {
  out << format_number(s.median) << ',' << format_number(s.q10) << ',' << format_number(s.q90)
      << ',' << format_number(s.mean) << ',' << format_number(s.std) << '\n';
}

}  // namespace

const std::vector<std::string>& raw_columns() {
  static const std::vector<std::string> cols = {
      "algorithm", "repetition", "iteration", "task",  "x",
      "observed",  "true_value", "best_so_far", "violations", "beta_bar",
      "confidence_set_size", "gamma", "nu", "safe_set_size", "stalled"};
  return cols;
}

const std::vector<std::string>& aggregate_columns() {
  static const std::vector<std::string> cols = {"iteration", "median", "q10", "q90", "mean", "std"};
  return cols;
}

const std::vector<std::string>& plot_columns() {
  static const std::vector<std::string> cols = {"algorithm", "iteration", "median", "q10",
                                                "q90",       "mean",      "std"};
  return cols;
}

double quantile(std::vector<double> values, double p) {
  if (values.empty()) throw std::invalid_argument("quantile of an empty sample");
  if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("quantile level outside [0, 1]");
  std::sort(values.begin(), values.end());
  const double h = (static_cast<double>(values.size()) - 1.0) * p;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, values.size() - 1);
  return values[lo] + (h - static_cast<double>(lo)) * (values[hi] - values[lo]);
}

Summary summarize(const std::vector<double>& values) {
  if (values.empty()) throw std::invalid_argument("summary of an empty sample");
  Summary s;
  s.median = quantile(values, 0.5);
  s.q10 = quantile(values, 0.1);
  s.q90 = quantile(values, 0.9);
  const double n = static_cast<double>(values.size());
  s.mean = std::accumulate(values.begin(), values.end(), 0.0) / n;
  if (values.size() > 1) {
    double ss = 0.0;
    for (double v : values) ss += (v - s.mean) * (v - s.mean);
    s.std = std::sqrt(ss / (n - 1.0));
  }
  return s;
}

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

void write_raw_csv(std::ostream& out, Algorithm algorithm, double threshold,
                   const std::vector<RepetitionTrace>& repetitions) {
  out << join(raw_columns(), ',') << '\n';
  const std::string name = to_string(algorithm);
  for (const RepetitionTrace& rep : repetitions) {
    int violations = 0;
    for (const TraceRecord& r : rep.trace) {
      if (r.task == 1 && !r.stalled && r.true_value > threshold) ++violations;
      std::vector<std::string> xs;
      for (Eigen::Index k = 0; k < r.x.size(); ++k) xs.push_back(format_number(r.x(k)));
      out << name << ',' << rep.repetition << ',' << r.iteration << ',' << r.task << ','
          << join(xs, ';') << ',' << format_number(r.observed) << ','
          << format_number(r.true_value) << ',' << format_number(r.best_so_far) << ','
          << violations << ',' << format_number(r.beta_bar) << ',' << r.confidence_set_size
          << ',' << format_number(r.gamma) << ',' << format_number(r.nu) << ','
          << r.safe_set_size << ',' << (r.stalled ? 1 : 0) << '\n';
    }
  }
}

IterationTable best_by_iteration(const std::vector<RepetitionTrace>& repetitions) {
  IterationTable table;
  for (const RepetitionTrace& rep : repetitions) {
    std::map<int, double> last;
    for (const TraceRecord& r : rep.trace) {
      if (r.task == 1 && r.iteration >= 1) last[r.iteration] = r.best_so_far;
    }
    for (const auto& [it, v] : last) table[it].push_back(v);
  }
  return table;
}

void write_aggregate_csv(std::ostream& out, const IterationTable& table) {
  out << join(aggregate_columns(), ',') << '\n';
  for (const auto& [it, values] : table) {
    out << it << ',';
    write_summary_row(out, summarize(values));
  }
}

std::map<std::string, IterationTable> read_raw_csvs(const std::vector<std::filesystem::path>& paths) {
  // (algorithm) → (file, repetition) → iteration → best-so-far of the last main row
  std::map<std::string, std::map<std::pair<std::size_t, int>, std::map<int, double>>> grouped;
  const std::vector<std::string>& cols = raw_columns();
  const auto col = [&](const char* name) {
    return static_cast<std::size_t>(std::find(cols.begin(), cols.end(), name) - cols.begin());
  };
  const std::size_t c_alg = col("algorithm"), c_rep = col("repetition"), c_it = col("iteration"),
                    c_task = col("task"), c_best = col("best_so_far");
  for (std::size_t f = 0; f < paths.size(); ++f) {
    const std::string name = paths[f].string();
    std::ifstream in(paths[f]);
    if (!in) throw std::runtime_error(name + ": cannot open file");
    std::string line;
    if (!std::getline(in, line) || split(line, ',') != cols) {
      throw std::runtime_error(name + ": schema mismatch, expected header '" + join(cols, ',') + "'");
    }
    int row = 1;
    while (std::getline(in, line)) {
      ++row;
      if (line.empty()) continue;
      const std::vector<std::string> v = split(line, ',');
      if (v.size() != cols.size()) {
        throw std::runtime_error(name + ":" + std::to_string(row) + ": schema mismatch, expected " +
                                 std::to_string(cols.size()) + " columns");
      }
      try {
        const int it = parse_int(v[c_it]);
        if (parse_int(v[c_task]) != 1 || it < 1) continue;
        grouped[v[c_alg]][{f, parse_int(v[c_rep])}][it] = parse_number(v[c_best]);
      } catch (const std::invalid_argument& e) {
        throw std::runtime_error(name + ":" + std::to_string(row) + ": " + e.what());
      }
    }
  }
  std::map<std::string, IterationTable> out;
  for (const auto& [alg, reps] : grouped) {
    IterationTable& table = out[alg];
    for (const auto& [key, iterations] : reps) {
      for (const auto& [it, v] : iterations) table[it].push_back(v);
    }
  }
  return out;
}

void write_plot_csv(std::ostream& out, const std::map<std::string, IterationTable>& tables) {
  out << join(plot_columns(), ',') << '\n';
  for (const auto& [alg, table] : tables) {
    for (const auto& [it, values] : table) {
      out << alg << ',' << it << ',';
      write_summary_row(out, summarize(values));
    }
  }
}

}  // namespace samsbo::cli
