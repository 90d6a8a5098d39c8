#include "samsbo_cli/commands.hpp"

#include <atomic>
#include <chrono>
#include <fstream>
#include <ostream>
#include <sstream>
#include <string>
#include <thread>

#include "json.hpp"
#include "samsbo/coverage.hpp"
#include "samsbo_cli/results.hpp"

#ifndef SAMSBO_VERSION
#define SAMSBO_VERSION "unknown"
#endif

namespace samsbo::cli {
namespace {

using json = nlohmann::ordered_json;

struct Job {
  Algorithm algorithm;
  int repetition;
  RepetitionSeeds seeds;
  std::vector<TraceRecord> trace;
  bool ok = false;
  std::string error;
  double threshold = 0.0;
  double seconds = 0.0;
};

void execute(const ExperimentConfig& config, Job& job) {
  const auto start = std::chrono::steady_clock::now();
  try {
    const std::unique_ptr<Problem> problem = make_problem(config, job.seeds.problem);
    job.threshold = problem->threshold();
    job.trace = run(*problem, optimizer_config(config, job.algorithm, job.seeds.optimizer));
    job.ok = true;
  } catch (const std::exception& e) {
    job.error = e.what();
  }
  job.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error(path.string() + ": cannot open for writing");
  out << content;
  if (!out) throw std::runtime_error(path.string() + ": write failed");
}

json config_json(const ExperimentConfig& config) {
  json j = json::object();
  std::istringstream in(serialize_config(config));
  std::string line;
  while (std::getline(in, line)) {
    const auto eq = line.find(" = ");
    j[line.substr(0, eq)] = line.substr(eq + 3);
  }
  return j;
}

json report_json(const CoverageReport& r) {
  return json{{"suite", r.suite},       {"trials", r.trials}, {"successes", r.successes},
              {"coverage", r.coverage}, {"target", r.target}, {"passed", r.passed}};
}

}  // namespace

int cmd_run(const ExperimentConfig& config, const std::filesystem::path& out_dir, std::ostream& log) {
  std::filesystem::create_directories(out_dir);
  std::vector<Job> jobs;
  for (Algorithm a : config.algorithms) {
    for (int r = 0; r < config.repetitions; ++r) {
      Job job{a, r, repetition_seeds(config, r), {}, false, {}, 0.0, 0.0};
      jobs.push_back(std::move(job));
    }
  }

  const auto start = std::chrono::steady_clock::now();
  std::atomic<std::size_t> next{0};
  const auto worker = [&] {
    for (std::size_t i = next++; i < jobs.size(); i = next++) execute(config, jobs[i]);
  };
  const unsigned workers =
      static_cast<unsigned>(std::min<std::size_t>(static_cast<std::size_t>(config.jobs), jobs.size()));
  std::vector<std::thread> pool;
  for (unsigned w = 1; w < workers; ++w) pool.emplace_back(worker);
  worker();
  for (std::thread& t : pool) t.join();
  const double total = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  json manifest;
  manifest["tool"] = "samsbo";
  manifest["version"] = SAMSBO_VERSION;
  manifest["config"] = config_json(config);
  manifest["config_text"] = serialize_config(config);
  json algorithms = json::array();
  int failures = 0;
  for (Algorithm a : config.algorithms) {
    std::vector<RepetitionTrace> traces;
    double threshold = 0.0;
    json reps = json::array();
    for (const Job& job : jobs) {
      if (job.algorithm != a) continue;
      json rep{{"repetition", job.repetition},
               {"problem_seed", job.seeds.problem},
               {"optimizer_seed", job.seeds.optimizer},
               {"status", job.ok ? "ok" : "failed"},
               {"wall_time_seconds", job.seconds}};
      if (job.ok) {
        threshold = job.threshold;
        traces.push_back({job.repetition, job.trace});
        int violations = 0;
        int evaluations = 0;
        for (const TraceRecord& r : job.trace) {
          if (r.task != 1 || r.stalled) continue;
          ++evaluations;
          if (r.true_value > job.threshold) ++violations;
        }
        rep["main_evaluations"] = evaluations;
        rep["violations"] = violations;
        rep["final_best"] = job.trace.empty() ? 0.0 : job.trace.back().best_so_far;
      } else {
        ++failures;
        rep["error"] = job.error;
        log << to_string(a) << " repetition " << job.repetition << " failed: " << job.error << '\n';
      }
      reps.push_back(rep);
    }
    const std::string name = to_string(a);
    std::ostringstream raw, aggregate;
    write_raw_csv(raw, a, threshold, traces);
    write_aggregate_csv(aggregate, best_by_iteration(traces));
    write_file(out_dir / ("raw_" + name + ".csv"), raw.str());
    write_file(out_dir / ("aggregate_" + name + ".csv"), aggregate.str());
    algorithms.push_back(json{{"algorithm", name},
                              {"raw_csv", "raw_" + name + ".csv"},
                              {"aggregate_csv", "aggregate_" + name + ".csv"},
                              {"repetitions", reps}});
    log << name << ": " << traces.size() << "/" << config.repetitions << " repetitions ok\n";
  }
  manifest["algorithms"] = algorithms;
  manifest["failures"] = failures;
  manifest["wall_time_seconds"] = total;
  write_file(out_dir / "manifest.json", manifest.dump(2) + "\n");
  return failures == static_cast<int>(jobs.size()) ? 1 : 0;
}

int cmd_verify_bounds(const ExperimentConfig& config, const std::filesystem::path& out_dir,
                      std::ostream& log) {
  FrequentistCoverageConfig fc;
  fc.trials = config.frequentist_trials;
  fc.delta = config.delta;
  fc.seed = derive_seed(config.seed, 1);
  BayesianCoverageConfig bc;
  bc.trials = config.bayesian_trials;
  bc.delta = config.delta;
  bc.rho = config.rho;
  bc.eta = config.eta;
  bc.tau = config.tau;
  bc.mcmc_samples = config.mcmc_samples;
  bc.seed = derive_seed(config.seed, 2);

  json suites = json::array();
  bool all = true;
  for (const CoverageReport& r : {frequentist_coverage(fc), bayesian_coverage(bc)}) {
    if (r.trials == 0) continue;
    all = all && r.passed;
    suites.push_back(report_json(r));
    log << r.suite << ": coverage " << r.coverage << " (" << r.successes << "/" << r.trials
        << "), target " << r.target << ": " << (r.passed ? "PASS" : "FAIL") << '\n';
  }
  std::filesystem::create_directories(out_dir);
  json report{{"tool", "samsbo"},
              {"version", SAMSBO_VERSION},
              {"seed", config.seed},
              {"suites", suites}};
  write_file(out_dir / "coverage.json", report.dump(2) + "\n");
  return all ? 0 : 1;
}

int cmd_plotdata(const std::vector<std::filesystem::path>& inputs, std::ostream& out) {
  write_plot_csv(out, read_raw_csvs(inputs));
  return 0;
}

}  // namespace samsbo::cli
