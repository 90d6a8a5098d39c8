#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "json.hpp"
#include "samsbo_cli/commands.hpp"
#include "samsbo_cli/config.hpp"
#include "samsbo_cli/results.hpp"

using namespace samsbo;
using namespace samsbo::cli;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

std::string first_line(const std::string& text) { return text.substr(0, text.find('\n') + 1); }

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("samsbo_test_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

const char* kTinyRun =
    "problem = branin\n"
    "algorithms = safe-ucb, samsbo\n"
    "iterations = 2\n"
    "repetitions = 2\n"
    "grid_points = 128\n"
    "local_candidates = 16\n"
    "mcmc_samples = 30\n"
    "seed = 5\n";

}  // namespace

TEST_CASE("config defaults and round trip") {
  const ExperimentConfig d = parse_config_text("");
  CHECK(d == ExperimentConfig{});
  CHECK(d.iterations == 40);
  CHECK(d.repetitions == 15);
  CHECK(d.delta == 0.05);
  CHECK(d.rho == 0.15);
  CHECK(d.tau == 0.001);
  CHECK(d.eta == 0.1);
  CHECK(d.disturbance == 0.3);
  CHECK(parse_config_text(serialize_config(d)) == d);

  ExperimentConfig c = parse_config_text(
      "# comment line\n"
      "problem = powell   # trailing comment\n"
      "dimension = 8\n"
      "algorithms = ucb,multi-task-ucb\n"
      "rho = 0.2\n"
      "threshold = 30000\n"
      "lengthscale = 0.35\n"
      "include_psi = true\n"
      "seed = 18446744073709551615\n"
      "trials = 12\n");
  CHECK(c.problem == ProblemKind::Powell);
  CHECK(c.dimension == 8);
  CHECK(c.algorithms == std::vector<Algorithm>{Algorithm::UCB, Algorithm::MultiTaskUCB});
  CHECK(c.threshold == 30000.0);
  CHECK(c.lengthscale == 0.35);
  CHECK(c.include_psi);
  CHECK(c.seed == 18446744073709551615ull);
  CHECK(c.frequentist_trials == 12);
  CHECK(c.bayesian_trials == 12);
  CHECK(parse_config_text(serialize_config(c)) == c);
  c.noise_variance = 0.1 + 0.2;
  CHECK(parse_config_text(serialize_config(c)) == c);
}

TEST_CASE("config errors name the line and key") {
  auto message = [](const std::string& text) {
    try {
      parse_config_text(text, "exp.cfg");
    } catch (const ConfigParseError& e) {
      return std::string(e.what());
    }
    return std::string("no error");
  };
  CHECK(message("rho = 1.5\n") == "exp.cfg:1: key 'rho': value 1.5 must lie in (0, 1)");
  CHECK(message("\n\nbogus = 3\n").rfind("exp.cfg:3: unknown key 'bogus'", 0) == 0);
  CHECK(message("iterations = ten\n").find("exp.cfg:1: key 'iterations'") == 0);
  CHECK(message("delta = 0\n").find("key 'delta'") != std::string::npos);
  CHECK(message("problem = rosenbrock\n").find("key 'problem'") != std::string::npos);
  CHECK(message("algorithms = safeopt\n").find("key 'algorithms'") != std::string::npos);
  CHECK(message("dimension = 6\nproblem = powell\n").find("key 'dimension'") != std::string::npos);
  CHECK(message("num_tasks = 1\n").find("num_tasks") != std::string::npos);
  CHECK(message("just words\n").find("exp.cfg:1:") == 0);
  CHECK_THROWS_AS(parse_config("/nonexistent/samsbo.cfg"), ConfigParseError);
}

TEST_CASE("problem construction and seeds") {
  ExperimentConfig c;
  c.problem = ProblemKind::Powell;
  const RepetitionSeeds s0 = repetition_seeds(c, 0);
  const RepetitionSeeds s1 = repetition_seeds(c, 1);
  CHECK(s0.problem != s1.problem);
  CHECK(s0.problem != s0.optimizer);
  CHECK(repetition_seeds(c, 1).optimizer == s1.optimizer);

  const auto p = make_problem(c, s0.problem);
  CHECK(p->dimension() == 4);
  CHECK(p->threshold() == 35000.0);
  CHECK(p->noise_std() == 0.0);
  c.observation_noise = 0.01;
  CHECK(make_problem(c, s0.problem)->noise_std() > 0.0);

  const OptimizerConfig o = optimizer_config(c, Algorithm::SafeUCB, 9);
  CHECK(o.lengthscale == problem_defaults(ProblemKind::Powell).lengthscale);
  CHECK(o.signal_variance == problem_defaults(ProblemKind::Powell).signal_variance);
  CHECK(o.seed == 9);
  c.lengthscale = 0.7;
  CHECK(optimizer_config(c, Algorithm::SafeUCB, 9).lengthscale == 0.7);

  c.problem = ProblemKind::Laser;
  CHECK(make_problem(c, 1)->dimension() == 10);
}

TEST_CASE("quantiles and summaries") {
  const std::vector<double> v{1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
  CHECK(quantile(v, 0.1) == doctest::Approx(1.9));
  CHECK(quantile(v, 0.5) == doctest::Approx(5.5));
  CHECK(quantile(v, 0.9) == doctest::Approx(9.1));
  CHECK(quantile({4.0}, 0.3) == 4.0);
  const Summary s = summarize(v);
  CHECK(s.median == doctest::Approx(5.5));
  CHECK(s.q10 == doctest::Approx(1.9));
  CHECK(s.mean == doctest::Approx(5.5));
  CHECK(s.std == doctest::Approx(std::sqrt(55.0 / 6.0)));
  CHECK(summarize({3.0}).std == 0.0);
  CHECK(format_number(0.1) == "0.1");
  CHECK(format_number(std::numeric_limits<double>::quiet_NaN()) == "nan");
  CHECK(format_number(std::numeric_limits<double>::infinity()) == "inf");
}

TEST_CASE("raw csv layout and best-so-far table") {
  TraceRecord seed;
  seed.iteration = 0;
  seed.x = Eigen::Vector2d(0.5, 1.0);
  seed.observed = seed.true_value = seed.best_so_far = 10.0;
  TraceRecord supp = seed;
  supp.iteration = 1;
  supp.task = 2;
  supp.true_value = supp.observed = 500.0;
  TraceRecord main = seed;
  main.iteration = 1;
  main.observed = main.true_value = 200.0;
  main.best_so_far = 10.0;
  TraceRecord better = main;
  better.iteration = 2;
  better.observed = better.true_value = better.best_so_far = 4.0;

  const std::vector<RepetitionTrace> reps{{0, {seed, supp, main, better}}, {1, {seed, main, main}}};
  std::ostringstream raw;
  write_raw_csv(raw, Algorithm::SaMSBO, 150.0, reps);
  const std::string text = raw.str();
  CHECK(first_line(text) == slurp(fs::path(SAMSBO_GOLDEN_DIR) / "raw_header.csv"));
  std::istringstream lines(text);
  std::string header, r0, r1, r2;
  std::getline(lines, header);
  std::getline(lines, r0);
  std::getline(lines, r1);
  std::getline(lines, r2);
  CHECK(r0.rfind("samsbo,0,0,1,0.5;1,10,10,10,0,", 0) == 0);
  // Supplementary evaluations above the threshold are not violations.
  CHECK(r1.rfind("samsbo,0,1,2,0.5;1,500,500,10,0,", 0) == 0);
  CHECK(r2.rfind("samsbo,0,1,1,0.5;1,200,200,10,1,", 0) == 0);

  const IterationTable table = best_by_iteration(reps);
  REQUIRE(table.size() == 2u);
  CHECK(table.at(1) == std::vector<double>{10.0, 10.0});
  CHECK(table.at(2) == std::vector<double>{4.0});

  std::ostringstream agg;
  write_aggregate_csv(agg, table);
  CHECK(agg.str() == "iteration,median,q10,q90,mean,std\n1,10,10,10,10,0\n2,4,4,4,4,0\n");
}

TEST_CASE("run, determinism, manifest and plot data") {
  const ExperimentConfig c = parse_config_text(kTinyRun);
  const fs::path a = scratch("run_a");
  const fs::path b = scratch("run_b");
  std::ostringstream log;
  REQUIRE(cmd_run(c, a, log) == 0);
  REQUIRE(cmd_run(c, b, log) == 0);
  for (const char* name : {"raw_samsbo.csv", "raw_safe-ucb.csv", "aggregate_samsbo.csv",
                           "aggregate_safe-ucb.csv"}) {
    REQUIRE(fs::exists(a / name));
    CHECK(slurp(a / name) == slurp(b / name));
  }
  CHECK(first_line(slurp(a / "raw_samsbo.csv")) ==
        slurp(fs::path(SAMSBO_GOLDEN_DIR) / "raw_header.csv"));

  const nlohmann::json m = nlohmann::json::parse(slurp(a / "manifest.json"));
  CHECK(m["config"]["seed"] == "5");
  REQUIRE(m["algorithms"].size() == 2u);
  CHECK(m["algorithms"][0]["algorithm"] == "safe-ucb");
  CHECK(m["algorithms"][1]["repetitions"].size() == 2u);
  CHECK(m["algorithms"][1]["repetitions"][0]["status"] == "ok");
  CHECK(m["algorithms"][1]["repetitions"][0]["main_evaluations"] >= 5);
  CHECK(m["algorithms"][1]["repetitions"][0].contains("wall_time_seconds"));
  CHECK(m["failures"] == 0);
  CHECK(parse_config_text(m["config_text"].get<std::string>()) == c);

  std::ostringstream plot;
  REQUIRE(cmd_plotdata({a / "raw_samsbo.csv", a / "raw_safe-ucb.csv"}, plot) == 0);
  CHECK(first_line(plot.str()) == slurp(fs::path(SAMSBO_GOLDEN_DIR) / "plot_header.csv"));
  const std::map<std::string, IterationTable> tables =
      read_raw_csvs({a / "raw_samsbo.csv", a / "raw_safe-ucb.csv"});
  CHECK(tables.size() == 2u);
  CHECK(tables.at("samsbo").at(2).size() == 2u);

  const fs::path bad = a / "bad.csv";
  std::ofstream(bad) << "algorithm,iteration,value\nsamsbo,1,3\n";
  try {
    read_raw_csvs({bad});
    FAIL("schema mismatch not detected");
  } catch (const std::runtime_error& e) {
    CHECK(std::string(e.what()).find("bad.csv") != std::string::npos);
    CHECK(std::string(e.what()).find("schema mismatch") != std::string::npos);
  }
  fs::remove_all(a);
  fs::remove_all(b);
}
