#include "samsbo_cli/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <limits>
#include <sstream>

namespace samsbo::cli {
namespace {

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return "";
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

// Thrown by value parsers; the caller attaches origin, line and key.
struct BadValue {
  std::string message;
};

double to_double(const std::string& v) {
  double out = 0.0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size() || !std::isfinite(out)) {
    throw BadValue{"expected a number, got '" + v + "'"};
  }
  return out;
}

long long to_integer(const std::string& v) {
  long long out = 0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size()) {
    throw BadValue{"expected an integer, got '" + v + "'"};
  }
  return out;
}

std::uint64_t to_unsigned(const std::string& v) {
  std::uint64_t out = 0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size()) {
    throw BadValue{"expected a nonnegative integer, got '" + v + "'"};
  }
  return out;
}

bool to_bool(const std::string& v) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw BadValue{"expected true or false, got '" + v + "'"};
}

std::string format(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

void require(bool ok, const std::string& message) {
  if (!ok) throw BadValue{message};
}

int bounded_int(const std::string& v, long long lo, long long hi) {
  const long long x = to_integer(v);
  require(x >= lo && x <= hi, "value " + v + " out of range [" + std::to_string(lo) + ", " +
                                  std::to_string(hi) + "]");
  return static_cast<int>(x);
}

double open_unit(const std::string& v) {
  const double x = to_double(v);
  require(x > 0.0 && x < 1.0, "value " + v + " must lie in (0, 1)");
  return x;
}

double positive(const std::string& v) {
  const double x = to_double(v);
  require(x > 0.0, "value " + v + " must be positive");
  return x;
}

double nonnegative(const std::string& v) {
  const double x = to_double(v);
  require(x >= 0.0, "value " + v + " must be nonnegative");
  return x;
}

struct Field {
  std::string key;
  std::function<void(ExperimentConfig&, const std::string&)> set;
  // Empty optional: key omitted on serialization.
  std::function<std::optional<std::string>(const ExperimentConfig&)> get;
};

constexpr int kIntMax = std::numeric_limits<int>::max();

const std::vector<Field>& fields() {
  static const std::vector<Field> table = {
      {"problem",
       [](ExperimentConfig& c, const std::string& v) {
         try {
           c.problem = parse_problem(v);
         } catch (const std::invalid_argument& e) {
           throw BadValue{e.what()};
         }
       },
       [](const ExperimentConfig& c) { return to_string(c.problem); }},
      {"dimension",
       [](ExperimentConfig& c, const std::string& v) {
         c.dimension = bounded_int(v, 4, 1024);
         require(c.dimension % 4 == 0, "dimension must be a multiple of 4");
       },
       [](const ExperimentConfig& c) { return std::to_string(c.dimension); }},
      {"subsystems",
       [](ExperimentConfig& c, const std::string& v) { c.subsystems = bounded_int(v, 1, 64); },
       [](const ExperimentConfig& c) { return std::to_string(c.subsystems); }},
      {"num_tasks",
       [](ExperimentConfig& c, const std::string& v) { c.num_tasks = bounded_int(v, 1, 16); },
       [](const ExperimentConfig& c) { return std::to_string(c.num_tasks); }},
      {"disturbance",
       [](ExperimentConfig& c, const std::string& v) { c.disturbance = nonnegative(v); },
       [](const ExperimentConfig& c) { return format(c.disturbance); }},
      {"threshold", [](ExperimentConfig& c, const std::string& v) { c.threshold = to_double(v); },
       [](const ExperimentConfig& c) -> std::optional<std::string> {
         if (!c.threshold) return std::nullopt;
         return format(*c.threshold);
       }},
      {"algorithms",
       [](ExperimentConfig& c, const std::string& v) {
         std::vector<Algorithm> list;
         std::stringstream ss(v);
         std::string item;
         while (std::getline(ss, item, ',')) {
           item = trim(item);
           try {
             list.push_back(parse_algorithm(item));
           } catch (const std::invalid_argument& e) {
             throw BadValue{e.what()};
           }
         }
         require(!list.empty(), "at least one algorithm is required");
         c.algorithms = list;
       },
       [](const ExperimentConfig& c) {
         std::string s;
         for (Algorithm a : c.algorithms) s += (s.empty() ? "" : ", ") + to_string(a);
         return s;
       }},
      {"iterations",
       [](ExperimentConfig& c, const std::string& v) { c.iterations = bounded_int(v, 0, 100000); },
       [](const ExperimentConfig& c) { return std::to_string(c.iterations); }},
      {"repetitions",
       [](ExperimentConfig& c, const std::string& v) { c.repetitions = bounded_int(v, 1, 100000); },
       [](const ExperimentConfig& c) { return std::to_string(c.repetitions); }},
      {"delta", [](ExperimentConfig& c, const std::string& v) { c.delta = open_unit(v); },
       [](const ExperimentConfig& c) { return format(c.delta); }},
      {"rho", [](ExperimentConfig& c, const std::string& v) { c.rho = open_unit(v); },
       [](const ExperimentConfig& c) { return format(c.rho); }},
      {"tau", [](ExperimentConfig& c, const std::string& v) { c.tau = open_unit(v); },
       [](const ExperimentConfig& c) { return format(c.tau); }},
      {"eta", [](ExperimentConfig& c, const std::string& v) { c.eta = positive(v); },
       [](const ExperimentConfig& c) { return format(c.eta); }},
      {"supplementary_batch",
       [](ExperimentConfig& c, const std::string& v) {
         c.supplementary_batch = bounded_int(v, 0, 100000);
       },
       [](const ExperimentConfig& c) { return std::to_string(c.supplementary_batch); }},
      {"grid_points",
       [](ExperimentConfig& c, const std::string& v) { c.grid_points = bounded_int(v, 1, 10000000); },
       [](const ExperimentConfig& c) { return std::to_string(c.grid_points); }},
      {"mcmc_samples",
       [](ExperimentConfig& c, const std::string& v) { c.mcmc_samples = bounded_int(v, 1, 10000000); },
       [](const ExperimentConfig& c) { return std::to_string(c.mcmc_samples); }},
      {"hyper_refresh",
       [](ExperimentConfig& c, const std::string& v) { c.hyper_refresh = bounded_int(v, 1, kIntMax); },
       [](const ExperimentConfig& c) { return std::to_string(c.hyper_refresh); }},
      {"include_psi", [](ExperimentConfig& c, const std::string& v) { c.include_psi = to_bool(v); },
       [](const ExperimentConfig& c) { return std::string(c.include_psi ? "true" : "false"); }},
      {"lengthscale", [](ExperimentConfig& c, const std::string& v) { c.lengthscale = positive(v); },
       [](const ExperimentConfig& c) -> std::optional<std::string> {
         if (!c.lengthscale) return std::nullopt;
         return format(*c.lengthscale);
       }},
      {"signal_variance",
       [](ExperimentConfig& c, const std::string& v) { c.signal_variance = positive(v); },
       [](const ExperimentConfig& c) -> std::optional<std::string> {
         if (!c.signal_variance) return std::nullopt;
         return format(*c.signal_variance);
       }},
      {"noise_variance",
       [](ExperimentConfig& c, const std::string& v) { c.noise_variance = nonnegative(v); },
       [](const ExperimentConfig& c) { return format(c.noise_variance); }},
      {"observation_noise",
       [](ExperimentConfig& c, const std::string& v) { c.observation_noise = nonnegative(v); },
       [](const ExperimentConfig& c) { return format(c.observation_noise); }},
      {"initial_seeds",
       [](ExperimentConfig& c, const std::string& v) { c.initial_seeds = bounded_int(v, 1, 100000); },
       [](const ExperimentConfig& c) { return std::to_string(c.initial_seeds); }},
      {"local_candidates",
       [](ExperimentConfig& c, const std::string& v) {
         c.local_candidates = bounded_int(v, 0, 10000000);
       },
       [](const ExperimentConfig& c) { return std::to_string(c.local_candidates); }},
      {"local_radius", [](ExperimentConfig& c, const std::string& v) { c.local_radius = positive(v); },
       [](const ExperimentConfig& c) { return format(c.local_radius); }},
      {"seed", [](ExperimentConfig& c, const std::string& v) { c.seed = to_unsigned(v); },
       [](const ExperimentConfig& c) { return std::to_string(c.seed); }},
      {"jobs", [](ExperimentConfig& c, const std::string& v) { c.jobs = bounded_int(v, 1, 4096); },
       [](const ExperimentConfig& c) { return std::to_string(c.jobs); }},
      {"out",
       [](ExperimentConfig& c, const std::string& v) {
         require(!v.empty(), "output directory must not be empty");
         c.out = v;
       },
       [](const ExperimentConfig& c) { return c.out; }},
      {"frequentist_trials",
       [](ExperimentConfig& c, const std::string& v) {
         c.frequentist_trials = bounded_int(v, 0, 10000000);
       },
       [](const ExperimentConfig& c) { return std::to_string(c.frequentist_trials); }},
      {"bayesian_trials",
       [](ExperimentConfig& c, const std::string& v) {
         c.bayesian_trials = bounded_int(v, 0, 10000000);
       },
       [](const ExperimentConfig& c) { return std::to_string(c.bayesian_trials); }},
      {"trials",
       [](ExperimentConfig& c, const std::string& v) {
         c.frequentist_trials = c.bayesian_trials = bounded_int(v, 0, 10000000);
       },
       [](const ExperimentConfig&) -> std::optional<std::string> { return std::nullopt; }},
  };
  return table;
}

std::string where(const std::string& origin, int line) {
  return line > 0 ? origin + ":" + std::to_string(line) : origin;
}

}  // namespace

ConfigParseError::ConfigParseError(const std::string& origin, int line, const std::string& message)
    : std::runtime_error(where(origin, line) + ": " + message), line_(line) {}

std::string to_string(ProblemKind p) {
  switch (p) {
    case ProblemKind::Branin: return "branin";
    case ProblemKind::Powell: return "powell";
    case ProblemKind::Laser: return "laser";
  }
  return "unknown";
}

ProblemKind parse_problem(const std::string& name) {
  for (ProblemKind p : {ProblemKind::Branin, ProblemKind::Powell, ProblemKind::Laser}) {
    if (to_string(p) == name) return p;
  }
  throw std::invalid_argument("unknown problem '" + name + "' (expected branin, powell or laser)");
}

ProblemDefaults problem_defaults(ProblemKind p) {
  switch (p) {
    case ProblemKind::Branin: return {0.15, 16.0};
    case ProblemKind::Powell: return {0.3, 9.0};
    case ProblemKind::Laser: return {0.3, 1.0};
  }
  return {0.2, 1.0};
}

ExperimentConfig parse_config_text(const std::string& text, const std::string& origin) {
  ExperimentConfig c;
  std::istringstream in(text);
  std::string raw;
  int line = 0;
  while (std::getline(in, raw)) {
    ++line;
    const std::string content = trim(raw.substr(0, raw.find('#')));
    if (content.empty()) continue;
    const auto eq = content.find('=');
    if (eq == std::string::npos) {
      throw ConfigParseError(origin, line, "expected 'key = value', got '" + content + "'");
    }
    const std::string key = trim(content.substr(0, eq));
    const std::string value = trim(content.substr(eq + 1));
    const auto& table = fields();
    const auto it = std::find_if(table.begin(), table.end(),
                                 [&](const Field& f) { return f.key == key; });
    if (it == table.end()) throw ConfigParseError(origin, line, "unknown key '" + key + "'");
    try {
      it->set(c, value);
    } catch (const BadValue& e) {
      throw ConfigParseError(origin, line, "key '" + key + "': " + e.message);
    }
  }
  validate(c, origin);
  return c;
}

ExperimentConfig parse_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigParseError(path, 0, "cannot open config file");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config_text(buf.str(), path);
}

std::string serialize_config(const ExperimentConfig& config) {
  std::string out;
  for (const Field& f : fields()) {
    if (const auto v = f.get(config)) out += f.key + " = " + *v + "\n";
  }
  return out;
}

void validate(const ExperimentConfig& c, const std::string& origin) {
  const bool multitask = std::any_of(c.algorithms.begin(), c.algorithms.end(), is_multitask);
  if (multitask && c.num_tasks < 2) {
    throw ConfigParseError(origin, 0, "key 'num_tasks': multi-task algorithms need at least 2 tasks");
  }
}

RepetitionSeeds repetition_seeds(const ExperimentConfig& config, int repetition) {
  const auto r = static_cast<std::uint64_t>(repetition);
  return {derive_seed(config.seed, r, 101), derive_seed(config.seed, r, 202)};
}

std::unique_ptr<Problem> make_problem(const ExperimentConfig& c, std::uint64_t problem_seed) {
  std::unique_ptr<Problem> p;
  double cap = std::numeric_limits<double>::infinity();
  if (c.problem == ProblemKind::Laser) {
    LaserChainSpec spec;
    spec.subsystems = c.subsystems;
    spec.disturbance_factor = c.disturbance;
    spec.num_tasks = c.num_tasks;
    spec.seed = problem_seed;
    if (c.threshold) spec.threshold = *c.threshold;
    auto laser = std::make_unique<LaserChainProblem>(spec);
    // Penalty values of unstable loops would dominate the scale.
    cap = 0.999 * laser->penalty();
    p = std::move(laser);
  } else {
    SyntheticSpec spec;
    spec.kind = c.problem == ProblemKind::Powell ? SyntheticKind::Powell : SyntheticKind::Branin;
    spec.dimension = c.problem == ProblemKind::Powell ? c.dimension : 2;
    spec.num_tasks = c.num_tasks;
    spec.shift_factor = c.disturbance;
    spec.seed = problem_seed;
    if (c.threshold) spec.threshold = *c.threshold;
    p = std::make_unique<SyntheticProblem>(spec);
  }
  if (c.observation_noise > 0.0) p->set_noise_std(c.observation_noise * p->output_scale(1024, cap));
  return p;
}

OptimizerConfig optimizer_config(const ExperimentConfig& c, Algorithm algorithm,
                                 std::uint64_t optimizer_seed) {
  const ProblemDefaults d = problem_defaults(c.problem);
  OptimizerConfig o;
  o.algorithm = algorithm;
  o.iterations = c.iterations;
  o.delta = c.delta;
  o.rho = c.rho;
  o.tau = c.tau;
  o.eta = c.eta;
  o.supplementary_batch = c.supplementary_batch;
  o.grid_points = c.grid_points;
  o.mcmc_samples = c.mcmc_samples;
  o.hyper_refresh = c.hyper_refresh;
  o.include_psi = c.include_psi;
  o.lengthscale = c.lengthscale.value_or(d.lengthscale);
  o.signal_variance = c.signal_variance.value_or(d.signal_variance);
  o.noise_variance = c.noise_variance;
  o.initial_seeds = c.initial_seeds;
  o.local_candidates = c.local_candidates;
  o.local_radius = c.local_radius;
  o.seed = optimizer_seed;
  return o;
}

}  // namespace samsbo::cli
