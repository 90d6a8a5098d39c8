#include "samsbo/safe_opt.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "samsbo/errors.hpp"
#include "samsbo/linalg.hpp"
#include "samsbo/two_task_likelihood.hpp"

namespace samsbo {

std::string to_string(Algorithm a) {
  switch (a) {
    case Algorithm::SaMSBO: return "samsbo";
    case Algorithm::SafeUCB: return "safe-ucb";
    case Algorithm::UCB: return "ucb";
    case Algorithm::MultiTaskUCB: return "multi-task-ucb";
  }
  return "unknown";
}

Algorithm parse_algorithm(const std::string& name) {
  for (Algorithm a : {Algorithm::SaMSBO, Algorithm::SafeUCB, Algorithm::UCB,
                      Algorithm::MultiTaskUCB}) {
    if (to_string(a) == name) return a;
  }
  throw std::invalid_argument("unknown algorithm '" + name +
                              "' (expected samsbo, safe-ucb, ucb or multi-task-ucb)");
}

bool is_safe(Algorithm a) { return a == Algorithm::SaMSBO || a == Algorithm::SafeUCB; }
bool is_multitask(Algorithm a) { return a == Algorithm::SaMSBO || a == Algorithm::MultiTaskUCB; }

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t a, std::uint64_t b) {
  const auto mix = [](std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  };
  return mix(mix(mix(base) ^ a) ^ (b * 0x632be59bd9b4e019ULL));
}

Transforms fit_transforms(const MultiTaskDataset& data, const Box& box) {
  if (data.empty()) throw std::invalid_argument("cannot fit transforms on an empty dataset");
  if ((box.width().array() <= 0.0).any()) throw std::invalid_argument("degenerate domain box");
  Transforms t;
  t.box = box;
  const Eigen::VectorXd& y = data.observations();
  t.mean = y.mean();
  const double n = static_cast<double>(y.size());
  const double sd = std::sqrt((y.array() - t.mean).square().sum() / n);
  t.scale = sd < 1e-8 ? 1.0 : sd;
  return t;
}

MultiTaskDataset apply_transforms(const MultiTaskDataset& data, const Transforms& t) {
  MultiTaskDataset out(data.dimension(), data.num_tasks());
  for (Eigen::Index i = 0; i < data.size(); ++i) {
    out.add(t.normalize(data.input(i)), data.task(i), t.standardize(data.observations()(i)));
  }
  return out;
}

CandidateGrid make_grid(int n, int d) {
  if (n < 1) throw std::invalid_argument("grid needs at least one point");
  return CandidateGrid{lattice_sequence(n, d)};
}

Eigen::Index SafeSet::count() const {
  return static_cast<Eigen::Index>(std::count(mask.begin(), mask.end(), true));
}

SafeSet safe_set(const BatchPrediction& main, const ScalingBundle& bundle, double threshold_std) {
  SafeSet out;
  out.threshold = threshold_std;
  const double root = std::sqrt(bundle.beta_bar);
  out.mask.resize(static_cast<std::size_t>(main.mean.size()));
  for (Eigen::Index i = 0; i < main.mean.size(); ++i) {
    const double upper = main.mean(i) + root * std::sqrt(main.variance(i)) + bundle.psi;
    out.mask[static_cast<std::size_t>(i)] = upper <= threshold_std;
  }
  return out;
}

SafeSet safe_set(const Posterior& posterior, const ScalingBundle& bundle, double threshold_std,
                 const CandidateGrid& grid) {
  return safe_set(posterior.predict_batch(grid.points, TaskIndex::main()), bundle, threshold_std);
}

namespace {

Eigen::Index optimistic_argmin(const BatchPrediction& main, double beta_bar,
                               const std::vector<bool>* mask) {
  const double root = std::sqrt(beta_bar);
  Eigen::Index best = -1;
  double best_value = std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < main.mean.size(); ++i) {
    if (mask != nullptr && !(*mask)[static_cast<std::size_t>(i)]) continue;
    const double lcb = main.mean(i) - root * std::sqrt(main.variance(i));
    if (best < 0 || lcb < best_value) {
      best = i;
      best_value = lcb;
    }
  }
  return best;
}

}  // namespace

Eigen::Index acquire_main(const BatchPrediction& main, const SafeSet& safe, double beta_bar) {
  if (safe.mask.size() != static_cast<std::size_t>(main.mean.size())) {
    throw std::invalid_argument("safe-set mask and predictions differ in size");
  }
  const Eigen::Index best = optimistic_argmin(main, beta_bar, &safe.mask);
  if (best < 0) throw NoSafeAction("safe set is empty");
  return best;
}

Eigen::Index acquire_unconstrained(const BatchPrediction& main, double beta_bar) {
  if (main.mean.size() == 0) throw std::invalid_argument("no candidates");
  return optimistic_argmin(main, beta_bar, nullptr);
}

std::vector<Eigen::Index> acquire_supplementary(const Posterior& posterior,
                                                const CandidateGrid& grid, TaskIndex z,
                                                int batch_size) {
  if (batch_size < 1) throw std::invalid_argument("batch size must be at least 1");
  const Eigen::Index m = grid.size();
  const KernelParams& params = posterior.params();
  const double task_var = posterior.sigma()(z.zero_based(), z.zero_based());
  const Eigen::MatrixXd v = posterior.whitened_cross(grid.points, z);
  const bool has_data = posterior.dataset().size() > 0;

  Eigen::VectorXd var = Eigen::VectorXd::Constant(m, task_var * params.signal_variance);
  if (has_data) var -= v.colwise().squaredNorm().transpose();
  var = var.cwiseMax(0.0);

  std::vector<Eigen::VectorXd> updates;  // rank-one fantasy factors
  std::vector<Eigen::Index> picks;
  for (int b = 0; b < batch_size; ++b) {
    Eigen::Index p = 0;
    for (Eigen::Index i = 1; i < m; ++i) {
      if (var(i) > var(p)) p = i;
    }
    picks.push_back(p);
    if (b + 1 == batch_size) break;
    // Conditional covariance between every candidate and the pick.
    Eigen::VectorXd cov =
        task_var * se_kernel_matrix(grid.points, grid.points.row(p), params).col(0);
    if (has_data) cov -= v.transpose() * v.col(p);
    for (const Eigen::VectorXd& w : updates) cov -= w * w(p);
    const double denom = std::sqrt(var(p) + params.noise_variance);
    Eigen::VectorXd w = cov / denom;
    var = (var - w.cwiseAbs2()).cwiseMax(0.0);
    updates.push_back(std::move(w));
  }
  return picks;
}

std::size_t select_sigma_prime(const ConfidenceSet& set) {
  if (set.members.empty()) throw std::invalid_argument("confidence set is empty");
  const std::vector<CorrelationMatrix> unique = unique_members(set.members);
  std::vector<Eigen::MatrixXd> inverses;
  inverses.reserve(unique.size());
  for (const CorrelationMatrix& m : unique) inverses.push_back(m.inverse());
  std::size_t best = 0;
  double best_value = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < unique.size(); ++i) {
    double worst = 0.0;
    for (const CorrelationMatrix& other : unique) {
      worst = std::max(worst, linalg::spectral_norm(inverses[i] * other.matrix()));
      if (worst >= best_value) break;
    }
    if (worst < best_value) {
      best_value = worst;
      best = i;
    }
  }
  // Map back to the first occurrence in the (density-ordered) member list.
  for (std::size_t i = 0; i < set.members.size(); ++i) {
    if (set.members[i] == unique[best]) return i;
  }
  return 0;
}

Optimizer::Optimizer(const Problem& problem, OptimizerConfig config)
    : problem_(problem),
      config_(config),
      model_tasks_(is_multitask(config.algorithm) ? problem.num_tasks() : 1),
      grid_(make_grid(config.grid_points, problem.dimension())),
      noise_rng_(derive_seed(config.seed, 2)),
      state_(MultiTaskDataset(problem.dimension(), model_tasks_)) {
  if (config_.iterations < 0) throw std::invalid_argument("iterations must be >= 0");
  if (!(config_.delta > 0.0 && config_.delta < 1.0)) throw std::invalid_argument("delta must lie in (0, 1)");
  if (!(config_.rho > 0.0 && config_.rho < 1.0)) throw std::invalid_argument("rho must lie in (0, 1)");
  if (config_.hyper_refresh < 1) throw std::invalid_argument("hyper_refresh must be >= 1");
  if (is_multitask(config_.algorithm) && problem.num_tasks() < 2) {
    throw std::invalid_argument("multi-task algorithms need a supplementary task");
  }
  state_.sigma_prime = CorrelationMatrix::identity(model_tasks_);
  state_.transforms.box = problem.domain();
  start_ = std::chrono::steady_clock::now();
}

KernelParams Optimizer::kernel_params() const {
  KernelParams p;
  p.signal_variance = config_.signal_variance;
  p.lengthscales = Eigen::VectorXd::Constant(problem_.dimension(), config_.lengthscale);
  p.noise_variance = config_.noise_variance;
  return p;
}

int Optimizer::batch_size() const {
  return config_.supplementary_batch > 0 ? config_.supplementary_batch : 2 * problem_.dimension();
}

void Optimizer::record(TaskIndex z, const Eigen::VectorXd& x, double observed, double truth) {
  TraceRecord r;
  r.iteration = state_.iteration;
  r.task = z.value();
  r.x = x;
  r.observed = observed;
  r.true_value = truth;
  r.best_so_far = state_.best_input ? state_.best_value : std::numeric_limits<double>::quiet_NaN();
  r.beta_bar = state_.bundle.beta_bar;
  r.confidence_set_size = static_cast<int>(state_.confidence_set.members.size());
  r.gamma = state_.bundle.gamma;
  r.nu = state_.bundle.nu;
  r.safe_set_size = state_.last_safe_set_size;
  r.stalled = state_.last_stalled;
  r.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  trace_.push_back(std::move(r));
}

void Optimizer::observe(TaskIndex z, const Eigen::VectorXd& x) {
  const double truth = problem_.evaluate_true(z, x);
  double observed = truth;
  if (problem_.noise_std() > 0.0) {
    std::normal_distribution<double> normal(0.0, problem_.noise_std());
    observed += normal(noise_rng_);
  }
  state_.data.add(x, z, observed);
  if (z.is_main()) {
    if (!state_.best_input || observed < state_.best_value) {
      state_.best_input = x;
      state_.best_value = observed;
    }
    if (truth > problem_.threshold()) ++state_.violation_count;
  }
  record(z, x, observed, truth);
}

void Optimizer::initialize(const std::vector<Eigen::VectorXd>& seeds) {
  if (seeds.empty()) throw std::invalid_argument("at least one safe seed is required");
  state_.last_safe_set_size = -1;
  state_.last_stalled = false;
  for (const Eigen::VectorXd& x : seeds) observe(TaskIndex::main(), x);
}

void Optimizer::update_hyperposterior(const MultiTaskDataset& standardized) {
  McmcConfig mc;
  mc.seed = derive_seed(config_.seed, 3, static_cast<std::uint64_t>(state_.iteration));
  mc.warm_start = state_.mcmc_warm_start;
  const EmpiricalHyperPosterior post = sample_hyperposterior(
      standardized, HyperPrior{config_.eta, true}, kernel_params(), config_.mcmc_samples, mc);
  state_.confidence_set = confidence_set(post, config_.rho);
  state_.mcmc_warm_start = post.final_state;
}

CandidateGrid Optimizer::candidates() const {
  std::vector<Eigen::VectorXd> centers;
  for (Eigen::Index i = 0; i < state_.data.size(); ++i) {
    if (state_.data.task(i).is_main()) centers.push_back(state_.transforms.normalize(state_.data.input(i)));
  }
  if (config_.local_candidates <= 0 || centers.empty()) return grid_;
  const Eigen::Index d = grid_.points.cols();
  CandidateGrid out;
  out.points.resize(grid_.size() + config_.local_candidates, d);
  out.points.topRows(grid_.size()) = grid_.points;
  std::mt19937_64 rng(derive_seed(config_.seed, 5, static_cast<std::uint64_t>(state_.iteration)));
  std::uniform_int_distribution<std::size_t> pick(0, centers.size() - 1);
  std::normal_distribution<double> normal(
      0.0, config_.local_radius * config_.lengthscale / std::sqrt(static_cast<double>(d)));
  for (int j = 0; j < config_.local_candidates; ++j) {
    const Eigen::VectorXd& c = centers[pick(rng)];
    for (Eigen::Index k = 0; k < d; ++k) {
      out.points(grid_.size() + j, k) = std::clamp(c(k) + normal(rng), 0.0, 1.0);
    }
  }
  return out;
}

void Optimizer::step() {
  if (state_.data.empty()) throw std::logic_error("initialize the optimizer before stepping");
  ++state_.iteration;
  const KernelParams params = kernel_params();
  const Box& box = problem_.domain();

  // (1) supplementary evaluations
  if (model_tasks_ > 1) {
    const Transforms t = fit_transforms(state_.data, box);
    const Posterior post(apply_transforms(state_.data, t), state_.sigma_prime, params);
    for (int z = 2; z <= model_tasks_; ++z) {
      const std::vector<Eigen::Index> picks =
          acquire_supplementary(post, grid_, TaskIndex{z}, batch_size());
      for (Eigen::Index p : picks) {
        observe(TaskIndex{z}, box.from_unit(grid_.points.row(p).transpose()));
      }
    }
  }

  // (2) transforms
  state_.transforms = fit_transforms(state_.data, box);
  const MultiTaskDataset standardized = apply_transforms(state_.data, state_.transforms);

  // (3), (4) confidence set and Σ'
  if (model_tasks_ > 1) {
    if ((state_.iteration - 1) % config_.hyper_refresh == 0 ||
        state_.confidence_set.members.empty()) {
      update_hyperposterior(standardized);
    }
    state_.sigma_prime =
        state_.confidence_set.members[select_sigma_prime(state_.confidence_set)];
  } else {
    state_.confidence_set.members = {CorrelationMatrix::identity(1)};
    state_.confidence_set.log_densities = {0.0};
    state_.confidence_set.rho = config_.rho;
    state_.sigma_prime = CorrelationMatrix::identity(1);
  }

  // (5) scaling factors
  const Posterior post(standardized, state_.sigma_prime, params);
  const BoundGeometry geometry(standardized, params);
  std::vector<MemberFit> fits;
  const std::vector<CorrelationMatrix> members = unique_members(state_.confidence_set.members);
  if (model_tasks_ == 2) {
    const TwoTaskLikelihood fast(standardized, params);
    for (const CorrelationMatrix& m : members) fits.push_back({m, fast.alpha(m(0, 1))});
  } else {
    for (const CorrelationMatrix& m : members) {
      fits.push_back({m, Posterior(standardized, m, params).alpha()});
    }
  }
  BundleOptions options;
  options.include_psi = config_.include_psi;
  if (config_.include_psi) {
    if (feature_lipschitz_ < 0.0) {
      feature_lipschitz_ = estimate_feature_lipschitz(
          params, config_.delta, 500, LipschitzGrid{.seed = derive_seed(config_.seed, 4)});
    }
    options.feature_lipschitz = feature_lipschitz_;
  }
  const DiscretizationSpec spec{config_.tau, problem_.dimension(), Norm::LInf};
  state_.bundle = scaling_bundle(geometry, MemberFit{state_.sigma_prime, post.alpha()}, fits,
                                 config_.rho, spec, params, config_.delta, options);

  // (6), (7) safe set and main evaluation
  const CandidateGrid cands = candidates();
  const BatchPrediction main = post.predict_batch(cands.points, TaskIndex::main());
  Eigen::Index pick = -1;
  if (is_safe(config_.algorithm)) {
    const SafeSet safe =
        safe_set(main, state_.bundle, state_.transforms.standardize(problem_.threshold()));
    state_.last_safe_set_size = safe.count();
    try {
      pick = acquire_main(main, safe, state_.bundle.beta_bar);
    } catch (const NoSafeAction&) {
      pick = -1;
    }
  } else {
    state_.last_safe_set_size = -1;
    pick = acquire_unconstrained(main, state_.bundle.beta_bar);
  }

  // (8) bookkeeping
  if (pick < 0) {
    state_.last_stalled = true;
    const double nan = std::numeric_limits<double>::quiet_NaN();
    record(TaskIndex::main(), Eigen::VectorXd::Constant(problem_.dimension(), nan), nan, nan);
  } else {
    state_.last_stalled = false;
    observe(TaskIndex::main(), box.from_unit(cands.points.row(pick).transpose()));
  }
}

std::vector<TraceRecord> run(const Problem& problem, const OptimizerConfig& config) {
  Optimizer opt(problem, config);
  opt.initialize(problem.safe_seeds(config.initial_seeds, derive_seed(config.seed, 1)));
  for (int i = 0; i < config.iterations; ++i) opt.step();
  return opt.trace();
}

}  // namespace samsbo
