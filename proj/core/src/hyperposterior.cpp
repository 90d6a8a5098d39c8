#include "samsbo/hyperposterior.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <limits>
#include <numeric>
#include <random>
#include <sstream>
#include <stdexcept>

#include "samsbo/errors.hpp"
#include "samsbo/gp.hpp"
#include "samsbo/two_task_likelihood.hpp"

namespace samsbo {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

struct ChainResult {
  std::vector<Eigen::MatrixXd> samples;
  std::vector<double> log_densities;
  int accepted = 0;
  int retained_steps = 0;
  double final_step = 0.0;
  Eigen::VectorXd final_state;
};

class Target {
 public:
  Target(const MultiTaskDataset& data, const HyperPrior& prior,
         const KernelParams& params, const McmcConfig& config)
      : data_(data), prior_(prior), params_(params), config_(config),
        u_(data.num_tasks()) {
    if (u_ == 2 && config.two_task_fast_path) fast_.emplace(data, params);
  }

  struct Evaluation {
    double target = kNegInf;   // includes the Jacobian
    double density = kNegInf;  // log likelihood + LKJ
    Eigen::MatrixXd matrix;
  };

  Evaluation operator()(const Eigen::VectorXd& y) const {
    Evaluation out;
    if ((y.array().abs() > config_.max_abs_coordinate).any()) return out;
    Eigen::VectorXd folded = y;
    if (u_ == 2) folded = y.cwiseAbs();
    ConstrainedCorrelation c = correlation_from_unconstrained(folded);
    if (prior_.nonnegative && (c.matrix.array() < 0.0).any()) return out;
    double loglik = 0.0;
    double lkj = 0.0;
    try {
      if (fast_) {
        loglik = fast_->log_likelihood(c.matrix(0, 1));
      } else {
        loglik = log_marginal_likelihood(data_, CorrelationMatrix(c.matrix), params_);
      }
      lkj = lkj_log_density(CorrelationMatrix(c.matrix), prior_.eta);
    } catch (const std::exception&) {
      return out;
    }
    if (!std::isfinite(loglik) || !std::isfinite(lkj)) return out;
    out.density = loglik + lkj;
    out.target = out.density + c.log_jacobian;
    out.matrix = std::move(c.matrix);
    return out;
  }

 private:
  const MultiTaskDataset& data_;
  HyperPrior prior_;
  KernelParams params_;
  McmcConfig config_;
  int u_;
  std::optional<TwoTaskLikelihood> fast_;
};

ChainResult run_chain(const Target& target, int dim, int retained, int burn_in,
                      int chain, const McmcConfig& config) {
  std::seed_seq seq{static_cast<std::uint32_t>(config.seed & 0xffffffffu),
                    static_cast<std::uint32_t>(config.seed >> 32),
                    static_cast<std::uint32_t>(chain)};
  std::mt19937_64 rng(seq);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> uniform(0.0, 1.0);

  Eigen::VectorXd state = Eigen::VectorXd::Constant(dim, 0.3);
  if (config.warm_start && config.warm_start->size() == dim) {
    state = config.warm_start->cwiseMax(-config.max_abs_coordinate)
                .cwiseMin(config.max_abs_coordinate);
    if (chain > 0) {
      for (int i = 0; i < dim; ++i) state(i) += 0.1 * normal(rng);
    }
  }
  Target::Evaluation current = target(state);
  if (!std::isfinite(current.target)) {
    state = Eigen::VectorXd::Constant(dim, 0.3);
    current = target(state);
  }
  if (!std::isfinite(current.target)) {
    throw ChainFailure("hyper-posterior has no finite density at the starting point");
  }

  double log_step = std::log(config.initial_step);
  ChainResult out;
  out.samples.reserve(static_cast<std::size_t>(retained));
  out.log_densities.reserve(static_cast<std::size_t>(retained));
  const int total = burn_in + retained;
  for (int t = 0; t < total; ++t) {
    Eigen::VectorXd proposal = state;
    const double step = std::exp(log_step);
    for (int i = 0; i < dim; ++i) proposal(i) += step * normal(rng);
    Target::Evaluation next = target(proposal);
    double accept_prob = 0.0;
    if (std::isfinite(next.target)) {
      accept_prob = std::min(1.0, std::exp(next.target - current.target));
    }
    const bool accept = uniform(rng) < accept_prob;
    if (accept) {
      state = std::move(proposal);
      current = std::move(next);
    }
    if (t < burn_in) {
      log_step += (accept_prob - config.target_acceptance) / std::pow(t + 1.0, 0.6);
      log_step = std::clamp(log_step, std::log(1e-4), std::log(10.0));
    } else {
      out.accepted += accept ? 1 : 0;
      ++out.retained_steps;
      out.samples.push_back(current.matrix);
      out.log_densities.push_back(current.density);
    }
  }
  out.final_step = std::exp(log_step);
  out.final_state = state;
  return out;
}

}  // namespace

double lkj_log_density(const CorrelationMatrix& sigma, double eta) {
  if (!(eta > 0.0)) throw std::invalid_argument("LKJ shape must be positive");
  if (!sigma.is_normalized()) {
    throw std::invalid_argument("LKJ density needs a unit-diagonal correlation matrix");
  }
  if (eta == 1.0) return 0.0;
  return (eta - 1.0) * sigma.log_determinant();
}

double max_correlation(double max_abs_coordinate) {
  return std::tanh(max_abs_coordinate);
}

ConstrainedCorrelation correlation_from_unconstrained(const Eigen::VectorXd& y) {
  const double m = static_cast<double>(y.size());
  const int u = static_cast<int>(std::lround((1.0 + std::sqrt(1.0 + 8.0 * m)) / 2.0));
  if (u * (u - 1) / 2 != y.size()) {
    throw std::invalid_argument("unconstrained vector length is not u(u-1)/2");
  }
  Eigen::MatrixXd l = Eigen::MatrixXd::Zero(u, u);
  double log_jac = 0.0;
  l(0, 0) = 1.0;
  Eigen::Index k = 0;
  for (int i = 1; i < u; ++i) {
    const double z0 = std::tanh(y(k++));
    log_jac += std::log1p(-z0 * z0);
    l(i, 0) = z0;
    double sum_sqs = z0 * z0;
    for (int j = 1; j < i; ++j) {
      const double z = std::tanh(y(k++));
      log_jac += std::log1p(-z * z);
      log_jac += 0.5 * std::log1p(-sum_sqs);
      l(i, j) = z * std::sqrt(std::max(0.0, 1.0 - sum_sqs));
      sum_sqs += l(i, j) * l(i, j);
    }
    l(i, i) = std::sqrt(std::max(0.0, 1.0 - sum_sqs));
  }
  // Cholesky factor to correlation matrix.
  for (int i = 1; i < u; ++i) {
    log_jac += static_cast<double>(u - i - 1) * std::log(l(i, i));
  }
  ConstrainedCorrelation out;
  out.matrix = l * l.transpose();
  out.matrix.diagonal().setOnes();
  out.log_jacobian = log_jac;
  return out;
}

EmpiricalHyperPosterior sample_hyperposterior(const MultiTaskDataset& data,
                                              const HyperPrior& prior,
                                              const KernelParams& params,
                                              int n_samples,
                                              const McmcConfig& config) {
  const int u = data.num_tasks();
  if (u < 2) throw std::invalid_argument("hyper-posterior needs at least two tasks");
  if (n_samples < 10) throw std::invalid_argument("need at least 10 samples");
  if (config.chains < 1) throw std::invalid_argument("need at least one chain");
  if (!(config.burn_in_fraction >= 0.0 && config.burn_in_fraction < 1.0)) {
    throw std::invalid_argument("burn-in fraction must lie in [0, 1)");
  }
  if (!(prior.eta > 0.0)) throw std::invalid_argument("LKJ shape must be positive");

  const int dim = u * (u - 1) / 2;
  const Target target(data, prior, params, config);

  std::vector<int> per_chain(static_cast<std::size_t>(config.chains),
                             n_samples / config.chains);
  for (int c = 0; c < n_samples % config.chains; ++c) ++per_chain[static_cast<std::size_t>(c)];

  std::vector<ChainResult> results(static_cast<std::size_t>(config.chains));
  const auto burn_for = [&](int retained) {
    return static_cast<int>(std::lround(retained * config.burn_in_fraction /
                                        (1.0 - config.burn_in_fraction)));
  };
  if (config.chains == 1) {
    results[0] = run_chain(target, dim, per_chain[0], burn_for(per_chain[0]), 0, config);
  } else {
    std::vector<std::future<ChainResult>> futures;
    for (int c = 0; c < config.chains; ++c) {
      const int m = per_chain[static_cast<std::size_t>(c)];
      futures.push_back(std::async(std::launch::async, [&, c, m] {
        return run_chain(target, dim, m, burn_for(m), c, config);
      }));
    }
    for (int c = 0; c < config.chains; ++c) {
      results[static_cast<std::size_t>(c)] = futures[static_cast<std::size_t>(c)].get();
    }
  }

  EmpiricalHyperPosterior out;
  int accepted = 0;
  int steps = 0;
  for (const ChainResult& r : results) {
    for (std::size_t i = 0; i < r.samples.size(); ++i) {
      out.samples.emplace_back(r.samples[i]);
      out.log_densities.push_back(r.log_densities[i]);
    }
    accepted += r.accepted;
    steps += r.retained_steps;
  }
  out.diagnostics.acceptance_rate =
      steps > 0 ? static_cast<double>(accepted) / static_cast<double>(steps) : 0.0;
  out.diagnostics.chain_length = per_chain[0] + burn_for(per_chain[0]);
  out.diagnostics.burn_in = burn_for(per_chain[0]);
  out.diagnostics.final_step = results[0].final_step;
  out.final_state = results[0].final_state;
  if (out.diagnostics.acceptance_rate < 0.01) {
    std::ostringstream msg;
    msg << "MCMC acceptance rate " << out.diagnostics.acceptance_rate
        << " below 0.01 after adaptation (final step " << out.diagnostics.final_step << ")";
    throw ChainFailure(msg.str());
  }
  return out;
}

ConfidenceSet confidence_set(const EmpiricalHyperPosterior& posterior, double rho) {
  if (posterior.samples.empty()) throw std::invalid_argument("no hyper-posterior samples");
  if (!(rho > 0.0 && rho < 1.0)) throw std::invalid_argument("rho must lie in (0, 1)");
  const std::size_t n = posterior.samples.size();
  const auto keep = static_cast<std::size_t>(
      std::ceil((1.0 - rho) * static_cast<double>(n) - 1e-9));
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return posterior.log_densities[a] > posterior.log_densities[b];
  });
  ConfidenceSet out;
  out.rho = rho;
  for (std::size_t i = 0; i < std::max<std::size_t>(keep, 1); ++i) {
    out.members.push_back(posterior.samples[order[i]]);
    out.log_densities.push_back(posterior.log_densities[order[i]]);
  }
  return out;
}

}  // namespace samsbo
