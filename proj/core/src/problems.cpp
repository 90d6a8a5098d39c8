#include "samsbo/problems.hpp"

#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "samsbo/errors.hpp"
#include "samsbo/lyapunov.hpp"

namespace samsbo {

bool Box::contains(const Eigen::VectorXd& x) const {
  return x.size() == lower.size() && (x.array() >= lower.array()).all() &&
         (x.array() <= upper.array()).all();
}

Eigen::VectorXd Box::from_unit(const Eigen::VectorXd& unit) const {
  return lower + unit.cwiseProduct(width());
}

Eigen::VectorXd Box::to_unit(const Eigen::VectorXd& x) const {
  return (x - lower).cwiseQuotient(width());
}

void Problem::set_noise_std(double s) {
  if (!(s >= 0.0) || !std::isfinite(s)) throw std::invalid_argument("noise std must be >= 0");
  noise_std_ = s;
}

double Problem::evaluate(TaskIndex z, const Eigen::VectorXd& x, std::mt19937_64& rng) const {
  const double value = evaluate_true(z, x);
  if (noise_std_ == 0.0) return value;
  std::normal_distribution<double> normal(0.0, noise_std_);
  return value + normal(rng);
}

std::vector<Eigen::VectorXd> Problem::safe_seeds(int count, std::uint64_t seed, double margin,
                                                 int max_draws) const {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  const Box& box = domain();
  std::vector<Eigen::VectorXd> out;
  for (int draw = 0; draw < max_draws && static_cast<int>(out.size()) < count; ++draw) {
    Eigen::VectorXd u(box.dimension());
    for (Eigen::Index k = 0; k < u.size(); ++k) u(k) = unif(rng);
    Eigen::VectorXd x = box.from_unit(u);
    if (evaluate_true(TaskIndex::main(), x) <= threshold() - margin) out.push_back(std::move(x));
  }
  if (static_cast<int>(out.size()) < count) {
    std::ostringstream msg;
    msg << name() << ": found only " << out.size() << " of " << count << " safe seeds in "
        << max_draws << " draws";
    throw std::runtime_error(msg.str());
  }
  return out;
}

double Problem::output_scale(int points, double cap) const {
  const Eigen::MatrixXd unit = lattice_sequence(points, dimension());
  double sum = 0.0;
  double sum_sq = 0.0;
  int n = 0;
  for (Eigen::Index i = 0; i < unit.rows(); ++i) {
    const double v = evaluate_true(TaskIndex::main(), domain().from_unit(unit.row(i).transpose()));
    if (v >= cap) continue;
    sum += v;
    sum_sq += v * v;
    ++n;
  }
  if (n < 2) return 1.0;
  const double mean = sum / n;
  return std::sqrt(std::max(0.0, sum_sq / n - mean * mean));
}

Eigen::MatrixXd lattice_sequence(int n, int d) {
  if (n < 0 || d < 1) throw std::invalid_argument("invalid lattice size");
  double phi = 2.0;
  for (int it = 0; it < 100; ++it) phi = std::pow(1.0 + phi, 1.0 / (d + 1.0));
  Eigen::VectorXd a(d);
  for (int k = 0; k < d; ++k) a(k) = std::fmod(std::pow(1.0 / phi, k + 1), 1.0);
  Eigen::MatrixXd out(n, d);
  for (int i = 0; i < n; ++i) {
    for (int k = 0; k < d; ++k) {
      const double v = 0.5 + static_cast<double>(i) * a(k);
      out(i, k) = v - std::floor(v);
    }
  }
  return out;
}

double powell(const Eigen::VectorXd& x) {
  if (x.size() == 0 || x.size() % 4 != 0) {
    throw std::invalid_argument("Powell dimension must be a positive multiple of 4");
  }
  double out = 0.0;
  for (Eigen::Index g = 0; g < x.size(); g += 4) {
    const double a = x(g) + 10.0 * x(g + 1);
    const double b = x(g + 2) - x(g + 3);
    const double c = x(g + 1) - 2.0 * x(g + 2);
    const double e = x(g) - x(g + 3);
    out += a * a + 5.0 * b * b + c * c * c * c + 10.0 * e * e * e * e;
  }
  return out;
}

double branin(const Eigen::VectorXd& x) {
  if (x.size() != 2) throw std::invalid_argument("Branin is two-dimensional");
  constexpr double pi = std::numbers::pi;
  const double b = 5.1 / (4.0 * pi * pi);
  const double c = 5.0 / pi;
  const double t = 1.0 / (8.0 * pi);
  const double inner = x(1) - b * x(0) * x(0) + c * x(0) - 6.0;
  return inner * inner + 10.0 * (1.0 - t) * std::cos(x(0)) + 10.0;
}

SyntheticProblem::SyntheticProblem(const SyntheticSpec& spec) : spec_(spec) {
  if (spec.num_tasks < 1) throw std::invalid_argument("need at least one task");
  if (!(spec.shift_factor >= 0.0)) throw std::invalid_argument("shift factor must be >= 0");
  const int d = spec.dimension;
  if (spec.kind == SyntheticKind::Powell) {
    if (d <= 0 || d % 4 != 0) throw std::invalid_argument("Powell dimension must be a multiple of 4");
    box_ = {Eigen::VectorXd::Constant(d, -4.0), Eigen::VectorXd::Constant(d, 5.0)};
    threshold_ = 35000.0;
  } else {
    if (d != 2) throw std::invalid_argument("Branin is two-dimensional");
    box_ = {Eigen::Vector2d(-5.0, 0.0), Eigen::Vector2d(10.0, 15.0)};
    threshold_ = 150.0;
  }
  if (spec.threshold > 0.0) threshold_ = spec.threshold;
  std::mt19937_64 rng(spec.seed);
  std::bernoulli_distribution coin(0.5);
  shifts_.push_back(Eigen::VectorXd::Zero(d));
  const Eigen::VectorXd magnitude = spec.shift_factor * box_.width() / 2.0;
  for (int t = 1; t < spec.num_tasks; ++t) {
    Eigen::VectorXd s(d);
    for (int k = 0; k < d; ++k) s(k) = coin(rng) ? magnitude(k) : -magnitude(k);
    shifts_.push_back(s);
  }
}

std::string SyntheticProblem::name() const {
  return spec_.kind == SyntheticKind::Powell ? "powell" : "branin";
}

double SyntheticProblem::base(const Eigen::VectorXd& x) const {
  return spec_.kind == SyntheticKind::Powell ? powell(x) : branin(x);
}

const Eigen::VectorXd& SyntheticProblem::shift(TaskIndex z) const {
  z.check(spec_.num_tasks);
  return shifts_[static_cast<std::size_t>(z.zero_based())];
}

double SyntheticProblem::evaluate_true(TaskIndex z, const Eigen::VectorXd& x) const {
  return base(x + shift(z));
}

double shifted_supplementary(const SyntheticProblem& problem, const Eigen::VectorXd& x,
                             const Eigen::VectorXd& shift) {
  return problem.base(x + shift);
}

LaserChainProblem::LaserChainProblem(const LaserChainSpec& spec) : spec_(spec) {
  const int n = spec.subsystems;
  if (n < 1) throw std::invalid_argument("need at least one subsystem");
  if (spec.num_tasks < 1) throw std::invalid_argument("need at least one task");
  if (!(spec.disturbance_factor >= 0.0 && spec.disturbance_factor < 1.0)) {
    throw std::invalid_argument("disturbance factor must lie in [0, 1)");
  }
  if (!(spec.threshold > 0.0)) throw std::invalid_argument("threshold must be positive");
  box_.lower.resize(2 * n);
  box_.upper.resize(2 * n);
  for (int i = 0; i < n; ++i) {
    box_.lower(2 * i) = 0.0;
    box_.upper(2 * i) = spec.kp_max;
    box_.lower(2 * i + 1) = spec.ki_min;
    box_.upper(2 * i + 1) = spec.ki_max;
  }
  // Nominal laser and disturbance models; each subsystem differs slightly.
  std::vector<FilterModel> nominal;
  nominal.push_back({-0.5, 0.5, 6.0});  // reference
  for (int i = 0; i < n; ++i) {
    const double s = static_cast<double>(i % 5);
    omega_.push_back(3.0 + 0.5 * s);
    zeta_.push_back(0.35 + 0.05 * s);
    nominal.push_back({-(1.0 + 0.3 * s), 1.0 + 0.3 * s, 3.0 + 0.5 * s});
  }
  filters_.push_back(nominal);
  std::mt19937_64 rng(spec.seed);
  std::bernoulli_distribution coin(0.5);
  const double f = spec.disturbance_factor;
  for (int t = 1; t < spec.num_tasks; ++t) {
    std::vector<FilterModel> perturbed = nominal;
    for (FilterModel& m : perturbed) {
      m.a += (coin(rng) ? f : -f) * std::abs(m.a);
      m.b += (coin(rng) ? f : -f) * std::abs(m.b);
      m.c += (coin(rng) ? f : -f) * std::abs(m.c);
    }
    filters_.push_back(std::move(perturbed));
  }
}

const std::vector<FilterModel>& LaserChainProblem::filters(TaskIndex z) const {
  z.check(spec_.num_tasks);
  return filters_[static_cast<std::size_t>(z.zero_based())];
}

LaserChainProblem::StateSpace LaserChainProblem::closed_loop(const Eigen::VectorXd& gains,
                                                            TaskIndex z) const {
  const int n = spec_.subsystems;
  if (gains.size() != 2 * n) throw std::invalid_argument("expected 2N controller gains");
  const std::vector<FilterModel>& f = filters(z);
  // Per subsystem: plant position, plant velocity, integrator, filter; then reference filter.
  const int states = 4 * n + 1;
  const int ref = 4 * n;
  const auto pos = [](int i) { return 4 * i; };
  const auto vel = [](int i) { return 4 * i + 1; };
  const auto integ = [](int i) { return 4 * i + 2; };
  const auto filt = [](int i) { return 4 * i + 3; };

  // Laser output y_i = position_i + c_i·filter_i; reference r = c_r·filter_r.
  const auto output_row = [&](int i) {
    Eigen::RowVectorXd row = Eigen::RowVectorXd::Zero(states);
    if (i < 0) {
      row(ref) = f[0].c;
    } else {
      row(pos(i)) = 1.0;
      row(filt(i)) = f[static_cast<std::size_t>(i) + 1].c;
    }
    return row;
  };

  StateSpace ss;
  ss.a = Eigen::MatrixXd::Zero(states, states);
  ss.b = Eigen::MatrixXd::Zero(states, n + 1);
  ss.c = Eigen::MatrixXd::Zero(n, states);
  for (int i = 0; i < n; ++i) {
    const Eigen::RowVectorXd error = output_row(i - 1) - output_row(i);
    ss.c.row(i) = error;
    const double w = omega_[static_cast<std::size_t>(i)];
    const double zeta = zeta_[static_cast<std::size_t>(i)];
    const double kp = gains(2 * i);
    const double ki = gains(2 * i + 1);
    ss.a(pos(i), vel(i)) = 1.0;
    ss.a(vel(i), pos(i)) += -w * w;
    ss.a(vel(i), vel(i)) += -2.0 * zeta * w;
    ss.a.row(vel(i)) += w * w * kp * error;
    ss.a(vel(i), integ(i)) += w * w * ki;
    ss.a.row(integ(i)) += error;
    const FilterModel& m = f[static_cast<std::size_t>(i) + 1];
    ss.a(filt(i), filt(i)) = m.a;
    ss.b(filt(i), i + 1) = m.b * spec_.noise_gain;
  }
  ss.a(ref, ref) = f[0].a;
  ss.b(ref, 0) = f[0].b * spec_.noise_gain;
  return ss;
}

double LaserChainProblem::evaluate_true(TaskIndex z, const Eigen::VectorXd& x) const {
  return h2_cost(x, *this, z);
}

double h2_cost(const Eigen::VectorXd& gains, const LaserChainProblem& problem, TaskIndex z) {
  const LaserChainProblem::StateSpace ss = problem.closed_loop(gains, z);
  if (spectral_abscissa(ss.a) >= -1e-9) return problem.penalty();
  try {
    const double cost = h2_norm(ss.a, ss.b, ss.c);
    if (!std::isfinite(cost)) return problem.penalty();
    return std::min(cost, problem.penalty());
  } catch (const StabilityError&) {
    return problem.penalty();
  }
}

}  // namespace samsbo
