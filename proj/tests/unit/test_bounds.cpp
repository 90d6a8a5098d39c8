#include <cmath>
#include <random>

#include "doctest.h"
#include "oracles.hpp"
#include "samsbo/bounds.hpp"
#include "samsbo/errors.hpp"
#include "samsbo/gp.hpp"

using namespace samsbo;

namespace {

KernelParams params(int d, double sf2, double ls, double noise) {
  KernelParams p;
  p.signal_variance = sf2;
  p.lengthscales = Eigen::VectorXd::Constant(d, ls);
  p.noise_variance = noise;
  return p;
}

MemberFit fit_of(const MultiTaskDataset& d, const CorrelationMatrix& s, const KernelParams& p) {
  return MemberFit{s, oracle::dense_alpha(d, s.matrix(), p)};
}

}  // namespace

TEST_CASE("formula spot values") {
  CHECK(covering_number(0.001, 2) == 251001u);
  CHECK(covering_number(0.001, 1) == 501u);
  CHECK(covering_number(0.5, 3) == 8u);
  CHECK(beta_bayes(251001, 0.05) == doctest::Approx(2.0 * std::log(251001.0 / 0.05)));
  CHECK(std::abs(beta_bayes(251001, 0.05) - 30.857) <= 1e-3);
  CHECK(std::abs(beta_freq(1.0, 0, 0.05) - 11.887) <= 1e-3);
  const double l = std::log(20.0);
  CHECK(beta_freq(2.0, 30, 0.05) ==
        doctest::Approx(std::pow(2.0 + std::sqrt(30.0 + 2.0 * std::sqrt(30.0 * l) + 2.0 * l), 2)));
}

TEST_CASE("discretization cardinality") {
  DiscretizationSpec spec;
  spec.tau = 0.001;
  spec.dimension = 2;
  CHECK(spec.points_per_axis() == 501u);
  CHECK(spec.cardinality() == 251001u);
  CHECK(spec.log_cardinality() == doctest::Approx(std::log(251001.0)));
  spec.dimension = 10;
  CHECK_THROWS_AS(spec.cardinality(), std::overflow_error);
  CHECK(spec.log_cardinality() == doctest::Approx(10.0 * std::log(501.0)));
  CHECK(beta_bayes_from_log(spec.log_cardinality(), 0.05) ==
        doctest::Approx(2.0 * (10.0 * std::log(501.0) - std::log(0.05))));
}

TEST_CASE("operator norms and exact rkhs norm") {
  const CorrelationMatrix s = CorrelationMatrix::two_task(0.5);
  CHECK(operator_norm_lambda(s, s) == doctest::Approx(1.0));
  const CorrelationMatrix id = CorrelationMatrix::identity(2);
  // ‖I⁻¹Σ‖₂ = 1.5.
  CHECK(operator_norm_lambda(s, id) == doctest::Approx(std::sqrt(1.5)));
  CHECK(gamma_factor(id, {s, id}) == doctest::Approx(std::sqrt(1.5)));
  CHECK(gamma_factor(s, {s}) == doctest::Approx(1.0));

  const Eigen::MatrixXd g = Eigen::Vector2d(1.0, 4.0).asDiagonal();
  CHECK(rkhs_norm_exact(id, g) == doctest::Approx(std::sqrt(5.0)));
  const LatentNormSpec latent = LatentNormSpec::from_norms(Eigen::Vector2d(3.0, 4.0));
  CHECK(latent.total_norm() == doctest::Approx(5.0));
  CHECK(beta_freq_robust(latent, id, 10, 0.1) == doctest::Approx(beta_freq(5.0, 10, 0.1)));
  Eigen::MatrixXd half(2, 2);
  half << 0.5, 0.0, 0.0, 0.5;
  CHECK(beta_freq_robust(latent, CorrelationMatrix(half), 10, 0.1) ==
        doctest::Approx(beta_freq(5.0 * std::sqrt(2.0), 10, 0.1)));
}

TEST_CASE("moduli of continuity and lipschitz bounds") {
  Eigen::MatrixXd d13 = Eigen::MatrixXd::Zero(2, 2);
  d13.diagonal() << 1.0, 3.0;
  const std::vector<CorrelationMatrix> members{CorrelationMatrix::two_task(0.2), CorrelationMatrix(d13)};
  CHECK(modulus_sigma(0.01, 2.0, members) == doctest::Approx(std::sqrt(2.0 * 0.01 * 3.0 * 2.0)));
  CHECK(modulus_mu(0.01, 2.0, members, {5.0, 1.0}) ==
        doctest::Approx(std::max(std::sqrt(0.04) * 5.0, std::sqrt(0.12) * 1.0)));
  // ‖Σ^{1/2} 1‖₂ = √(1ᵀΣ1).
  CHECK(sample_lipschitz_bound({CorrelationMatrix::two_task(0.5)}, 2.0) ==
        doctest::Approx(2.0 * std::sqrt(3.0)));
  CHECK(sample_lipschitz_bound(members, 1.0) == doctest::Approx(2.0));
}

TEST_CASE("feature lipschitz estimate") {
  const KernelParams p = params(1, 1.0, 0.3, 1e-4);
  LipschitzGrid grid;
  grid.seed = 3;
  const double lh = estimate_feature_lipschitz(p, 0.05, 200, grid);
  // The slope of a unit-variance SE path has standard deviation 1/ℓ.
  CHECK(lh > 1.0 / 0.3);
  CHECK(lh < 10.0 / 0.3);
  CHECK(estimate_feature_lipschitz(p, 0.05, 200, grid) == lh);
  CHECK(estimate_feature_lipschitz(params(1, 4.0, 0.3, 1e-4), 0.05, 200, grid) ==
        doctest::Approx(2.0 * lh));
  grid.nodes_per_axis = 5;
  CHECK_THROWS_AS(estimate_feature_lipschitz(p, 0.05, 10, grid), ConfigError);
}

TEST_CASE("nu vanishes for a single member equal to the reference") {
  std::mt19937_64 rng(8);
  const MultiTaskDataset d = oracle::random_dataset(rng, 10, 1, 2);
  const KernelParams p = params(1, 1.0, 0.3, 1e-2);
  const CorrelationMatrix s = CorrelationMatrix::two_task(0.6);
  CHECK(nu_factor(d, s, {s, s}, p) == doctest::Approx(0.0).epsilon(1e-10));
  CHECK(unique_members({s, s, CorrelationMatrix::identity(2), s}).size() == 2);
}

TEST_CASE("nu closed form matches the finite-feature oracle") {
  std::mt19937_64 rng(13);
  std::uniform_int_distribution<int> size(2, 12);
  for (int trial = 0; trial < 200; ++trial) {
    const int u = 2 + trial % 2;
    const MultiTaskDataset d = oracle::random_dataset(rng, size(rng), 1 + trial % 2, u);
    const KernelParams p = params(d.dimension(), 1.0, 0.3, 0.05);
    const CorrelationMatrix sp(oracle::random_correlation(rng, u));
    const CorrelationMatrix s(oracle::random_correlation(rng, u));
    const BoundGeometry geo(d, p);
    const double got = geo.nu_squared(fit_of(d, sp, p), fit_of(d, s, p));
    const double want = oracle::nu_squared_features(d, sp.matrix(), s.matrix(), p);
    REQUIRE(std::abs(got - want) <= 1e-6 * std::max(1.0, want));
    REQUIRE(nu_factor(d, sp, {s}, p) == doctest::Approx(std::sqrt(want)).epsilon(1e-5));
  }
}

TEST_CASE("mean norm and training means") {
  std::mt19937_64 rng(17);
  const MultiTaskDataset d = oracle::random_dataset(rng, 7, 1, 2);
  const KernelParams p = params(1, 1.3, 0.25, 1e-2);
  const CorrelationMatrix s = CorrelationMatrix::two_task(0.4);
  const BoundGeometry geo(d, p);
  const MemberFit f = fit_of(d, s, p);
  const Posterior post(d, s, p);
  CHECK(std::sqrt(geo.mean_norm_squared(f)) == doctest::Approx(post.mean_rkhs_norm()).epsilon(1e-6));
  const Eigen::MatrixXd m = geo.training_means(f);
  for (Eigen::Index i = 0; i < d.size(); ++i) {
    for (int z = 1; z <= 2; ++z) {
      CHECK(m(i, z - 1) == doctest::Approx(post.predict(d.input(i), TaskIndex{z}).mean).epsilon(1e-6));
    }
  }
}

TEST_CASE("scaling bundle composition") {
  std::mt19937_64 rng(21);
  const MultiTaskDataset d = oracle::random_dataset(rng, 12, 1, 2);
  const KernelParams p = params(1, 1.0, 0.3, 1e-2);
  DiscretizationSpec spec;
  spec.dimension = 1;

  ConfidenceSet one;
  one.members = {CorrelationMatrix::two_task(0.5)};
  one.rho = 0.15;
  const ScalingBundle b1 = scaling_bundle(d, one.members[0], one, spec, p, 0.05);
  CHECK(b1.beta_b == doctest::Approx(beta_bayes(501, 0.05)));
  CHECK(b1.nu == doctest::Approx(0.0).epsilon(1e-10));
  CHECK(b1.gamma == doctest::Approx(1.0));
  CHECK(b1.beta_bar == doctest::Approx(b1.beta_b));
  CHECK(b1.psi == 0.0);

  ConfidenceSet two = one;
  two.members.push_back(CorrelationMatrix::two_task(0.9));
  const ScalingBundle b2 = scaling_bundle(d, two.members[0], two, spec, p, 0.05);
  CHECK(b2.nu > 0.0);
  CHECK(b2.gamma >= 1.0);
  CHECK(b2.gamma == doctest::Approx(gamma_factor(two.members[0], two.members)));
  CHECK(b2.nu == doctest::Approx(nu_factor(d, two.members[0], two.members, p)));
  CHECK(b2.beta_bar == doctest::Approx(std::pow(b2.nu + b2.gamma * std::sqrt(b2.beta_b), 2)));

  BundleOptions with_psi;
  with_psi.include_psi = true;
  with_psi.feature_lipschitz = 3.0;
  const ScalingBundle b3 = scaling_bundle(d, two.members[0], two, spec, p, 0.05, with_psi);
  CHECK(b3.psi > 0.0);
  CHECK(b3.L_f == doctest::Approx(sample_lipschitz_bound(two.members, 3.0)));
  CHECK(b3.omega_sigma == doctest::Approx(modulus_sigma(spec.tau, kernel_lipschitz(p, Norm::LInf), two.members)));
  CHECK(b3.beta_bar == doctest::Approx(b2.beta_bar));
}
