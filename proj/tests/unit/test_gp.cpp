#include <cmath>
#include <random>

#include "doctest.h"
#include "oracles.hpp"
#include "samsbo/errors.hpp"
#include "samsbo/gp.hpp"
#include "samsbo/two_task_likelihood.hpp"

using namespace samsbo;

namespace {

KernelParams params(int d, double sf2, double ls, double noise) {
  KernelParams p;
  p.signal_variance = sf2;
  p.lengthscales = Eigen::VectorXd::Constant(d, ls);
  p.noise_variance = noise;
  return p;
}

Eigen::VectorXd at(double x) { return Eigen::VectorXd::Constant(1, x); }

}  // namespace

TEST_CASE("empty dataset predicts the prior") {
  const MultiTaskDataset empty(1, 2);
  Eigen::MatrixXd s(2, 2);
  s << 2.0, 0.5, 0.5, 3.0;
  const Posterior post(empty, CorrelationMatrix(s), params(1, 1.5, 0.3, 1e-4));
  const Prediction p2 = post.predict(at(0.4), TaskIndex{2});
  CHECK(p2.mean == 0.0);
  CHECK(p2.variance == doctest::Approx(4.5));
  CHECK(post.mean_rkhs_norm() == 0.0);
}

TEST_CASE("one point closed form") {
  MultiTaskDataset d(1, 1);
  d.add(at(0.5), TaskIndex{1}, 2.0);
  const Posterior post(d, CorrelationMatrix::identity(1), params(1, 1.0, 1.0, 1.0));
  const Prediction p = post.predict(at(0.5), TaskIndex{1});
  CHECK(p.mean == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(p.variance == doctest::Approx(0.5).epsilon(1e-9));

  // Three query points against the 1×1 system by hand.
  Eigen::MatrixXd q(3, 1);
  q << 0.0, 0.5, 1.5;
  const Eigen::VectorXd m = posterior_mean_values(post, q, TaskIndex{1});
  for (Eigen::Index i = 0; i < 3; ++i) {
    const double k = std::exp(-0.5 * std::pow(q(i, 0) - 0.5, 2));
    CHECK(m(i) == doctest::Approx(k * 2.0 / 2.0).epsilon(1e-9));
  }
  CHECK(posterior_mean_values(post, Eigen::MatrixXd(0, 1), TaskIndex{1}).size() == 0);
  CHECK(posterior_mean_values(post, q.topRows(1), TaskIndex{1})(0) ==
        doctest::Approx(post.predict(at(0.0), TaskIndex{1}).mean));
}

TEST_CASE("rkhs norm of the posterior mean") {
  MultiTaskDataset d(1, 1);
  d.add(at(0.2), TaskIndex{1}, 1.0);
  const Posterior post(d, CorrelationMatrix::identity(1), params(1, 1.0, 1.0, 0.0));
  CHECK(posterior_mean_rkhs_norm(post) == doctest::Approx(1.0).epsilon(1e-8));

  std::mt19937_64 rng(2);
  const MultiTaskDataset r = oracle::random_dataset(rng, 6, 1, 2);
  const KernelParams p = params(1, 1.0, 0.3, 1e-2);
  const CorrelationMatrix s = CorrelationMatrix::two_task(0.4);
  const double n1 = Posterior(r, s, p).mean_rkhs_norm();
  const double n2 = Posterior(r.with_observations(-3.0 * r.observations()), s, p).mean_rkhs_norm();
  CHECK(n2 == doctest::Approx(3.0 * n1));
}

TEST_CASE("far queries revert to the prior") {
  MultiTaskDataset d(1, 2);
  d.add(at(0.0), TaskIndex{1}, 1.0);
  d.add(at(0.1), TaskIndex{2}, -1.0);
  const Posterior post(d, CorrelationMatrix::two_task(0.6), params(1, 2.0, 0.1, 1e-4));
  const Prediction p = post.predict(at(50.0), TaskIndex{1});
  CHECK(std::abs(p.mean) < 1e-6);
  CHECK(p.variance == doctest::Approx(2.0).epsilon(1e-6));
}

TEST_CASE("near noise-free interpolation") {
  MultiTaskDataset d(1, 1);
  d.add(at(0.1), TaskIndex{1}, 0.7);
  d.add(at(0.6), TaskIndex{1}, -0.4);
  const Posterior post(d, CorrelationMatrix::identity(1), params(1, 1.0, 0.3, 1e-10));
  CHECK(std::abs(post.predict(at(0.6), TaskIndex{1}).mean + 0.4) < 1e-4);
}

TEST_CASE("zero correlation decouples the tasks") {
  std::mt19937_64 rng(7);
  const MultiTaskDataset d = oracle::random_dataset(rng, 10, 1, 2);
  const KernelParams p = params(1, 1.0, 0.25, 1e-3);
  const Posterior joint(d, CorrelationMatrix::identity(2), p);
  const Posterior alone(d.restricted_to(TaskIndex{2}), CorrelationMatrix::identity(1), p);
  for (double x : {0.0, 0.33, 0.71, 1.0}) {
    const Prediction a = joint.predict(at(x), TaskIndex{2});
    const Prediction b = alone.predict(at(x), TaskIndex{1});
    CHECK(a.mean == doctest::Approx(b.mean).epsilon(1e-10));
    CHECK(a.variance == doctest::Approx(b.variance).epsilon(1e-10));
  }
}

TEST_CASE("posterior matches the dense-inverse oracle") {
  std::mt19937_64 rng(19);
  std::uniform_int_distribution<int> size(1, 8);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int trial = 0; trial < 200; ++trial) {
    const int u = 1 + trial % 3;
    const MultiTaskDataset d = oracle::random_dataset(rng, size(rng), 2, u);
    const Eigen::MatrixXd s = oracle::random_covariance(rng, u);
    const KernelParams p = params(2, 0.5 + unit(rng), 0.2 + 0.3 * unit(rng), 1e-3);
    const Posterior post(d, CorrelationMatrix(s), p);
    for (int q = 0; q < 5; ++q) {
      const Eigen::Vector2d x(unit(rng), unit(rng));
      const int z = 1 + q % u;
      const Prediction got = post.predict(x, TaskIndex{z});
      const oracle::DensePrediction want = oracle::dense_predict(d, s, p, x, z, post.jitter());
      REQUIRE(std::abs(got.mean - want.mean) < 1e-8);
      REQUIRE(std::abs(got.variance - want.variance) < 1e-8);
    }
  }
}

TEST_CASE("batch prediction agrees with pointwise prediction") {
  std::mt19937_64 rng(23);
  const MultiTaskDataset d = oracle::random_dataset(rng, 12, 2, 2);
  const Posterior post(d, CorrelationMatrix::two_task(0.7), params(2, 1.0, 0.3, 1e-4));
  const Eigen::MatrixXd q = Eigen::MatrixXd::Random(7, 2).cwiseAbs();
  const BatchPrediction b = post.predict_batch(q, TaskIndex{1});
  for (Eigen::Index i = 0; i < q.rows(); ++i) {
    const Prediction p = post.predict(q.row(i).transpose(), TaskIndex{1});
    CHECK(b.mean(i) == doctest::Approx(p.mean).epsilon(1e-12));
    CHECK(b.variance(i) == doctest::Approx(p.variance).epsilon(1e-12));
  }
}

TEST_CASE("cholesky factor reconstructs the system") {
  std::mt19937_64 rng(29);
  const MultiTaskDataset d = oracle::random_dataset(rng, 15, 1, 2);
  const KernelParams p = params(1, 2.0, 0.2, 1e-2);
  const Posterior post(d, CorrelationMatrix::two_task(0.5), p);
  const Eigen::MatrixXd sys =
      post.gram() + (p.noise_variance + post.jitter()) * Eigen::MatrixXd::Identity(15, 15);
  const Eigen::MatrixXd rec = post.chol() * post.chol().transpose();
  CHECK((rec - sys).norm() <= 1e-8 * sys.norm());
}

TEST_CASE("smoother identity at the training inputs") {
  std::mt19937_64 rng(31);
  const MultiTaskDataset d = oracle::random_dataset(rng, 9, 1, 2);
  const KernelParams p = params(1, 1.0, 0.3, 0.05);
  const CorrelationMatrix s = CorrelationMatrix::two_task(0.8);
  const Posterior post(d, s, p);
  const Eigen::MatrixXd k = gram(d, s, p);
  const Eigen::VectorXd want =
      k * (k + p.noise_variance * Eigen::MatrixXd::Identity(9, 9)).ldlt().solve(d.observations());
  for (Eigen::Index i = 0; i < d.size(); ++i) {
    CHECK(post.predict(d.input(i), d.task(i)).mean == doctest::Approx(want(i)).epsilon(1e-9));
  }
}

TEST_CASE("adding data never increases the variance") {
  std::mt19937_64 rng(37);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const KernelParams p = params(2, 1.0, 0.3, 1e-3);
  const CorrelationMatrix s = CorrelationMatrix::two_task(0.6);
  MultiTaskDataset d = oracle::random_dataset(rng, 6, 2, 2);
  const Posterior before(d, s, p);
  d.add(Eigen::Vector2d(unit(rng), unit(rng)), TaskIndex{2}, 0.3);
  const Posterior after(d, s, p);
  for (int q = 0; q < 100; ++q) {
    const Eigen::Vector2d x(unit(rng), unit(rng));
    for (int z = 1; z <= 2; ++z) {
      REQUIRE(after.predict(x, TaskIndex{z}).variance <=
              before.predict(x, TaskIndex{z}).variance + 1e-12);
    }
  }
}

TEST_CASE("log marginal likelihood") {
  MultiTaskDataset d(1, 1);
  d.add(at(0.0), TaskIndex{1}, 0.0);
  CHECK(log_marginal_likelihood(d, CorrelationMatrix::identity(1), params(1, 0.5, 1.0, 0.5)) ==
        doctest::Approx(-0.5 * std::log(2.0 * M_PI)).epsilon(1e-9));

  std::mt19937_64 rng(41);
  const MultiTaskDataset r = oracle::random_dataset(rng, 10, 1, 2);
  const KernelParams p = params(1, 1.0, 0.3, 1e-2);
  const double joint = log_marginal_likelihood(r, CorrelationMatrix::identity(2), p);
  const double split =
      log_marginal_likelihood(r.restricted_to(TaskIndex{1}), CorrelationMatrix::identity(1), p) +
      log_marginal_likelihood(r.restricted_to(TaskIndex{2}), CorrelationMatrix::identity(1), p);
  CHECK(joint == doctest::Approx(split).epsilon(1e-10));

  const CorrelationMatrix s = CorrelationMatrix::two_task(0.7);
  const std::vector<Eigen::Index> order{3, 1, 9, 0, 2, 8, 4, 7, 6, 5};
  CHECK(log_marginal_likelihood(r.permuted(order), s, p) ==
        doctest::Approx(log_marginal_likelihood(r, s, p)).epsilon(1e-10));
}

TEST_CASE("two-task fast likelihood matches the dense computation") {
  std::mt19937_64 rng(43);
  for (int trial = 0; trial < 20; ++trial) {
    const MultiTaskDataset d = oracle::random_dataset(rng, 4 + trial, 1, 2);
    const KernelParams p = params(1, 1.0 + 0.1 * trial, 0.25, 1e-3);
    const TwoTaskLikelihood fast(d, p);
    for (double r : {0.0, 0.3, 0.9, 0.999}) {
      const CorrelationMatrix s = CorrelationMatrix::two_task(r);
      REQUIRE(fast.log_likelihood(r) ==
              doctest::Approx(log_marginal_likelihood(d, s, p)).epsilon(1e-8));
      const Eigen::VectorXd want = oracle::dense_alpha(d, s.matrix(), p);
      REQUIRE((fast.alpha(r) - want).cwiseAbs().maxCoeff() < 1e-6 * (1.0 + want.cwiseAbs().maxCoeff()));
    }
  }
}

TEST_CASE("jitter policy") {
  Eigen::MatrixXd singular = Eigen::MatrixXd::Ones(3, 3);
  double jitter = -1.0;
  const Eigen::MatrixXd l = factorize_with_jitter(singular, 1.0, &jitter);
  CHECK(jitter >= 1e-10);
  CHECK(jitter <= 1e-6);
  CHECK((l * l.transpose() - singular).cwiseAbs().maxCoeff() <= 1e-6 + 1e-12);

  Eigen::MatrixXd negative = -Eigen::MatrixXd::Identity(2, 2);
  CHECK_THROWS_AS(factorize_with_jitter(negative, 1.0, &jitter), NumericalError);
}
