#include "samsbo/two_task_likelihood.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "samsbo/gp.hpp"

namespace samsbo {

namespace {

double half_logdet(const Eigen::MatrixXd& lower) {
  return lower.diagonal().array().log().sum();
}

}  // namespace

TwoTaskLikelihood::TwoTaskLikelihood(const MultiTaskDataset& data,
                                     const KernelParams& params) {
  if (data.num_tasks() != 2) {
    throw std::invalid_argument("two-task likelihood needs exactly two tasks");
  }
  params.validate();
  const TaskIndex t1{1};
  const TaskIndex t2{2};
  for (Eigen::Index i = 0; i < data.size(); ++i) {
    if (data.task(i) == t1) order_.push_back(i);
  }
  n1_ = static_cast<Eigen::Index>(order_.size());
  for (Eigen::Index i = 0; i < data.size(); ++i) {
    if (data.task(i) == t2) order_.push_back(i);
  }
  n2_ = static_cast<Eigen::Index>(order_.size()) - n1_;
  const Eigen::Index n = n1_ + n2_;

  Eigen::MatrixXd x1(n1_, data.dimension());
  Eigen::MatrixXd x2(n2_, data.dimension());
  Eigen::VectorXd y1(n1_);
  Eigen::VectorXd y2(n2_);
  for (Eigen::Index i = 0; i < n1_; ++i) {
    x1.row(i) = data.inputs().row(order_[i]);
    y1(i) = data.observations()(order_[i]);
  }
  for (Eigen::Index i = 0; i < n2_; ++i) {
    x2.row(i) = data.inputs().row(order_[n1_ + i]);
    y2(i) = data.observations()(order_[n1_ + i]);
  }

  const double log2pi = std::log(2.0 * std::numbers::pi);
  constant_ = -0.5 * static_cast<double>(n) * log2pi;
  theta_.resize(0);
  a_.resize(0);
  b_.resize(0);

  Eigen::MatrixXd la;
  if (n1_ > 0) {
    Eigen::MatrixXd a = se_kernel_matrix(x1, x1, params);
    a.diagonal().array() += params.noise_variance;
    la = factorize_with_jitter(a, params.signal_variance, nullptr);
    const auto l = la.triangularView<Eigen::Lower>();
    ainv_y1_ = la.transpose().triangularView<Eigen::Upper>().solve(l.solve(y1));
    constant_ += -half_logdet(la) - 0.5 * y1.dot(ainv_y1_);
  } else {
    ainv_y1_.resize(0);
  }
  if (n2_ == 0) return;

  Eigen::MatrixXd bmat = se_kernel_matrix(x2, x2, params);
  bmat.diagonal().array() += params.noise_variance;
  const Eigen::MatrixXd lb = factorize_with_jitter(bmat, params.signal_variance, nullptr);
  constant_ += -half_logdet(lb);
  const auto lbv = lb.triangularView<Eigen::Lower>();

  Eigen::MatrixXd w;
  Eigen::VectorXd lb_y2 = lbv.solve(y2);
  Eigen::VectorXd lb_ctay1;
  if (n1_ > 0) {
    const Eigen::MatrixXd c = se_kernel_matrix(x1, x2, params);
    const auto l = la.triangularView<Eigen::Lower>();
    ainv_c_ = la.transpose().triangularView<Eigen::Upper>().solve(l.solve(c));
    // L_B⁻¹ Cᵀ L_A⁻ᵀ; W is its Gram.
    Eigen::MatrixXd half = l.solve(c);  // L_A⁻¹ C
    Eigen::MatrixXd g = lbv.solve(half.transpose());
    w = g * g.transpose();
    lb_ctay1 = lbv.solve(c.transpose() * ainv_y1_);
  } else {
    ainv_c_.resize(0, n2_);
    w = Eigen::MatrixXd::Zero(n2_, n2_);
    lb_ctay1 = Eigen::VectorXd::Zero(n2_);
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(0.5 * (w + w.transpose()));
  theta_ = eig.eigenvalues().cwiseMax(0.0);
  const Eigen::MatrixXd& q = eig.eigenvectors();
  a_ = q.transpose() * lb_y2;
  b_ = q.transpose() * lb_ctay1;
  back_ = lb.transpose().triangularView<Eigen::Upper>().solve(q);
}

double TwoTaskLikelihood::log_likelihood(double r) const {
  const double r2 = r * r;
  double value = constant_;
  for (Eigen::Index k = 0; k < theta_.size(); ++k) {
    const double s = 1.0 - r2 * theta_(k);
    const double v = a_(k) - r * b_(k);
    value -= 0.5 * (std::log(s) + v * v / s);
  }
  return value;
}

Eigen::VectorXd TwoTaskLikelihood::alpha(double r) const {
  const double r2 = r * r;
  Eigen::VectorXd grouped(n1_ + n2_);
  Eigen::VectorXd q2 = Eigen::VectorXd::Zero(n2_);
  if (n2_ > 0) {
    Eigen::VectorXd scaled(n2_);
    for (Eigen::Index k = 0; k < n2_; ++k) {
      scaled(k) = (a_(k) - r * b_(k)) / (1.0 - r2 * theta_(k));
    }
    q2 = back_ * scaled;
    grouped.tail(n2_) = q2;
  }
  if (n1_ > 0) {
    grouped.head(n1_) = ainv_y1_;
    if (n2_ > 0) grouped.head(n1_) -= r * (ainv_c_ * q2);
  }
  Eigen::VectorXd out(n1_ + n2_);
  for (Eigen::Index i = 0; i < n1_ + n2_; ++i) out(order_[i]) = grouped(i);
  return out;
}

}  // namespace samsbo
