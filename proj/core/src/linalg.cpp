#include "samsbo/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "samsbo/errors.hpp"

namespace samsbo::linalg {

Eigen::MatrixXd sym_sqrt(const Eigen::MatrixXd& a) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(a);
  Eigen::VectorXd root = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return es.eigenvectors() * root.asDiagonal() * es.eigenvectors().transpose();
}

double spectral_norm(const Eigen::MatrixXd& a) {
  if (a.size() == 0) return 0.0;
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(a);
  return svd.singularValues()(0);
}

double min_eigenvalue(const Eigen::MatrixXd& symmetric) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(symmetric,
                                                   Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

double max_eigenvalue(const Eigen::MatrixXd& symmetric) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(symmetric,
                                                   Eigen::EigenvaluesOnly);
  return es.eigenvalues().maxCoeff();
}

JitteredCholesky cholesky_with_jitter(const Eigen::MatrixXd& a, double initial,
                                      double maximum) {
  JitteredCholesky out;
  out.llt.compute(a);
  if (out.llt.info() == Eigen::Success) return out;

  const Eigen::Index n = a.rows();
  for (double jitter = initial; jitter <= maximum * (1.0 + 1e-12);
       jitter *= 10.0) {
    Eigen::MatrixXd shifted = a;
    shifted.diagonal().array() += jitter;
    out.llt.compute(shifted);
    if (out.llt.info() == Eigen::Success) {
      out.jitter = jitter;
      return out;
    }
  }
  std::ostringstream msg;
  msg << "Cholesky failed on a " << n << "x" << n
      << " system after jitter up to " << maximum;
  if (n > 0) {
    msg << " (diagonal range [" << a.diagonal().minCoeff() << ", "
        << a.diagonal().maxCoeff() << "])";
  }
  throw NumericalError(msg.str());
}

double quantile(Eigen::VectorXd values, double q) {
  if (values.size() == 0) throw std::invalid_argument("quantile of empty set");
  if (!(q >= 0.0 && q <= 1.0)) throw std::invalid_argument("q must lie in [0,1]");
  std::sort(values.data(), values.data() + values.size());
  const double h = q * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<Eigen::Index>(std::floor(h));
  const auto hi = std::min<Eigen::Index>(lo + 1, values.size() - 1);
  return values(lo) + (h - static_cast<double>(lo)) * (values(hi) - values(lo));
}

}  // namespace samsbo::linalg
