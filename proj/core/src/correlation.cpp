#include "samsbo/correlation.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace samsbo {

void TaskIndex::check(int num_tasks) const {
  if (value_ < 1 || value_ > num_tasks) {
    std::ostringstream msg;
    msg << "task index " << value_ << " outside [1, " << num_tasks << "]";
    throw std::invalid_argument(msg.str());
  }
}

CorrelationMatrix::CorrelationMatrix(Eigen::MatrixXd entries)
    : entries_(std::move(entries)) {
  if (entries_.rows() == 0 || entries_.rows() != entries_.cols()) {
    throw std::invalid_argument("correlation matrix must be square and nonempty");
  }
  if (!entries_.allFinite()) {
    throw std::invalid_argument("correlation matrix has non-finite entries");
  }
  const double scale = std::max(1.0, entries_.cwiseAbs().maxCoeff());
  if ((entries_ - entries_.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale) {
    throw std::invalid_argument("correlation matrix is not symmetric");
  }
  if (entries_.minCoeff() < 0.0) {
    throw std::invalid_argument("correlation matrix has a negative entry");
  }
  // Exact symmetry from here on.
  entries_ = 0.5 * (entries_ + entries_.transpose()).eval();
  Eigen::LLT<Eigen::MatrixXd> llt(entries_);
  if (llt.info() != Eigen::Success) {
    throw std::invalid_argument("correlation matrix is not positive definite");
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(entries_,
                                                   Eigen::EigenvaluesOnly);
  if (!(es.eigenvalues().minCoeff() > 0.0)) {
    throw std::invalid_argument("correlation matrix is not positive definite");
  }
}

CorrelationMatrix CorrelationMatrix::identity(int num_tasks) {
  return CorrelationMatrix(Eigen::MatrixXd::Identity(num_tasks, num_tasks));
}

CorrelationMatrix CorrelationMatrix::two_task(double r) {
  Eigen::Matrix2d m;
  m << 1.0, r, r, 1.0;
  return CorrelationMatrix(Eigen::MatrixXd(m));
}

bool CorrelationMatrix::is_normalized() const {
  return (entries_.diagonal().array() - 1.0).abs().maxCoeff() <= 1e-12;
}

Eigen::MatrixXd CorrelationMatrix::inverse() const {
  return entries_.llt().solve(
      Eigen::MatrixXd::Identity(entries_.rows(), entries_.cols()));
}

double CorrelationMatrix::log_determinant() const {
  Eigen::LLT<Eigen::MatrixXd> llt(entries_);
  return 2.0 * llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
}

}  // namespace samsbo
