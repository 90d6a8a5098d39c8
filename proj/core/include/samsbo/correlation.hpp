#pragma once

#include <Eigen/Dense>
#include <compare>
#include <cstddef>

namespace samsbo {

/// One-based task index. Task 1 is the main (primary) task.
class TaskIndex {
 public:
  constexpr explicit TaskIndex(int one_based) : value_(one_based) {}
  static constexpr TaskIndex main() { return TaskIndex{1}; }

  constexpr int value() const { return value_; }
  constexpr Eigen::Index zero_based() const { return value_ - 1; }
  constexpr bool is_main() const { return value_ == 1; }

  /// Throws std::invalid_argument unless 1 <= value <= num_tasks.
  void check(int num_tasks) const;

  constexpr auto operator<=>(const TaskIndex&) const = default;

 private:
  int value_;
};

/// Inter-task covariance Σ restricted to the cone of symmetric positive
/// definite matrices with nonnegative entries. Construction validates.
class CorrelationMatrix {
 public:
  /// Throws std::invalid_argument when `entries` is not square, not symmetric
  /// (1e-12, relative to the largest entry), not positive definite, or has a
  /// negative entry.
  explicit CorrelationMatrix(Eigen::MatrixXd entries);

  static CorrelationMatrix identity(int num_tasks);
  /// Two tasks, unit diagonal, off-diagonal r in [0, 1).
  static CorrelationMatrix two_task(double r);

  int size() const { return static_cast<int>(entries_.rows()); }
  const Eigen::MatrixXd& matrix() const { return entries_; }
  double operator()(Eigen::Index i, Eigen::Index j) const { return entries_(i, j); }

  /// Unit diagonal within 1e-12.
  bool is_normalized() const;
  /// Largest diagonal entry (q in the multi-task Lipschitz constant).
  double max_diagonal() const { return entries_.diagonal().maxCoeff(); }
  /// Off-diagonal (0,1) entry; convenience for the two-task case.
  double off_diagonal() const { return size() > 1 ? entries_(0, 1) : 0.0; }

  Eigen::MatrixXd inverse() const;
  double log_determinant() const;

  bool operator==(const CorrelationMatrix& other) const {
    return entries_ == other.entries_;
  }

 private:
  Eigen::MatrixXd entries_;
};

}  // namespace samsbo
