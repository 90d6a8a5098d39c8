#pragma once

#include <Eigen/Dense>
#include <vector>

#include "samsbo/correlation.hpp"

namespace samsbo {

/// Stacked multi-task observations: row i is input x_i observed on task z_i
/// with value y_i. The task count is fixed at construction so that an empty
/// dataset still knows its shape.
class MultiTaskDataset {
 public:
  MultiTaskDataset(int dimension, int num_tasks);

  void add(const Eigen::Ref<const Eigen::VectorXd>& x, TaskIndex task, double y);

  int dimension() const { return dimension_; }
  int num_tasks() const { return num_tasks_; }
  Eigen::Index size() const { return static_cast<Eigen::Index>(tasks_.size()); }
  bool empty() const { return tasks_.empty(); }

  /// n x d matrix of inputs, row-major by observation.
  const Eigen::MatrixXd& inputs() const { return inputs_; }
  const std::vector<TaskIndex>& tasks() const { return tasks_; }
  const Eigen::VectorXd& observations() const { return observations_; }

  Eigen::VectorXd input(Eigen::Index i) const { return inputs_.row(i).transpose(); }
  TaskIndex task(Eigen::Index i) const { return tasks_[static_cast<std::size_t>(i)]; }

  /// Number of observations on task `z`.
  Eigen::Index count(TaskIndex z) const;

  /// Copy with observations replaced (inputs and tasks unchanged).
  MultiTaskDataset with_observations(Eigen::VectorXd y) const;
  /// Copy with rows reordered by `order`.
  MultiTaskDataset permuted(const std::vector<Eigen::Index>& order) const;
  /// Rows observed on task `z` only, as a single-task dataset (u = 1).
  MultiTaskDataset restricted_to(TaskIndex z) const;

 private:
  int dimension_;
  int num_tasks_;
  Eigen::MatrixXd inputs_;
  std::vector<TaskIndex> tasks_;
  Eigen::VectorXd observations_;
};

}  // namespace samsbo
