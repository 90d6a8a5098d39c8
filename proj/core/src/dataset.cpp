#include "samsbo/dataset.hpp"

#include <stdexcept>

namespace samsbo {

MultiTaskDataset::MultiTaskDataset(int dimension, int num_tasks)
    : dimension_(dimension),
      num_tasks_(num_tasks),
      inputs_(0, dimension),
      observations_(0) {
  if (dimension < 1) throw std::invalid_argument("dimension must be >= 1");
  if (num_tasks < 1) throw std::invalid_argument("num_tasks must be >= 1");
}

void MultiTaskDataset::add(const Eigen::Ref<const Eigen::VectorXd>& x, TaskIndex task,
                           double y) {
  if (x.size() != dimension_) {
    throw std::invalid_argument("input dimension does not match dataset");
  }
  task.check(num_tasks_);
  const Eigen::Index n = size();
  inputs_.conservativeResize(n + 1, Eigen::NoChange);
  inputs_.row(n) = x.transpose();
  observations_.conservativeResize(n + 1);
  observations_(n) = y;
  tasks_.push_back(task);
}

Eigen::Index MultiTaskDataset::count(TaskIndex z) const {
  Eigen::Index c = 0;
  for (const auto& t : tasks_) c += (t == z) ? 1 : 0;
  return c;
}

MultiTaskDataset MultiTaskDataset::with_observations(Eigen::VectorXd y) const {
  if (y.size() != size()) throw std::invalid_argument("observation count mismatch");
  MultiTaskDataset out = *this;
  out.observations_ = std::move(y);
  return out;
}

MultiTaskDataset MultiTaskDataset::permuted(const std::vector<Eigen::Index>& order) const {
  if (static_cast<Eigen::Index>(order.size()) != size()) {
    throw std::invalid_argument("permutation length mismatch");
  }
  MultiTaskDataset out(dimension_, num_tasks_);
  for (Eigen::Index i : order) out.add(input(i), task(i), observations_(i));
  return out;
}

MultiTaskDataset MultiTaskDataset::restricted_to(TaskIndex z) const {
  MultiTaskDataset out(dimension_, 1);
  for (Eigen::Index i = 0; i < size(); ++i) {
    if (task(i) == z) out.add(input(i), TaskIndex::main(), observations_(i));
  }
  return out;
}

}  // namespace samsbo
