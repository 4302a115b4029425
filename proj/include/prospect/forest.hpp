#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "prospect/types.hpp"

namespace prospect {

struct ForestParams {
  int num_trees = 100;
  int min_leaf = 20;
  int mtry = 0;  // 0 -> ceil(sqrt(p))
  std::uint64_t seed = 0;
  int threads = 1;
};

// Randomized regression forest: bootstrap per tree, exhaustive MSE splits
// over a random feature subset, leaf means. Rows are keyed by caller ids, so
// fits are invariant to row permutation and trees can be grown in parallel
// without changing the result.
class RegressionForest {
 public:
  // ids must parallel the rows of X/y.
  void fit(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, const std::vector<int>& ids,
           const ForestParams& params);

  Eigen::VectorXd predict(const Eigen::MatrixXd& X) const;

  bool fitted() const { return !trees_.empty(); }

 private:
  struct Node {
    int feature = -1;  // -1 marks a leaf
    double threshold = 0.0;
    double value = 0.0;
    int left = -1;
    int right = -1;
  };
  struct Tree {
    std::vector<Node> nodes;
  };

  std::vector<Tree> trees_;
  long num_features_ = 0;

  friend struct TreeBuilder;
};

}  // namespace prospect
