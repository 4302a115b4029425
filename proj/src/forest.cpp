#include "prospect/forest.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "prospect/parallel.hpp"
#include "prospect/rng.hpp"

namespace prospect {

namespace {

struct SplitChoice {
  int feature = -1;
  double threshold = 0.0;
  double score = -1.0;  // SSE reduction
};

}  // namespace

struct TreeBuilder {
  const Eigen::MatrixXd& X;  // rows sorted by id
  const Eigen::VectorXd& y;
  const ForestParams& params;
  int mtry;
  RegressionForest::Tree tree;
  std::vector<int> sample;  // bootstrap row indices
  std::vector<std::pair<double, double>> scratch;  // (feature value, target)

  int build(std::vector<int>& rows, Rng& rng) {
    const int m = static_cast<int>(rows.size());
    double sum = 0.0, sum_sq = 0.0;
    for (int r : rows) {
      sum += y(r);
      sum_sq += y(r) * y(r);
    }
    const double mean = sum / m;
    const double sse = sum_sq - sum * sum / m;

    RegressionForest::Node node;
    node.value = mean;
    if (m < 2 * params.min_leaf || sse <= 1e-12) {
      tree.nodes.push_back(node);
      return static_cast<int>(tree.nodes.size()) - 1;
    }

    // Random feature subset, drawn without replacement.
    const int p = static_cast<int>(X.cols());
    std::vector<int> features(p);
    std::iota(features.begin(), features.end(), 0);
    for (int k = 0; k < mtry; ++k) {
      const int j = k + static_cast<int>(rng.uniform_below(p - k));
      std::swap(features[k], features[j]);
    }
    features.resize(mtry);
    std::sort(features.begin(), features.end());  // tie-break by feature index

    SplitChoice best;
    for (int f : features) {
      scratch.clear();
      for (int r : rows) scratch.emplace_back(X(r, f), y(r));
      std::sort(scratch.begin(), scratch.end(),
                [](const auto& a, const auto& b) { return a.first < b.first; });
      // Prefix scan; candidate cuts only between distinct values.
      double left_sum = 0.0, left_sq = 0.0;
      for (int k = 0; k < m - 1; ++k) {
        left_sum += scratch[k].second;
        left_sq += scratch[k].second * scratch[k].second;
        if (scratch[k].first == scratch[k + 1].first) continue;
        const int nl = k + 1;
        const int nr = m - nl;
        if (nl < params.min_leaf || nr < params.min_leaf) continue;
        const double right_sum = sum - left_sum;
        const double right_sq = sum_sq - left_sq;
        const double child_sse = (left_sq - left_sum * left_sum / nl) +
                                 (right_sq - right_sum * right_sum / nr);
        const double gain = sse - child_sse;
        if (gain > best.score + 1e-12) {
          best.score = gain;
          best.feature = f;
          best.threshold = 0.5 * (scratch[k].first + scratch[k + 1].first);
        }
      }
    }

    if (best.feature < 0) {
      tree.nodes.push_back(node);
      return static_cast<int>(tree.nodes.size()) - 1;
    }

    std::vector<int> left_rows, right_rows;
    left_rows.reserve(m);
    right_rows.reserve(m);
    for (int r : rows) (X(r, best.feature) <= best.threshold ? left_rows : right_rows).push_back(r);
    rows.clear();
    rows.shrink_to_fit();

    node.feature = best.feature;
    node.threshold = best.threshold;
    tree.nodes.push_back(node);
    const int index = static_cast<int>(tree.nodes.size()) - 1;
    const int left = build(left_rows, rng);
    const int right = build(right_rows, rng);
    tree.nodes[index].left = left;
    tree.nodes[index].right = right;
    return index;
  }
};

void RegressionForest::fit(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                           const std::vector<int>& ids, const ForestParams& params) {
  const int n = static_cast<int>(X.rows());
  if (n == 0) throw EstimationError("forest fit: empty training set");
  if (static_cast<int>(ids.size()) != n) throw EstimationError("forest fit: ids/rows mismatch");
  bool any_variance = false;
  for (long j = 0; j < X.cols() && !any_variance; ++j) {
    for (long i = 1; i < n; ++i)
      if (X(i, j) != X(0, j)) {
        any_variance = true;
        break;
      }
  }
  if (!any_variance) throw EstimationError("forest fit: all feature columns are constant");

  // Canonical row order by id; bootstrap indexes into this order, making the
  // fit independent of the caller's row arrangement.
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int a, int b) { return ids[a] < ids[b]; });
  Eigen::MatrixXd Xs(n, X.cols());
  Eigen::VectorXd ys(n);
  for (int i = 0; i < n; ++i) {
    Xs.row(i) = X.row(order[i]);
    ys(i) = y(order[i]);
  }

  num_features_ = X.cols();
  const int mtry = params.mtry > 0
                       ? params.mtry
                       : static_cast<int>(std::ceil(std::sqrt(static_cast<double>(X.cols()))));
  trees_.assign(params.num_trees, Tree{});
  const Rng master(params.seed);
  parallel_for(0, params.num_trees, params.threads, [&](int t) {
    Rng rng = master.substream(0x666f7265ULL, static_cast<std::uint64_t>(t));
    TreeBuilder builder{Xs, ys, params, mtry, {}, {}, {}};
    std::vector<int> rows(n);
    for (int i = 0; i < n; ++i) rows[i] = static_cast<int>(rng.uniform_below(n));
    std::sort(rows.begin(), rows.end());  // stable node statistics
    builder.build(rows, rng);
    trees_[t] = std::move(builder.tree);
  });
}

Eigen::VectorXd RegressionForest::predict(const Eigen::MatrixXd& X) const {
  if (trees_.empty()) throw EstimationError("forest predict: not fitted");
  if (X.cols() != num_features_) throw EstimationError("forest predict: feature dimension mismatch");
  Eigen::VectorXd out = Eigen::VectorXd::Zero(X.rows());
  for (const Tree& tree : trees_) {
    for (long i = 0; i < X.rows(); ++i) {
      int node = 0;
      while (tree.nodes[node].feature >= 0) {
        node = X(i, tree.nodes[node].feature) <= tree.nodes[node].threshold
                   ? tree.nodes[node].left
                   : tree.nodes[node].right;
      }
      out(i) += tree.nodes[node].value;
    }
  }
  return out / static_cast<double>(trees_.size());
}

}  // namespace prospect
