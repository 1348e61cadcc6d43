#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "cascreen/error.hpp"
#include "cascreen/learner.hpp"
#include "cascreen/matrix.hpp"

namespace cascreen {

/// Node impurity from integer class counts. gini = 2p(1-p),
/// entropy = -p log2 p - (1-p) log2 (1-p) with 0 log 0 taken as 0.
inline double impurity(Criterion criterion, std::int64_t class1_count, std::int64_t total) {
  const double p = double(class1_count) / double(total);
  if (criterion == Criterion::gini) return 2.0 * p * (1.0 - p);
  const double q = 1.0 - p;
  double h = 0.0;
  if (p > 0.0) h -= p * std::log2(p);
  if (q > 0.0) h -= q * std::log2(q);
  return h;
}

struct SplitCandidate {
  std::size_t feature = 0;
  double threshold = 0.0;
  double decrease = 0.0;  // weighted impurity decrease
};

/// Best admissible split over the given rows. Thresholds sit at midpoints
/// between consecutive distinct sorted values; the winner maximizes the
/// weighted impurity decrease with both children at least min_leaf rows.
/// Ties keep the lower feature index, then the lower threshold. Returns
/// nothing for a pure node or when no admissible split exists.
inline std::optional<SplitCandidate> best_split_rows(const Matrix& x,
                                                     const std::vector<int>& y,
                                                     const std::vector<std::size_t>& rows,
                                                     const std::vector<std::size_t>& features,
                                                     Criterion criterion, int min_leaf) {
  const std::int64_t n = static_cast<std::int64_t>(rows.size());
  if (n < 2) return std::nullopt;
  std::int64_t c1 = 0;
  for (std::size_t r : rows) c1 += y[r];
  if (c1 == 0 || c1 == n) return std::nullopt;
  const double parent = impurity(criterion, c1, n);

  std::optional<SplitCandidate> best;
  std::vector<std::pair<double, int>> vals(rows.size());
  for (std::size_t f : features) {
    for (std::size_t i = 0; i < rows.size(); ++i)
      vals[i] = {x(rows[i], f), y[rows[i]]};
    std::sort(vals.begin(), vals.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
    std::int64_t left_n = 0, left_c1 = 0;
    for (std::size_t i = 0; i + 1 < vals.size(); ++i) {
      left_n += 1;
      left_c1 += vals[i].second;
      if (vals[i].first == vals[i + 1].first) continue;
      const std::int64_t right_n = n - left_n;
      if (left_n < min_leaf || right_n < min_leaf) continue;
      const double threshold = (vals[i].first + vals[i + 1].first) / 2.0;
      const double left_imp = impurity(criterion, left_c1, left_n);
      const double right_imp = impurity(criterion, c1 - left_c1, right_n);
      const double decrease = parent - (double(left_n) / double(n)) * left_imp -
                              (double(right_n) / double(n)) * right_imp;
      if (!best.has_value() || decrease > best->decrease)
        best = SplitCandidate{f, threshold, decrease};
    }
  }
  return best;
}

inline std::optional<SplitCandidate> best_split(const Matrix& x, const std::vector<int>& y,
                                                const std::vector<std::size_t>& features,
                                                Criterion criterion, int min_leaf) {
  std::vector<std::size_t> rows(x.rows());
  for (std::size_t i = 0; i < rows.size(); ++i) rows[i] = i;
  return best_split_rows(x, y, rows, features, criterion, min_leaf);
}

// ---------------------------------------------------------------------------
// Tree model
// ---------------------------------------------------------------------------

struct TreeNode {
  bool is_leaf = true;
  std::size_t feature = 0;   // internal nodes
  double threshold = 0.0;
  int left = -1;
  int right = -1;
  int label = 0;             // leaves: majority class, ties to 0
  double fraction = 0.0;     // leaves: class-1 fraction of routed rows
  std::int64_t count = 0;    // leaves: routed training rows
};

struct TreeModel {
  std::vector<TreeNode> nodes;  // node 0 is the root
  std::size_t n_features = 0;

  int route(std::span<const double> x) const {
    if (x.size() != n_features) throw DataError("input has wrong dimension for tree");
    int at = 0;
    while (!nodes[at].is_leaf)
      at = x[nodes[at].feature] <= nodes[at].threshold ? nodes[at].left : nodes[at].right;
    return at;
  }
  double predict_proba(std::span<const double> x) const { return nodes[route(x)].fraction; }
  int depth() const { return depth_from(0); }

private:
  int depth_from(int at) const {
    if (nodes[at].is_leaf) return 0;
    return 1 + std::max(depth_from(nodes[at].left), depth_from(nodes[at].right));
  }
};

/// Hook for a forest to subsample candidate features per node; a standalone
/// tree considers every feature at every node.
using FeatureSampler = std::function<std::vector<std::size_t>()>;

namespace detail {

inline int grow_tree(TreeModel& tree, const Matrix& x, const std::vector<int>& y,
                     std::vector<std::size_t>&& rows, int depth, const TreeParams& p,
                     const FeatureSampler& sample_features) {
  const std::int64_t n = static_cast<std::int64_t>(rows.size());
  std::int64_t c1 = 0;
  for (std::size_t r : rows) c1 += y[r];

  const auto make_leaf = [&]() {
    TreeNode leaf;
    leaf.is_leaf = true;
    leaf.label = c1 * 2 > n ? 1 : 0;
    leaf.fraction = double(c1) / double(n);
    leaf.count = n;
    tree.nodes.push_back(leaf);
    return int(tree.nodes.size()) - 1;
  };

  if (c1 == 0 || c1 == n) return make_leaf();
  if (depth >= p.max_depth) return make_leaf();
  if (n < p.min_split) return make_leaf();

  const auto split = best_split_rows(x, y, rows, sample_features(), p.criterion, p.min_leaf);
  if (!split.has_value()) return make_leaf();

  std::vector<std::size_t> left_rows, right_rows;
  for (std::size_t r : rows)
    (x(r, split->feature) <= split->threshold ? left_rows : right_rows).push_back(r);
  rows.clear();
  rows.shrink_to_fit();

  TreeNode node;
  node.is_leaf = false;
  node.feature = split->feature;
  node.threshold = split->threshold;
  tree.nodes.push_back(node);
  const int at = int(tree.nodes.size()) - 1;
  tree.nodes[at].left = grow_tree(tree, x, y, std::move(left_rows), depth + 1, p, sample_features);
  tree.nodes[at].right = grow_tree(tree, x, y, std::move(right_rows), depth + 1, p, sample_features);
  return at;
}

}  // namespace detail

/// CART growth by recursive best splits. Stops at purity, the depth cap,
/// nodes smaller than min_split, or when no admissible split remains.
inline TreeModel train_tree_sampled(const Matrix& x, const std::vector<int>& y,
                                    const TreeParams& params,
                                    const FeatureSampler& sample_features) {
  if (x.rows() == 0) throw TrainingError("cannot train a tree on an empty dataset");
  if (x.rows() != y.size()) throw TrainingError("row/label count mismatch");
  TreeModel tree;
  tree.n_features = x.cols();
  std::vector<std::size_t> rows(x.rows());
  for (std::size_t i = 0; i < rows.size(); ++i) rows[i] = i;
  detail::grow_tree(tree, x, y, std::move(rows), 0, params, sample_features);  // root lands at 0
  return tree;
}

inline TreeModel train_tree(const Matrix& x, const std::vector<int>& y,
                            const LearnerSpec& spec) {
  validate_spec(spec);
  std::vector<std::size_t> all(x.cols());
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
  return train_tree_sampled(x, y, spec.tree(), [&all]() { return all; });
}

}  // namespace cascreen
