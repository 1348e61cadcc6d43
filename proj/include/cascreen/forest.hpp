#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

#include "cascreen/learner.hpp"
#include "cascreen/matrix.hpp"
#include "cascreen/parallel.hpp"
#include "cascreen/rng.hpp"
#include "cascreen/tree.hpp"

namespace cascreen {

struct ForestModel {
  std::vector<TreeModel> trees;
  std::vector<std::uint64_t> tree_seeds;
  MaxFeatureRule max_features = MaxFeatureRule::sqrt;
  std::size_t n_features = 0;

  /// Mean of the member trees' leaf fractions.
  double predict_proba(std::span<const double> x) const {
    double sum = 0.0;
    for (const auto& t : trees) sum += t.predict_proba(x);
    return sum / static_cast<double>(trees.size());
  }
};

inline std::size_t max_feature_count(MaxFeatureRule rule, std::size_t d, bool all_features) {
  if (all_features) return d;
  const double raw = rule == MaxFeatureRule::sqrt
                         ? std::sqrt(static_cast<double>(d))
                         : std::log2(static_cast<double>(d));
  const auto m = static_cast<std::size_t>(std::ceil(raw));
  return std::min(std::max<std::size_t>(m, 1), d);
}

namespace detail {

/// Distinct feature indices, sampled with the tree's generator and returned
/// in ascending order so the split tie rule stays well-defined.
inline std::vector<std::size_t> sample_features(Rng& rng, std::size_t d, std::size_t m) {
  std::vector<std::size_t> pool(d);
  for (std::size_t i = 0; i < d; ++i) pool[i] = i;
  for (std::size_t i = 0; i < m; ++i) {
    const std::size_t j = i + static_cast<std::size_t>(rng.uniform_u64(d - i));
    std::swap(pool[i], pool[j]);
  }
  pool.resize(m);
  std::sort(pool.begin(), pool.end());
  return pool;
}

}  // namespace detail

/// Bagged trees: tree t trains on a bootstrap of size n drawn with a
/// generator seeded by mix(seed, t), and the same generator subsamples the
/// candidate features at every node. Trees are stored in index order, so a
/// parallel build gives the same forest as a sequential one.
inline ForestModel train_forest(const Matrix& x, const std::vector<int>& y,
                                const LearnerSpec& spec, std::uint64_t seed, int jobs = 1) {
  validate_spec(spec);
  if (x.rows() == 0) throw TrainingError("cannot train a forest on an empty dataset");
  if (x.rows() < 2) throw TrainingError("forest needs at least 2 rows");
  if (x.rows() != y.size()) throw TrainingError("row/label count mismatch");
  const auto& params = spec.tree();
  const auto& controls = spec.controls;
  const std::size_t n = x.rows();
  const std::size_t d = x.cols();
  const std::size_t m = max_feature_count(params.max_features, d, controls.all_features);

  ForestModel forest;
  forest.max_features = params.max_features;
  forest.n_features = d;
  forest.tree_seeds.resize(controls.n_trees);
  for (int t = 0; t < controls.n_trees; ++t)
    forest.tree_seeds[t] = mix(seed, static_cast<std::uint64_t>(t));

  forest.trees = parallel_map<TreeModel>(
      static_cast<std::size_t>(controls.n_trees), jobs, [&](std::size_t t) {
        Rng rng(forest.tree_seeds[t]);
        Matrix xt;
        std::vector<int> yt;
        if (controls.bootstrap) {
          std::vector<std::size_t> sample(n);
          for (std::size_t i = 0; i < n; ++i)
            sample[i] = static_cast<std::size_t>(rng.uniform_u64(n));
          xt = x.take_rows(sample);
          yt.resize(n);
          for (std::size_t i = 0; i < n; ++i) yt[i] = y[sample[i]];
        } else {
          xt = x;
          yt = y;
        }
        return train_tree_sampled(xt, yt, params, [&]() {
          if (m == d) {
            std::vector<std::size_t> all(d);
            for (std::size_t i = 0; i < d; ++i) all[i] = i;
            return all;
          }
          return detail::sample_features(rng, d, m);
        });
      });
  return forest;
}

}  // namespace cascreen
