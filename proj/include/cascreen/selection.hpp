#pragma once

#include <algorithm>
#include <cstdint>
#include <functional>
#include <limits>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "cascreen/dataset.hpp"
#include "cascreen/metrics.hpp"
#include "cascreen/model.hpp"
#include "cascreen/parallel.hpp"
#include "cascreen/preprocess.hpp"

namespace cascreen {

struct CvOptions {
  double skew_threshold = 0.75;
  bool global_fit_preprocess = false;  // paper-literal: fit preprocessing on all rows once
  bool stratified = true;
  bool paper_literal_accuracy = false;
  int jobs = 1;
};

struct OofPrediction {
  int label = 0;
  double proba = 0.0;
  int fold = -1;  // the fold whose held-out model produced this row's prediction
};

struct FoldEval {
  ConfusionMatrix train_cm;
  ConfusionMatrix test_cm;
  MetricTriple train_metrics;
  MetricTriple test_metrics;
  std::optional<PreprocessModel> preprocess;
  std::optional<TrainedModel> model;
};

struct MetricAggregate {
  std::optional<double> mean_accuracy, mean_sensitivity, mean_specificity;
  std::optional<double> best_accuracy, best_sensitivity, best_specificity;
  std::size_t skipped_accuracy = 0, skipped_sensitivity = 0, skipped_specificity = 0;
};

inline MetricAggregate aggregate_metrics(const std::vector<MetricTriple>& triples) {
  MetricAggregate agg;
  std::vector<std::optional<double>> acc, sen, spe;
  for (const auto& t : triples) {
    acc.push_back(t.accuracy);
    sen.push_back(t.sensitivity);
    spe.push_back(t.specificity);
  }
  agg.mean_accuracy = mean_defined(acc, &agg.skipped_accuracy);
  agg.mean_sensitivity = mean_defined(sen, &agg.skipped_sensitivity);
  agg.mean_specificity = mean_defined(spe, &agg.skipped_specificity);
  agg.best_accuracy = max_defined(acc);
  agg.best_sensitivity = max_defined(sen);
  agg.best_specificity = max_defined(spe);
  return agg;
}

struct CVResult {
  std::vector<FoldEval> folds;
  MetricAggregate train;
  MetricAggregate test;
  std::vector<OofPrediction> oof;  // one entry per dataset row
  FoldAssignment fold_assignment;

  std::vector<MetricTriple> fold_test_metrics() const {
    std::vector<MetricTriple> v;
    for (const auto& f : folds) v.push_back(f.test_metrics);
    return v;
  }

  /// Fold with the highest test accuracy, ties to the lowest index.
  std::size_t best_fold_by_test_accuracy() const {
    std::size_t best = 0;
    double best_acc = -1.0;
    for (std::size_t f = 0; f < folds.size(); ++f) {
      const auto a = folds[f].test_metrics.accuracy;
      if (a.has_value() && *a > best_acc) {
        best_acc = *a;
        best = f;
      }
    }
    return best;
  }
};

/// Per-fold training artifacts handed back by a fold trainer: a probability
/// scorer over raw (untransformed) feature rows plus whatever fitted pieces
/// the caller wants to keep.
struct FoldArtifacts {
  std::function<double(std::span<const double>)> proba;
  std::optional<PreprocessModel> preprocess;
  std::optional<TrainedModel> model;
};

using FoldTrainer = std::function<FoldArtifacts(
    const Matrix& x_train, const std::vector<int>& y_train, std::uint64_t fold_seed)>;

/// k-fold engine over raw rows. Fold f trains on every other fold via the
/// supplied trainer (seeded with mix(seed, f)) and scores both partitions.
/// Folds may run concurrently; results merge in fold order, so the outcome
/// is schedule-independent.
inline CVResult cv_core(const Matrix& x, const std::vector<int>& y, int k,
                        std::uint64_t seed, const FoldTrainer& trainer,
                        const CvOptions& opt = {}) {
  const FoldAssignment fa = opt.stratified ? stratified_kfold(y, k, seed)
                                           : unstratified_kfold(y.size(), k, seed);
  CVResult result;
  result.fold_assignment = fa;
  result.oof.assign(y.size(), {});

  struct FoldOut {
    FoldEval eval;
    std::vector<std::size_t> test_rows;
    std::vector<OofPrediction> test_pred;
  };
  auto outs = parallel_map<FoldOut>(static_cast<std::size_t>(k), opt.jobs, [&](std::size_t f) {
    const auto train_rows = fa.train_indices(static_cast<int>(f));
    const auto test_rows = fa.test_indices(static_cast<int>(f));
    const Matrix x_train = x.take_rows(train_rows);
    std::vector<int> y_train(train_rows.size());
    for (std::size_t i = 0; i < train_rows.size(); ++i) y_train[i] = y[train_rows[i]];

    FoldArtifacts art;
    try {
      art = trainer(x_train, y_train, mix(seed, f));
    } catch (const Error& e) {
      throw TrainingError("fold " + std::to_string(f) + ": " + e.what());
    }

    FoldOut out;
    out.test_rows = test_rows;
    const auto score = [&](const std::vector<std::size_t>& rows, ConfusionMatrix& cm,
                           std::vector<OofPrediction>* keep) {
      std::vector<int> yt, yp;
      for (std::size_t r : rows) {
        const double p = art.proba(x.row(r));
        const int label = p >= 0.5 ? 1 : 0;
        yt.push_back(y[r]);
        yp.push_back(label);
        if (keep) keep->push_back({label, p, static_cast<int>(f)});
      }
      cm = confusion(yt, yp);
    };
    score(train_rows, out.eval.train_cm, nullptr);
    score(test_rows, out.eval.test_cm, &out.test_pred);
    out.eval.train_metrics = metric_triple(out.eval.train_cm, opt.paper_literal_accuracy);
    out.eval.test_metrics = metric_triple(out.eval.test_cm, opt.paper_literal_accuracy);
    out.eval.preprocess = std::move(art.preprocess);
    out.eval.model = std::move(art.model);
    return out;
  });

  std::vector<MetricTriple> train_triples, test_triples;
  for (auto& out : outs) {
    for (std::size_t i = 0; i < out.test_rows.size(); ++i)
      result.oof[out.test_rows[i]] = out.test_pred[i];
    train_triples.push_back(out.eval.train_metrics);
    test_triples.push_back(out.eval.test_metrics);
    result.folds.push_back(std::move(out.eval));
  }
  result.train = aggregate_metrics(train_triples);
  result.test = aggregate_metrics(test_triples);
  return result;
}

/// Fold trainer for a plain learner: restrict to the feature subset, fit the
/// preprocessing on the fold's training rows (or reuse a globally fitted
/// model in paper-literal mode), then train.
inline FoldTrainer learner_fold_trainer(const LearnerSpec& spec,
                                        const std::vector<std::size_t>& features,
                                        const std::vector<bool>& binary_flags,
                                        const CvOptions& opt,
                                        std::shared_ptr<const PreprocessModel> global_pre = {}) {
  std::vector<bool> flags_sub;
  for (std::size_t f : features) flags_sub.push_back(binary_flags[f]);
  return [spec, features, flags_sub, opt, global_pre](const Matrix& x_train,
                                                      const std::vector<int>& y_train,
                                                      std::uint64_t fold_seed) {
    const Matrix x_sub = x_train.take_columns(features);
    PreprocessModel pre = global_pre ? *global_pre
                                     : fit_preprocess(x_sub, flags_sub, opt.skew_threshold);
    const Matrix x_t = transform_matrix(pre, x_sub);
    TrainedModel model = train_model(spec, x_t, y_train, fold_seed);
    FoldArtifacts art;
    auto shared_model = std::make_shared<TrainedModel>(std::move(model));
    auto shared_pre = std::make_shared<PreprocessModel>(std::move(pre));
    art.proba = [shared_model, shared_pre, features](std::span<const double> raw) {
      std::vector<double> sub(features.size());
      for (std::size_t i = 0; i < features.size(); ++i) sub[i] = raw[features[i]];
      const auto t = transform_row(*shared_pre, sub);
      return shared_model->predict_proba(t);
    };
    art.preprocess = *shared_pre;
    art.model = *shared_model;
    return art;
  };
}

/// Stratified k-fold cross-validation of one learner on a feature subset.
/// Deterministic given (dataset order, spec, features, k, seed).
inline CVResult cross_validate(const LearnerSpec& spec, const Dataset& ds,
                               const std::vector<std::size_t>& features, int k,
                               std::uint64_t seed, const CvOptions& opt = {}) {
  if (features.empty()) throw DataError("feature set must be nonempty");
  validate_spec(spec);
  const Matrix x = ds.feature_matrix();
  const std::vector<int> y = ds.labels();
  std::vector<bool> flags(feature_is_binary.begin(), feature_is_binary.end());
  std::shared_ptr<const PreprocessModel> global_pre;
  if (opt.global_fit_preprocess) {
    std::vector<bool> flags_sub;
    for (std::size_t f : features) flags_sub.push_back(flags[f]);
    global_pre = std::make_shared<PreprocessModel>(
        fit_preprocess(x.take_columns(features), flags_sub, opt.skew_threshold));
  }
  return cv_core(x, y, k, seed, learner_fold_trainer(spec, features, flags, opt, global_pre),
                 opt);
}

// ---------------------------------------------------------------------------
// Grid search
// ---------------------------------------------------------------------------

struct GridPoint {
  LearnerSpec spec;
  std::optional<CVResult> cv;
  std::string error;  // nonempty when this point failed
};

namespace detail {

/// Index of the strict maximum among the defined scores; ties keep the
/// earliest index. Empty when nothing is defined.
inline std::optional<std::size_t> argmax_earliest(
    const std::vector<std::optional<double>>& scores) {
  std::optional<std::size_t> best;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (!scores[i].has_value()) continue;
    if (!best.has_value() || *scores[i] > *scores[*best]) best = i;
  }
  return best;
}

}  // namespace detail

struct GridSearchResult {
  std::vector<GridPoint> points;   // in grid-enumeration order
  std::size_t best_index = 0;
  std::vector<std::size_t> tied_with_best;  // other indices at the same accuracy
};

/// Evaluates the family's full hyperparameter grid over an arbitrary matrix,
/// every point with the same seed (hence the same folds). Best point
/// maximizes the mean CV test accuracy; ties go to the earliest enumeration
/// index.
inline GridSearchResult grid_search_core(Family family, const Matrix& x,
                                         const std::vector<int>& y,
                                         const std::vector<bool>& binary_flags, int k,
                                         std::uint64_t seed, const TrainControls& controls = {},
                                         const CvOptions& opt = {}) {
  const auto grid = family_grid(family, controls);
  CvOptions point_opt = opt;
  point_opt.jobs = 1;  // parallelism lives at the grid level
  std::vector<std::size_t> all(x.cols());
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
  auto points = parallel_map<GridPoint>(grid.size(), opt.jobs, [&](std::size_t g) {
    GridPoint pt;
    pt.spec = grid[g];
    try {
      pt.cv = cv_core(x, y, k, seed,
                      learner_fold_trainer(grid[g], all, binary_flags, point_opt), point_opt);
    } catch (const Error& e) {
      pt.error = e.what();
    }
    return pt;
  });

  GridSearchResult res;
  res.points = std::move(points);
  std::vector<std::optional<double>> scores;
  for (const auto& pt : res.points)
    scores.push_back(pt.cv.has_value() ? pt.cv->test.mean_accuracy : std::nullopt);
  const auto best = detail::argmax_earliest(scores);
  if (!best.has_value()) throw TrainingError("grid search: every grid point failed");
  res.best_index = *best;
  const double win = *scores[res.best_index];
  for (std::size_t g = res.best_index + 1; g < scores.size(); ++g)
    if (scores[g].has_value() && *scores[g] == win) res.tied_with_best.push_back(g);
  return res;
}

/// Grid search on a dataset restricted to a feature subset.
inline GridSearchResult grid_search(Family family, const Dataset& ds,
                                    const std::vector<std::size_t>& features, int k,
                                    std::uint64_t seed, const TrainControls& controls = {},
                                    const CvOptions& opt = {}) {
  if (features.empty()) throw DataError("feature set must be nonempty");
  std::vector<bool> flags_sub;
  for (std::size_t f : features) flags_sub.push_back(feature_is_binary[f]);
  return grid_search_core(family, ds.feature_matrix().take_columns(features), ds.labels(),
                          flags_sub, k, seed, controls, opt);
}

// ---------------------------------------------------------------------------
// Sequential forward selection
// ---------------------------------------------------------------------------

struct SfsStep {
  std::size_t feature = 0;
  double mean_test_accuracy = 0.0;
};

struct SfsResult {
  std::vector<SfsStep> trace;
  std::vector<std::size_t> selected;  // ascending feature indices
};

/// Greedy forward selection over an arbitrary evaluator mapping a sorted
/// feature subset to a score. Stops at the cap or when the best candidate
/// improves the running score by less than min_gain.
inline SfsResult sfs_core(std::size_t n_features,
                          const std::function<double(const std::vector<std::size_t>&)>& evaluate,
                          std::size_t max_features, double min_gain, int jobs = 1) {
  SfsResult res;
  double current = -std::numeric_limits<double>::infinity();
  while (res.selected.size() < max_features) {
    std::vector<std::size_t> remaining;
    for (std::size_t f = 0; f < n_features; ++f)
      if (std::find(res.selected.begin(), res.selected.end(), f) == res.selected.end())
        remaining.push_back(f);
    if (remaining.empty()) break;
    const auto scores = parallel_map<double>(remaining.size(), jobs, [&](std::size_t i) {
      std::vector<std::size_t> candidate = res.selected;
      candidate.push_back(remaining[i]);
      std::sort(candidate.begin(), candidate.end());
      return evaluate(candidate);
    });
    std::size_t best_i = 0;
    for (std::size_t i = 1; i < scores.size(); ++i)
      if (scores[i] > scores[best_i]) best_i = i;  // ties keep the lower feature index
    if (scores[best_i] - current < min_gain) break;
    current = scores[best_i];
    res.trace.push_back({remaining[best_i], current});
    res.selected.push_back(remaining[best_i]);
    std::sort(res.selected.begin(), res.selected.end());
  }
  return res;
}

/// SFS scored by mean CV test accuracy with a fixed seed (the folds are
/// shared across every evaluation).
inline SfsResult sequential_forward_select(const LearnerSpec& spec, const Dataset& ds, int k,
                                           std::uint64_t seed, std::size_t max_features,
                                           double min_gain = 0.0, const CvOptions& opt = {}) {
  if (max_features > feature_count)
    throw DataError("max_features exceeds the feature count");
  CvOptions eval_opt = opt;
  eval_opt.jobs = 1;  // parallelism lives at the candidate level
  return sfs_core(
      feature_count,
      [&](const std::vector<std::size_t>& features) {
        const auto cv = cross_validate(spec, ds, features, k, seed, eval_opt);
        return cv.test.mean_accuracy.value_or(0.0);
      },
      max_features, min_gain, opt.jobs);
}

}  // namespace cascreen
