#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "cascreen/dataset.hpp"
#include "cascreen/selection.hpp"

namespace cascreen {

enum class CascadeMode { oof_safe, paper_faithful };
enum class Augmentation { proba, label };

inline const char* to_string(CascadeMode m) {
  return m == CascadeMode::oof_safe ? "OOF_SAFE" : "PAPER_FAITHFUL";
}
inline const char* to_string(Augmentation a) { return a == Augmentation::proba ? "PROBA" : "LABEL"; }

/// Ordered stage chain. Stage i > 0 sees the base features plus one
/// augmented column per earlier stage; the last stage is the predictor.
struct CascadeSpec {
  std::vector<LearnerSpec> stages;
  Augmentation augmentation = Augmentation::proba;
  CascadeMode mode = CascadeMode::oof_safe;
  std::vector<std::size_t> base_features;  // empty means all features
};

struct CascadeStage {
  PreprocessModel preprocess;  // fitted over this stage's input schema
  TrainedModel model;
};

struct CascadeModel {
  std::vector<CascadeStage> stages;
  CascadeMode mode = CascadeMode::oof_safe;
  Augmentation augmentation = Augmentation::proba;
  std::vector<std::size_t> base_features;
  std::size_t input_dim = 0;  // dimension of the raw rows handed to predict
};

struct CascadePrediction {
  int label = 0;
  double proba = 0.0;
};

struct CascadeFit {
  CascadeModel model;
  std::vector<CVResult> stage_cv;  // stage_cv.back() is the cascade's apparent CV result
};

namespace detail {

inline FoldTrainer stage_trainer(const LearnerSpec& spec, std::size_t n_cols,
                                 const std::vector<bool>& flags, const CvOptions& opt,
                                 std::size_t stage_index) {
  std::vector<std::size_t> all(n_cols);
  for (std::size_t i = 0; i < n_cols; ++i) all[i] = i;
  const FoldTrainer base = learner_fold_trainer(spec, all, flags, opt);
  return [base, stage_index](const Matrix& x, const std::vector<int>& y,
                             std::uint64_t fold_seed) {
    return base(x, y, mix(fold_seed, stage_index));
  };
}

inline CascadeStage fit_stage_on_all(const LearnerSpec& spec, const Matrix& x,
                                     const std::vector<int>& y,
                                     const std::vector<bool>& flags, const CvOptions& opt,
                                     std::uint64_t seed) {
  CascadeStage st;
  st.preprocess = fit_preprocess(x, flags, opt.skew_threshold);
  const Matrix xt = transform_matrix(st.preprocess, x);
  st.model = train_model(spec, xt, y, seed);
  return st;
}

inline double stage_proba(const CascadeStage& st, std::span<const double> row) {
  return st.model.predict_proba(transform_row(st.preprocess, row));
}

}  // namespace detail

/// Core fit over an already-restricted base matrix. Every stage runs its own
/// k-fold cross-validation on the current (augmented) matrix; all stages
/// share one fold assignment since they share the seed.
///
/// OOF_SAFE: the column appended for later stages holds out-of-fold
/// predictions, so no training row is ever scored by a model that saw it,
/// and the deployed stage model is refit on all rows.
///
/// PAPER_FAITHFUL: the fold model with the best test accuracy is kept as the
/// deployed model and its in-sample predictions over all rows become the
/// augmented column. This reproduces the described procedure and leaks label
/// information into later stages; see the shuffled-label tests.
inline CascadeFit fit_cascade_core(const std::vector<LearnerSpec>& stages, const Matrix& x_base,
                                   const std::vector<int>& y, std::vector<bool> flags,
                                   CascadeMode mode, Augmentation augmentation, int k,
                                   std::uint64_t seed, const CvOptions& opt = {},
                                   bool grid_stages = false) {
  if (stages.size() < 2) throw DataError("a cascade needs at least 2 stages");
  for (const auto& s : stages) validate_spec(s);

  CascadeFit fit;
  fit.model.mode = mode;
  fit.model.augmentation = augmentation;
  fit.model.input_dim = x_base.cols();

  Matrix x = x_base;
  for (std::size_t s = 0; s < stages.size(); ++s) {
    LearnerSpec stage_spec = stages[s];
    if (grid_stages) {
      const auto gs = grid_search_core(stage_spec.family, x, y, flags, k, seed,
                                       stage_spec.controls, opt);
      stage_spec = gs.points[gs.best_index].spec;
    }
    CVResult cv;
    try {
      cv = cv_core(x, y, k, seed, detail::stage_trainer(stage_spec, x.cols(), flags, opt, s),
                   opt);
    } catch (const Error& e) {
      throw TrainingError("cascade stage " + std::to_string(s) + ": " + e.what());
    }

    CascadeStage deployed;
    if (mode == CascadeMode::oof_safe) {
      deployed = detail::fit_stage_on_all(stage_spec, x, y, flags, opt,
                                          mix(mix(seed, static_cast<std::uint64_t>(k)), s));
    } else {
      const std::size_t best = cv.best_fold_by_test_accuracy();
      deployed.preprocess = *cv.folds[best].preprocess;
      deployed.model = *cv.folds[best].model;
    }

    if (s + 1 < stages.size()) {
      std::vector<double> aug(y.size());
      if (mode == CascadeMode::oof_safe) {
        for (std::size_t r = 0; r < y.size(); ++r)
          aug[r] = augmentation == Augmentation::proba ? cv.oof[r].proba
                                                       : double(cv.oof[r].label);
      } else {
        for (std::size_t r = 0; r < y.size(); ++r) {
          const double p = detail::stage_proba(deployed, x.row(r));
          aug[r] = augmentation == Augmentation::proba ? p : double(p >= 0.5 ? 1 : 0);
        }
      }
      x.append_column(aug);
      flags.push_back(augmentation == Augmentation::label);
    }

    fit.stage_cv.push_back(std::move(cv));
    fit.model.stages.push_back(std::move(deployed));
  }
  return fit;
}

/// Fits the cascade on a dataset, restricting to the spec's base features.
inline CascadeFit fit_cascade(const CascadeSpec& spec, const Dataset& ds, int k,
                              std::uint64_t seed, const CvOptions& opt = {},
                              bool grid_stages = false) {
  std::vector<std::size_t> base = spec.base_features;
  if (base.empty()) {
    base.resize(feature_count);
    for (std::size_t i = 0; i < feature_count; ++i) base[i] = i;
  }
  const Matrix x = ds.feature_matrix().take_columns(base);
  std::vector<bool> flags;
  for (std::size_t f : base) flags.push_back(feature_is_binary[f]);
  CascadeFit fit = fit_cascade_core(spec.stages, x, ds.labels(), std::move(flags), spec.mode,
                                    spec.augmentation, k, seed, opt, grid_stages);
  fit.model.base_features = base;
  fit.model.input_dim = feature_count;
  return fit;
}

/// Scores one raw feature row: each stage's output is appended to the
/// growing input of the next; the final stage's label and probability come
/// back. Pure function of (model, x).
inline CascadePrediction predict_cascade(const CascadeModel& model,
                                         std::span<const double> x) {
  if (x.size() != model.input_dim)
    throw DataError("input has wrong dimension for cascade");
  std::vector<double> v;
  if (model.base_features.empty()) {
    v.assign(x.begin(), x.end());
  } else {
    for (std::size_t f : model.base_features) v.push_back(x[f]);
  }
  double proba = 0.0;
  for (std::size_t s = 0; s < model.stages.size(); ++s) {
    proba = detail::stage_proba(model.stages[s], v);
    if (s + 1 < model.stages.size())
      v.push_back(model.augmentation == Augmentation::proba ? proba
                                                            : double(proba >= 0.5 ? 1 : 0));
  }
  return {proba >= 0.5 ? 1 : 0, proba};
}

}  // namespace cascreen
