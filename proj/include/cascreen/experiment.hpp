#pragma once

#include <chrono>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "cascreen/cascade.hpp"
#include "cascreen/json_io.hpp"
#include "cascreen/selection.hpp"
#include "cascreen/synth.hpp"

#ifndef CASCREEN_VERSION
#define CASCREEN_VERSION "0.1.0"
#endif

namespace cascreen {

// ---------------------------------------------------------------------------
// Model roster
// ---------------------------------------------------------------------------

enum class ModelKind { svc, mlp, tree, forest, svc_dt, svc_dt_rf };

inline constexpr std::array<ModelKind, 6> all_model_kinds = {
    ModelKind::svc,  ModelKind::mlp,    ModelKind::tree,
    ModelKind::forest, ModelKind::svc_dt, ModelKind::svc_dt_rf};

inline const char* to_string(ModelKind m) {
  switch (m) {
    case ModelKind::svc: return "SVC";
    case ModelKind::mlp: return "MLP";
    case ModelKind::tree: return "TREE";
    case ModelKind::forest: return "FOREST";
    case ModelKind::svc_dt: return "SVC_DT";
    case ModelKind::svc_dt_rf: return "SVC_DT_RF";
  }
  return "?";
}

inline ModelKind model_kind_from_string(const std::string& s) {
  for (ModelKind m : all_model_kinds)
    if (s == to_string(m)) return m;
  throw SchemaError("unknown model '" + s + "'");
}

inline bool is_cascade(ModelKind m) {
  return m == ModelKind::svc_dt || m == ModelKind::svc_dt_rf;
}

inline std::vector<Family> cascade_stage_families(ModelKind m) {
  if (m == ModelKind::svc_dt) return {Family::svc, Family::tree};
  return {Family::svc, Family::tree, Family::forest};
}

// ---------------------------------------------------------------------------
// Config
// ---------------------------------------------------------------------------

struct ExperimentConfig {
  std::string dataset_csv;          // exactly one of dataset_csv / synth is set
  std::optional<CohortSpec> synth;
  bool impute = false;              // CSV loading mode
  int k = 10;
  std::uint64_t seed = 1;
  std::vector<ModelKind> models{all_model_kinds.begin(), all_model_kinds.end()};
  CascadeMode cascade_mode = CascadeMode::oof_safe;
  Augmentation cascade_augmentation = Augmentation::proba;
  bool cascade_grid_stages = false;
  bool sfs_enabled = true;
  std::size_t sfs_max_features = feature_count;
  double sfs_min_gain = 0.0;
  bool grid_enabled = true;
  double skew_threshold = 0.75;
  bool global_fit_preprocess = false;
  bool stratified = true;
  bool paper_literal_accuracy = false;
  TrainControls controls;
  std::map<Family, json> hyperparameters;  // per-family overrides of Table-5 defaults
  int jobs = 1;

  CvOptions cv_options() const {
    return {skew_threshold, global_fit_preprocess, stratified, paper_literal_accuracy, jobs};
  }
  LearnerSpec default_spec(Family f) const {
    const auto it = hyperparameters.find(f);
    if (it != hyperparameters.end()) return spec_from_json(f, it->second, controls);
    LearnerSpec s = LearnerSpec::defaults(f);
    s.controls = controls;
    return s;
  }
};

inline json to_json(const ExperimentConfig& c) {
  json dataset;
  if (c.synth.has_value())
    dataset = json{{"synth", to_json(*c.synth)}};
  else
    dataset = json{{"csv", c.dataset_csv}};
  if (c.impute) dataset["impute"] = true;
  json models = json::array();
  for (ModelKind m : c.models) models.push_back(to_string(m));
  json hyper = json::object();
  for (const auto& [family, hp] : c.hyperparameters) hyper[to_string(family)] = hp;
  return json{{"dataset", dataset},
              {"k", c.k},
              {"seed", c.seed},
              {"models", models},
              {"cascade",
               json{{"mode", to_string(c.cascade_mode)},
                    {"augmentation", to_string(c.cascade_augmentation)},
                    {"grid_stages", c.cascade_grid_stages}}},
              {"sfs",
               json{{"enabled", c.sfs_enabled},
                    {"max_features", c.sfs_max_features},
                    {"min_gain", c.sfs_min_gain}}},
              {"grid", json{{"enabled", c.grid_enabled}}},
              {"preprocess",
               json{{"skew_threshold", c.skew_threshold},
                    {"global_fit", c.global_fit_preprocess}}},
              {"cv",
               json{{"stratified", c.stratified},
                    {"paper_literal_accuracy", c.paper_literal_accuracy}}},
              {"controls", to_json(c.controls)},
              {"hyperparameters", hyper},
              {"jobs", c.jobs}};
}

inline ExperimentConfig experiment_config_from_json(const json& j) {
  require_known_keys(j,
                     {"dataset", "k", "seed", "models", "cascade", "sfs", "grid", "preprocess",
                      "cv", "controls", "hyperparameters", "jobs"},
                     "config");
  ExperimentConfig c;
  if (!j.contains("dataset")) throw SchemaError("config: missing 'dataset'");
  const auto& jd = j["dataset"];
  require_known_keys(jd, {"csv", "synth", "impute"}, "dataset");
  if (jd.contains("csv") == jd.contains("synth"))
    throw SchemaError("dataset: set exactly one of 'csv' or 'synth'");
  if (jd.contains("csv")) c.dataset_csv = jd["csv"].get<std::string>();
  if (jd.contains("synth")) c.synth = cohort_spec_from_json(jd["synth"]);
  c.impute = jd.value("impute", false);
  if (j.contains("k")) c.k = j["k"].get<int>();
  if (c.k < 2) throw SchemaError("config: k must be at least 2");
  if (j.contains("seed")) c.seed = j["seed"].get<std::uint64_t>();
  if (j.contains("models")) {
    c.models.clear();
    for (const auto& jm : j["models"]) c.models.push_back(model_kind_from_string(jm.get<std::string>()));
    if (c.models.empty()) throw SchemaError("config: model list must be nonempty");
  }
  if (j.contains("cascade")) {
    const auto& jc = j["cascade"];
    require_known_keys(jc, {"mode", "augmentation", "grid_stages"}, "cascade");
    if (jc.contains("mode")) {
      const std::string m = jc["mode"].get<std::string>();
      if (m == "OOF_SAFE")
        c.cascade_mode = CascadeMode::oof_safe;
      else if (m == "PAPER_FAITHFUL")
        c.cascade_mode = CascadeMode::paper_faithful;
      else
        throw SchemaError("cascade: unknown mode '" + m + "'");
    }
    if (jc.contains("augmentation")) {
      const std::string a = jc["augmentation"].get<std::string>();
      if (a == "PROBA")
        c.cascade_augmentation = Augmentation::proba;
      else if (a == "LABEL")
        c.cascade_augmentation = Augmentation::label;
      else
        throw SchemaError("cascade: unknown augmentation '" + a + "'");
    }
    c.cascade_grid_stages = jc.value("grid_stages", false);
  }
  if (j.contains("sfs")) {
    const auto& js = j["sfs"];
    require_known_keys(js, {"enabled", "max_features", "min_gain"}, "sfs");
    c.sfs_enabled = js.value("enabled", true);
    c.sfs_max_features = js.value("max_features", feature_count);
    c.sfs_min_gain = js.value("min_gain", 0.0);
    if (c.sfs_max_features < 1 || c.sfs_max_features > feature_count)
      throw SchemaError("sfs: max_features must be in 1..17");
  }
  if (j.contains("grid")) {
    require_known_keys(j["grid"], {"enabled"}, "grid");
    c.grid_enabled = j["grid"].value("enabled", true);
  }
  if (j.contains("preprocess")) {
    const auto& jp = j["preprocess"];
    require_known_keys(jp, {"skew_threshold", "global_fit"}, "preprocess");
    c.skew_threshold = jp.value("skew_threshold", 0.75);
    c.global_fit_preprocess = jp.value("global_fit", false);
  }
  if (j.contains("cv")) {
    const auto& jc = j["cv"];
    require_known_keys(jc, {"stratified", "paper_literal_accuracy"}, "cv");
    c.stratified = jc.value("stratified", true);
    c.paper_literal_accuracy = jc.value("paper_literal_accuracy", false);
  }
  if (j.contains("controls")) c.controls = train_controls_from_json(j["controls"]);
  if (j.contains("hyperparameters")) {
    for (const auto& [name, hp] : j["hyperparameters"].items()) {
      const Family f = family_from_string(name);
      spec_from_json(f, hp, c.controls);  // validate now, fail fast
      c.hyperparameters[f] = hp;
    }
  }
  if (j.contains("jobs")) c.jobs = j["jobs"].get<int>();
  return c;
}

// ---------------------------------------------------------------------------
// Report building
// ---------------------------------------------------------------------------

namespace detail {

inline std::uint64_t fnv1a64(const std::string& s) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char ch : s) {
    h ^= ch;
    h *= 1099511628211ULL;
  }
  return h;
}

inline std::string display4(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4f", v);
  return buf;
}

inline json metric_json(const std::optional<double>& v) {
  return v.has_value() ? json(*v) : json(nullptr);
}

inline json metric_display(const std::optional<double>& v) {
  return v.has_value() ? json(display4(*v)) : json(nullptr);
}

inline json triple_to_json(const MetricTriple& t) {
  return json{{"accuracy", metric_json(t.accuracy)},
              {"accuracy_display", metric_display(t.accuracy)},
              {"sensitivity", metric_json(t.sensitivity)},
              {"sensitivity_display", metric_display(t.sensitivity)},
              {"specificity", metric_json(t.specificity)},
              {"specificity_display", metric_display(t.specificity)}};
}

inline json confusion_to_json(const ConfusionMatrix& cm) {
  return json{{"tp", cm.tp}, {"tn", cm.tn}, {"fp", cm.fp}, {"fn", cm.fn}};
}

inline json aggregate_to_json(const MetricAggregate& a) {
  return json{{"mean",
               json{{"accuracy", metric_json(a.mean_accuracy)},
                    {"accuracy_display", metric_display(a.mean_accuracy)},
                    {"sensitivity", metric_json(a.mean_sensitivity)},
                    {"sensitivity_display", metric_display(a.mean_sensitivity)},
                    {"specificity", metric_json(a.mean_specificity)},
                    {"specificity_display", metric_display(a.mean_specificity)}}},
              {"best",
               json{{"accuracy", metric_json(a.best_accuracy)},
                    {"accuracy_display", metric_display(a.best_accuracy)},
                    {"sensitivity", metric_json(a.best_sensitivity)},
                    {"sensitivity_display", metric_display(a.best_sensitivity)},
                    {"specificity", metric_json(a.best_specificity)},
                    {"specificity_display", metric_display(a.best_specificity)}}},
              {"skipped_folds",
               json{{"accuracy", a.skipped_accuracy},
                    {"sensitivity", a.skipped_sensitivity},
                    {"specificity", a.skipped_specificity}}}};
}

inline json cv_to_json(const CVResult& cv, bool include_preprocess) {
  json folds = json::array();
  for (const auto& f : cv.folds) {
    json jf{{"train_confusion", confusion_to_json(f.train_cm)},
            {"train", triple_to_json(f.train_metrics)},
            {"test_confusion", confusion_to_json(f.test_cm)},
            {"test", triple_to_json(f.test_metrics)}};
    if (include_preprocess && f.preprocess.has_value())
      jf["preprocess"] = to_json(*f.preprocess);
    folds.push_back(jf);
  }
  return json{{"folds", folds},
              {"train", aggregate_to_json(cv.train)},
              {"test", aggregate_to_json(cv.test)}};
}

inline json sfs_to_json(const SfsResult& sfs) {
  json trace = json::array();
  for (const auto& step : sfs.trace)
    trace.push_back(json{{"feature", feature_names[step.feature]},
                         {"feature_index", step.feature},
                         {"mean_test_accuracy", step.mean_test_accuracy},
                         {"mean_test_accuracy_display", display4(step.mean_test_accuracy)}});
  json selected = json::array();
  for (std::size_t f : sfs.selected) selected.push_back(feature_names[f]);
  return json{{"trace", trace}, {"selected", selected}};
}

inline std::vector<std::size_t> all_features() {
  std::vector<std::size_t> v(feature_count);
  for (std::size_t i = 0; i < feature_count; ++i) v[i] = i;
  return v;
}

}  // namespace detail

struct ModelOutcome {
  ModelKind kind;
  json entry;  // the report entry
  std::optional<MetricAggregate> train;  // final CV aggregates when successful
  std::optional<MetricAggregate> test;
};

struct ExperimentResult {
  json report;
  std::string metrics_csv;
};

inline Family model_family(ModelKind kind) {
  switch (kind) {
    case ModelKind::svc: return Family::svc;
    case ModelKind::mlp: return Family::mlp;
    case ModelKind::tree: return Family::tree;
    case ModelKind::forest: return Family::forest;
    default: throw DataError("cascade models have no single family");
  }
}

/// The per-model decisions made before final fitting: feature subset from
/// SFS (when enabled) and hyperparameters from grid search (when enabled).
/// Cascades select their base features with the cascade itself as the
/// scored model.
struct ModelPlan {
  std::vector<std::size_t> features;
  LearnerSpec spec;          // individual models
  CascadeSpec cascade_spec;  // cascades (base_features filled in)
  json sfs_json = nullptr;
  json grid_json = nullptr;
};

inline ModelPlan plan_model(const ExperimentConfig& cfg, const Dataset& ds, ModelKind kind,
                            std::uint64_t model_seed) {
  const CvOptions opt = cfg.cv_options();
  ModelPlan plan;
  plan.features = detail::all_features();
  if (!is_cascade(kind)) {
    const Family family = model_family(kind);
    plan.spec = cfg.default_spec(family);
    if (cfg.sfs_enabled) {
      const SfsResult sfs = sequential_forward_select(plan.spec, ds, cfg.k, model_seed,
                                                      cfg.sfs_max_features, cfg.sfs_min_gain,
                                                      opt);
      plan.sfs_json = detail::sfs_to_json(sfs);
      if (!sfs.selected.empty()) plan.features = sfs.selected;
    }
    if (cfg.grid_enabled) {
      const GridSearchResult gs =
          grid_search(family, ds, plan.features, cfg.k, model_seed, cfg.controls, opt);
      plan.spec = gs.points[gs.best_index].spec;
      json ties = json::array();
      for (std::size_t t : gs.tied_with_best) ties.push_back(t);
      plan.grid_json = json{{"evaluated", gs.points.size()},
                            {"best_index", gs.best_index},
                            {"tied_with_best", ties}};
    }
  } else {
    for (Family f : cascade_stage_families(kind))
      plan.cascade_spec.stages.push_back(cfg.default_spec(f));
    plan.cascade_spec.mode = cfg.cascade_mode;
    plan.cascade_spec.augmentation = cfg.cascade_augmentation;
    if (cfg.sfs_enabled) {
      const SfsResult sfs = sfs_core(
          feature_count,
          [&](const std::vector<std::size_t>& candidate) {
            CascadeSpec probe = plan.cascade_spec;
            probe.base_features = candidate;
            CvOptions inner = opt;
            inner.jobs = 1;
            const CascadeFit fit = fit_cascade(probe, ds, cfg.k, model_seed, inner);
            return fit.stage_cv.back().test.mean_accuracy.value_or(0.0);
          },
          cfg.sfs_max_features, cfg.sfs_min_gain, opt.jobs);
      plan.sfs_json = detail::sfs_to_json(sfs);
      if (!sfs.selected.empty()) plan.features = sfs.selected;
    }
    plan.cascade_spec.base_features = plan.features;
  }
  return plan;
}

/// Runs one model end to end: optional SFS with the configured default
/// hyperparameters, optional grid search on the selected features, then the
/// final cross-validation. A cascade's result is the apparent CV result of
/// its final stage.
inline ModelOutcome run_model(const ExperimentConfig& cfg, const Dataset& ds, ModelKind kind) {
  const std::uint64_t model_seed = mix(cfg.seed, detail::fnv1a64(to_string(kind)));
  const CvOptions opt = cfg.cv_options();
  ModelOutcome out;
  out.kind = kind;
  json& entry = out.entry;
  entry["model"] = to_string(kind);
  entry["seed"] = model_seed;

  const ModelPlan plan = plan_model(cfg, ds, kind, model_seed);
  entry["sfs"] = plan.sfs_json;
  entry["grid"] = plan.grid_json;
  if (!is_cascade(kind)) {
    entry["hyperparameters"] = hyperparameters_to_json(plan.spec);
    const CVResult cv = cross_validate(plan.spec, ds, plan.features, cfg.k, model_seed, opt);
    entry["cv"] = detail::cv_to_json(cv, true);
    out.train = cv.train;
    out.test = cv.test;
  } else {
    const CascadeFit fit =
        fit_cascade(plan.cascade_spec, ds, cfg.k, model_seed, opt, cfg.cascade_grid_stages);
    json stage_json = json::array();
    for (std::size_t s = 0; s < fit.model.stages.size(); ++s) {
      stage_json.push_back(
          json{{"family", to_string(fit.model.stages[s].model.spec.family)},
               {"hyperparameters", hyperparameters_to_json(fit.model.stages[s].model.spec)},
               {"cv", detail::cv_to_json(fit.stage_cv[s], s + 1 == fit.model.stages.size())}});
    }
    entry["stages"] = stage_json;
    entry["mode"] = to_string(cfg.cascade_mode);
    entry["augmentation"] = to_string(cfg.cascade_augmentation);
    entry["hyperparameters"] = stage_json.back()["hyperparameters"];
    entry["cv"] = detail::cv_to_json(fit.stage_cv.back(), false);
    out.train = fit.stage_cv.back().train;
    out.test = fit.stage_cv.back().test;
  }
  json selected = json::array();
  for (std::size_t f : plan.features) selected.push_back(feature_names[f]);
  entry["selected_features"] = selected;
  return out;
}

/// Full experiment: every configured model in canonical order, one report
/// plus the flat metrics table. Deterministic given the config; timestamps
/// and durations live only under "provenance".
inline ExperimentResult run_experiment(const ExperimentConfig& cfg) {
  Dataset ds;
  json dataset_info;
  if (cfg.synth.has_value()) {
    GenerationMeta meta;
    ds = generate_dataset(*cfg.synth, &meta);
    dataset_info["source"] = "synth";
    dataset_info["realized_prevalence"] = meta.realized_prevalence;
    dataset_info["warnings"] = meta.warnings;
  } else {
    std::ifstream in(cfg.dataset_csv);
    if (!in) throw DataError("cannot open dataset file " + cfg.dataset_csv);
    ds = load_csv(in, cfg.impute ? LoadMode::impute_mode : LoadMode::strict);
    dataset_info["source"] = "csv:" + cfg.dataset_csv;
  }
  dataset_info["n"] = ds.n();
  dataset_info["positives"] = ds.positive_count();
  dataset_info["prevalence"] = ds.prevalence();

  // Canonical model order, duplicates collapsed.
  std::vector<ModelKind> roster;
  for (ModelKind m : all_model_kinds)
    for (ModelKind want : cfg.models)
      if (m == want && std::find(roster.begin(), roster.end(), m) == roster.end())
        roster.push_back(m);

  const auto run_started = std::chrono::system_clock::now();
  json entries = json::array();
  json durations = json::object();
  struct CsvRow {
    std::string name;
    std::optional<MetricAggregate> train, test;
  };
  std::vector<CsvRow> csv_rows;
  for (ModelKind kind : roster) {
    const auto t0 = std::chrono::steady_clock::now();
    CsvRow row;
    row.name = to_string(kind);
    json entry;
    try {
      ModelOutcome outcome = run_model(cfg, ds, kind);
      entry = std::move(outcome.entry);
      row.train = outcome.train;
      row.test = outcome.test;
    } catch (const Error& e) {
      entry = json{{"model", to_string(kind)}, {"error", e.what()}};
    }
    const auto t1 = std::chrono::steady_clock::now();
    durations[to_string(kind)] =
        std::chrono::duration_cast<std::chrono::milliseconds>(t1 - t0).count();
    entries.push_back(std::move(entry));
    csv_rows.push_back(std::move(row));
  }

  ExperimentResult result;
  result.report = json{{"schema", "cascade-screen/report"},
                       {"version", CASCREEN_VERSION},
                       {"config", to_json(cfg)},
                       {"dataset", dataset_info},
                       {"feature_names", feature_names},
                       {"models", entries}};
  const auto run_finished = std::chrono::system_clock::now();
  result.report["provenance"] =
      json{{"started_unix_ms", std::chrono::duration_cast<std::chrono::milliseconds>(
                                   run_started.time_since_epoch())
                                   .count()},
           {"finished_unix_ms", std::chrono::duration_cast<std::chrono::milliseconds>(
                                    run_finished.time_since_epoch())
                                    .count()},
           {"durations_ms", durations}};

  std::ostringstream csv;
  csv << "model,train_accuracy_mean,test_accuracy_mean,train_sensitivity_mean,"
         "test_sensitivity_mean,train_specificity_mean,test_specificity_mean,"
         "train_accuracy_best,test_accuracy_best,train_sensitivity_best,"
         "test_sensitivity_best,train_specificity_best,test_specificity_best\n";
  for (const auto& row : csv_rows) {
    csv << row.name;
    const auto cell = [&](const std::optional<double>& v) {
      csv << ',';
      if (v.has_value()) csv << detail::display4(*v);
    };
    if (!row.train.has_value() || !row.test.has_value()) {
      for (int i = 0; i < 12; ++i) csv << ',';
      csv << "\n";
      continue;
    }
    cell(row.train->mean_accuracy);
    cell(row.test->mean_accuracy);
    cell(row.train->mean_sensitivity);
    cell(row.test->mean_sensitivity);
    cell(row.train->mean_specificity);
    cell(row.test->mean_specificity);
    cell(row.train->best_accuracy);
    cell(row.test->best_accuracy);
    cell(row.train->best_sensitivity);
    cell(row.test->best_sensitivity);
    cell(row.train->best_specificity);
    cell(row.test->best_specificity);
    csv << "\n";
  }
  result.metrics_csv = csv.str();
  return result;
}

}  // namespace cascreen
