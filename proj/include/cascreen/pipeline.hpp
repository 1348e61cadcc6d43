#pragma once

#include <string>
#include <variant>
#include <vector>

#include "cascreen/experiment.hpp"

namespace cascreen {

/// Deployable artifact produced by `train`: one preprocess + model pair over
/// a feature subset, or a whole cascade.
struct SinglePipeline {
  std::vector<std::size_t> features;
  PreprocessModel preprocess;
  TrainedModel model;
};

struct Pipeline {
  std::variant<SinglePipeline, CascadeModel> artifact;

  CascadePrediction predict(std::span<const double> row) const {
    if (std::holds_alternative<SinglePipeline>(artifact)) {
      const auto& p = std::get<SinglePipeline>(artifact);
      std::vector<double> sub(p.features.size());
      for (std::size_t i = 0; i < p.features.size(); ++i) sub[i] = row[p.features[i]];
      const double proba = p.model.predict_proba(transform_row(p.preprocess, sub));
      return {proba >= 0.5 ? 1 : 0, proba};
    }
    return predict_cascade(std::get<CascadeModel>(artifact), row);
  }
};

/// Applies the config's SFS and grid decisions for one model, then fits the
/// deployable pipeline on every row of the dataset.
inline Pipeline fit_pipeline(const ExperimentConfig& cfg, const Dataset& ds, ModelKind kind) {
  const std::uint64_t model_seed = mix(cfg.seed, detail::fnv1a64(to_string(kind)));
  const ModelPlan plan = plan_model(cfg, ds, kind, model_seed);
  Pipeline pipe;
  if (!is_cascade(kind)) {
    SinglePipeline sp;
    sp.features = plan.features;
    std::vector<bool> flags;
    for (std::size_t f : plan.features) flags.push_back(feature_is_binary[f]);
    const Matrix x = ds.feature_matrix().take_columns(plan.features);
    sp.preprocess = fit_preprocess(x, flags, cfg.skew_threshold);
    const Matrix xt = transform_matrix(sp.preprocess, x);
    sp.model = train_model(plan.spec, xt, ds.labels(),
                           mix(model_seed, static_cast<std::uint64_t>(cfg.k)), cfg.jobs);
    pipe.artifact = std::move(sp);
  } else {
    pipe.artifact = fit_cascade(plan.cascade_spec, ds, cfg.k, model_seed, cfg.cv_options(),
                                cfg.cascade_grid_stages)
                        .model;
  }
  return pipe;
}

inline json to_json(const Pipeline& p) {
  json doc{{"schema", "cascade-screen/model"}, {"version", CASCREEN_VERSION}};
  if (std::holds_alternative<SinglePipeline>(p.artifact)) {
    const auto& sp = std::get<SinglePipeline>(p.artifact);
    doc["kind"] = "single";
    doc["features"] = sp.features;
    json names = json::array();
    for (std::size_t f : sp.features) names.push_back(feature_names[f]);
    doc["feature_names"] = names;
    doc["preprocess"] = to_json(sp.preprocess);
    doc["model"] = to_json(sp.model);
  } else {
    doc["kind"] = "cascade";
    doc["cascade"] = to_json(std::get<CascadeModel>(p.artifact));
  }
  return doc;
}

inline Pipeline pipeline_from_json(const json& j) {
  require_known_keys(
      j, {"schema", "version", "kind", "features", "feature_names", "preprocess", "model",
          "cascade"},
      "pipeline");
  if (j.value("schema", "") != "cascade-screen/model")
    throw SchemaError("not a model document (bad schema tag)");
  Pipeline p;
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "single") {
    SinglePipeline sp;
    sp.features = j.at("features").get<std::vector<std::size_t>>();
    sp.preprocess = preprocess_from_json(j.at("preprocess"));
    sp.model = trained_model_from_json(j.at("model"));
    p.artifact = std::move(sp);
  } else if (kind == "cascade") {
    p.artifact = cascade_from_json(j.at("cascade"));
  } else {
    throw SchemaError("unknown pipeline kind '" + kind + "'");
  }
  return p;
}

}  // namespace cascreen
