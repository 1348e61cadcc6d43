#pragma once

#include <string>
#include <vector>

#include "json.hpp"

#include "cascreen/cascade.hpp"
#include "cascreen/error.hpp"
#include "cascreen/learner.hpp"
#include "cascreen/model.hpp"
#include "cascreen/preprocess.hpp"
#include "cascreen/synth.hpp"

namespace cascreen {

using json = nlohmann::json;

/// Rejects unknown keys so config typos cannot silently change a run.
inline void require_known_keys(const json& j, std::initializer_list<const char*> allowed,
                               const std::string& context) {
  if (!j.is_object()) throw SchemaError(context + ": expected a JSON object");
  for (const auto& [key, value] : j.items()) {
    bool ok = false;
    for (const char* a : allowed)
      if (key == a) {
        ok = true;
        break;
      }
    if (!ok) throw SchemaError(context + ": unknown key '" + key + "'");
  }
}

// ---------------------------------------------------------------------------
// Learner specs
// ---------------------------------------------------------------------------

inline json to_json(const TrainControls& c) {
  return json{{"n_trees", c.n_trees},
              {"bootstrap", c.bootstrap},
              {"all_features", c.all_features},
              {"max_epochs", c.max_epochs},
              {"batch_size", c.batch_size},
              {"sgd_learning_rate", c.sgd_learning_rate},
              {"adam_learning_rate", c.adam_learning_rate},
              {"adam_beta1", c.adam_beta1},
              {"adam_beta2", c.adam_beta2},
              {"adam_epsilon", c.adam_epsilon},
              {"plateau_tol", c.plateau_tol},
              {"plateau_patience", c.plateau_patience},
              {"early_stop_tol", c.early_stop_tol},
              {"svc_tol", c.svc_tol},
              {"svc_max_updates_per_row", c.svc_max_updates_per_row}};
}

inline TrainControls train_controls_from_json(const json& j, TrainControls base = {}) {
  require_known_keys(j,
                     {"n_trees", "bootstrap", "all_features", "max_epochs", "batch_size",
                      "sgd_learning_rate", "adam_learning_rate", "adam_beta1", "adam_beta2",
                      "adam_epsilon", "plateau_tol", "plateau_patience", "early_stop_tol",
                      "svc_tol", "svc_max_updates_per_row"},
                     "controls");
  if (j.contains("n_trees")) base.n_trees = j["n_trees"].get<int>();
  if (j.contains("bootstrap")) base.bootstrap = j["bootstrap"].get<bool>();
  if (j.contains("all_features")) base.all_features = j["all_features"].get<bool>();
  if (j.contains("max_epochs")) base.max_epochs = j["max_epochs"].get<int>();
  if (j.contains("batch_size")) base.batch_size = j["batch_size"].get<int>();
  if (j.contains("sgd_learning_rate")) base.sgd_learning_rate = j["sgd_learning_rate"].get<double>();
  if (j.contains("adam_learning_rate"))
    base.adam_learning_rate = j["adam_learning_rate"].get<double>();
  if (j.contains("adam_beta1")) base.adam_beta1 = j["adam_beta1"].get<double>();
  if (j.contains("adam_beta2")) base.adam_beta2 = j["adam_beta2"].get<double>();
  if (j.contains("adam_epsilon")) base.adam_epsilon = j["adam_epsilon"].get<double>();
  if (j.contains("plateau_tol")) base.plateau_tol = j["plateau_tol"].get<double>();
  if (j.contains("plateau_patience")) base.plateau_patience = j["plateau_patience"].get<int>();
  if (j.contains("early_stop_tol")) base.early_stop_tol = j["early_stop_tol"].get<double>();
  if (j.contains("svc_tol")) base.svc_tol = j["svc_tol"].get<double>();
  if (j.contains("svc_max_updates_per_row"))
    base.svc_max_updates_per_row = j["svc_max_updates_per_row"].get<long long>();
  return base;
}

inline json hyperparameters_to_json(const LearnerSpec& spec) {
  switch (spec.family) {
    case Family::svc: {
      const auto& p = spec.svc();
      return json{{"kernel", to_string(p.kernel)},
                  {"gamma", to_string(p.gamma)},
                  {"C", p.c},
                  {"degree", p.degree},
                  {"probability", p.probability}};
    }
    case Family::mlp: {
      const auto& p = spec.mlp();
      return json{{"hidden_width", p.hidden_width},
                  {"hidden_depth", p.hidden_depth},
                  {"activation", to_string(p.activation)},
                  {"solver", to_string(p.solver)},
                  {"alpha", p.alpha},
                  {"learning_rate", to_string(p.learning_rate)}};
    }
    case Family::tree:
    case Family::forest: {
      const auto& p = spec.tree();
      return json{{"criterion", to_string(p.criterion)},
                  {"max_depth", p.max_depth},
                  {"max_features", to_string(p.max_features)},
                  {"min_leaf", p.min_leaf},
                  {"min_split", p.min_split}};
    }
  }
  return {};
}

inline Family family_from_string(const std::string& s) {
  if (s == "SVC") return Family::svc;
  if (s == "MLP") return Family::mlp;
  if (s == "TREE") return Family::tree;
  if (s == "FOREST") return Family::forest;
  throw SchemaError("unknown learner family '" + s + "'");
}

inline LearnerSpec spec_from_json(Family family, const json& hp, TrainControls controls = {}) {
  LearnerSpec spec = LearnerSpec::defaults(family);
  spec.controls = controls;
  switch (family) {
    case Family::svc: {
      require_known_keys(hp, {"kernel", "gamma", "C", "degree", "probability"}, "SVC");
      SvcParams p = spec.svc();
      if (hp.contains("kernel"))
        p.kernel = enum_from_string<Kernel>(hp["kernel"].get<std::string>(),
                                            {Kernel::linear, Kernel::poly, Kernel::rbf,
                                             Kernel::sigmoid},
                                            "kernel");
      if (hp.contains("gamma"))
        p.gamma = enum_from_string<GammaMode>(hp["gamma"].get<std::string>(),
                                              {GammaMode::scale, GammaMode::auto_mode}, "gamma");
      if (hp.contains("C")) p.c = hp["C"].get<double>();
      if (hp.contains("degree")) p.degree = hp["degree"].get<int>();
      if (hp.contains("probability")) p.probability = hp["probability"].get<bool>();
      spec.params = p;
      break;
    }
    case Family::mlp: {
      require_known_keys(hp,
                         {"hidden_width", "hidden_depth", "activation", "solver", "alpha",
                          "learning_rate"},
                         "MLP");
      MlpParams p = spec.mlp();
      if (hp.contains("hidden_width")) p.hidden_width = hp["hidden_width"].get<int>();
      if (hp.contains("hidden_depth")) p.hidden_depth = hp["hidden_depth"].get<int>();
      if (hp.contains("activation"))
        p.activation = enum_from_string<Activation>(hp["activation"].get<std::string>(),
                                                    {Activation::relu, Activation::tanh},
                                                    "activation");
      if (hp.contains("solver"))
        p.solver = enum_from_string<Solver>(hp["solver"].get<std::string>(),
                                            {Solver::sgd, Solver::adam}, "solver");
      if (hp.contains("alpha")) p.alpha = hp["alpha"].get<double>();
      if (hp.contains("learning_rate"))
        p.learning_rate = enum_from_string<LrSchedule>(hp["learning_rate"].get<std::string>(),
                                                       {LrSchedule::constant,
                                                        LrSchedule::adaptive},
                                                       "learning_rate");
      spec.params = p;
      break;
    }
    case Family::tree:
    case Family::forest: {
      require_known_keys(hp, {"criterion", "max_depth", "max_features", "min_leaf", "min_split"},
                         to_string(family));
      TreeParams p = spec.tree();
      if (hp.contains("criterion"))
        p.criterion = enum_from_string<Criterion>(hp["criterion"].get<std::string>(),
                                                  {Criterion::gini, Criterion::entropy},
                                                  "criterion");
      if (hp.contains("max_depth")) p.max_depth = hp["max_depth"].get<int>();
      if (hp.contains("max_features"))
        p.max_features = enum_from_string<MaxFeatureRule>(
            hp["max_features"].get<std::string>(),
            {MaxFeatureRule::sqrt, MaxFeatureRule::log2}, "max_features");
      if (hp.contains("min_leaf")) p.min_leaf = hp["min_leaf"].get<int>();
      if (hp.contains("min_split")) p.min_split = hp["min_split"].get<int>();
      spec.params = p;
      break;
    }
  }
  validate_spec(spec);
  return spec;
}

inline json to_json(const LearnerSpec& spec) {
  return json{{"family", to_string(spec.family)},
              {"hyperparameters", hyperparameters_to_json(spec)},
              {"controls", to_json(spec.controls)}};
}

inline LearnerSpec spec_from_json(const json& j) {
  require_known_keys(j, {"family", "hyperparameters", "controls"}, "learner spec");
  const Family family = family_from_string(j.at("family").get<std::string>());
  TrainControls controls;
  if (j.contains("controls")) controls = train_controls_from_json(j["controls"]);
  return spec_from_json(family, j.value("hyperparameters", json::object()), controls);
}

// ---------------------------------------------------------------------------
// Preprocess model
// ---------------------------------------------------------------------------

inline json to_json(const PreprocessModel& m) {
  json cols = json::array();
  for (const auto& c : m.columns) {
    json jc{{"plan", column_plan_name(c.plan)}};
    if (c.plan == ColumnPlan::power_then_standardize) jc["lambda"] = c.lambda;
    if (c.plan != ColumnPlan::binary_passthrough) {
      jc["mean"] = c.mean;
      jc["stddev"] = c.stddev;
    }
    cols.push_back(jc);
  }
  return json{{"skew_threshold", m.skew_threshold}, {"columns", cols}, {"warnings", m.warnings}};
}

inline PreprocessModel preprocess_from_json(const json& j) {
  require_known_keys(j, {"skew_threshold", "columns", "warnings"}, "preprocess");
  PreprocessModel m;
  m.skew_threshold = j.at("skew_threshold").get<double>();
  m.warnings = j.value("warnings", std::vector<std::string>{});
  for (const auto& jc : j.at("columns")) {
    require_known_keys(jc, {"plan", "lambda", "mean", "stddev"}, "preprocess column");
    ColumnModel c;
    const std::string plan = jc.at("plan").get<std::string>();
    if (plan == "BINARY_PASSTHROUGH")
      c.plan = ColumnPlan::binary_passthrough;
    else if (plan == "STANDARDIZE")
      c.plan = ColumnPlan::standardize;
    else if (plan == "POWER_THEN_STANDARDIZE")
      c.plan = ColumnPlan::power_then_standardize;
    else
      throw SchemaError("unknown column plan '" + plan + "'");
    if (jc.contains("lambda")) c.lambda = jc["lambda"].get<double>();
    if (jc.contains("mean")) c.mean = jc["mean"].get<double>();
    if (jc.contains("stddev")) c.stddev = jc["stddev"].get<double>();
    m.columns.push_back(c);
  }
  return m;
}

// ---------------------------------------------------------------------------
// Fitted models
// ---------------------------------------------------------------------------

inline json to_json(const Matrix& m) {
  json rows = json::array();
  for (std::size_t r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (std::size_t c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(row);
  }
  return rows;
}

inline Matrix matrix_from_json(const json& j) {
  std::vector<std::vector<double>> rows;
  for (const auto& jr : j) rows.push_back(jr.get<std::vector<double>>());
  return Matrix::from_rows(rows);
}

inline json to_json(const TreeModel& t) {
  json nodes = json::array();
  for (const auto& n : t.nodes) {
    if (n.is_leaf)
      nodes.push_back(json{{"label", n.label}, {"fraction", n.fraction}, {"count", n.count}});
    else
      nodes.push_back(json{{"feature", n.feature},
                           {"threshold", n.threshold},
                           {"left", n.left},
                           {"right", n.right}});
  }
  return json{{"nodes", nodes}, {"n_features", t.n_features}};
}

inline TreeModel tree_from_json(const json& j) {
  require_known_keys(j, {"nodes", "n_features"}, "tree");
  TreeModel t;
  t.n_features = j.at("n_features").get<std::size_t>();
  for (const auto& jn : j.at("nodes")) {
    TreeNode n;
    if (jn.contains("feature")) {
      require_known_keys(jn, {"feature", "threshold", "left", "right"}, "tree node");
      n.is_leaf = false;
      n.feature = jn.at("feature").get<std::size_t>();
      n.threshold = jn.at("threshold").get<double>();
      n.left = jn.at("left").get<int>();
      n.right = jn.at("right").get<int>();
    } else {
      require_known_keys(jn, {"label", "fraction", "count"}, "tree leaf");
      n.is_leaf = true;
      n.label = jn.at("label").get<int>();
      n.fraction = jn.at("fraction").get<double>();
      n.count = jn.at("count").get<std::int64_t>();
    }
    t.nodes.push_back(n);
  }
  return t;
}

inline json to_json(const ForestModel& f) {
  json trees = json::array();
  for (const auto& t : f.trees) trees.push_back(to_json(t));
  return json{{"trees", trees},
              {"tree_seeds", f.tree_seeds},
              {"max_features", to_string(f.max_features)},
              {"n_features", f.n_features}};
}

inline ForestModel forest_from_json(const json& j) {
  require_known_keys(j, {"trees", "tree_seeds", "max_features", "n_features"}, "forest");
  ForestModel f;
  f.n_features = j.at("n_features").get<std::size_t>();
  f.tree_seeds = j.at("tree_seeds").get<std::vector<std::uint64_t>>();
  f.max_features = enum_from_string<MaxFeatureRule>(
      j.at("max_features").get<std::string>(), {MaxFeatureRule::sqrt, MaxFeatureRule::log2},
      "max_features");
  for (const auto& jt : j.at("trees")) f.trees.push_back(tree_from_json(jt));
  return f;
}

inline json to_json(const SvcModel& m) {
  return json{{"kernel",
               json{{"kind", to_string(m.kernel.kind)},
                    {"gamma", m.kernel.gamma},
                    {"degree", m.kernel.degree}}},
              {"gamma_mode", to_string(m.gamma_mode)},
              {"support_vectors", to_json(m.support_vectors)},
              {"dual_coef", m.dual_coef},
              {"bias", m.bias},
              {"platt", json{{"a", m.platt.a}, {"b", m.platt.b}}},
              {"converged", m.converged},
              {"n_features", m.n_features},
              {"warnings", m.warnings}};
}

inline SvcModel svc_from_json(const json& j) {
  require_known_keys(j,
                     {"kernel", "gamma_mode", "support_vectors", "dual_coef", "bias", "platt",
                      "converged", "n_features", "warnings"},
                     "svc");
  SvcModel m;
  const auto& jk = j.at("kernel");
  m.kernel.kind = enum_from_string<Kernel>(
      jk.at("kind").get<std::string>(),
      {Kernel::linear, Kernel::poly, Kernel::rbf, Kernel::sigmoid}, "kernel");
  m.kernel.gamma = jk.at("gamma").get<double>();
  m.kernel.degree = jk.at("degree").get<int>();
  m.gamma_mode = enum_from_string<GammaMode>(j.at("gamma_mode").get<std::string>(),
                                             {GammaMode::scale, GammaMode::auto_mode}, "gamma");
  m.support_vectors = matrix_from_json(j.at("support_vectors"));
  m.dual_coef = j.at("dual_coef").get<std::vector<double>>();
  m.bias = j.at("bias").get<double>();
  m.platt.a = j.at("platt").at("a").get<double>();
  m.platt.b = j.at("platt").at("b").get<double>();
  m.converged = j.at("converged").get<bool>();
  m.n_features = j.at("n_features").get<std::size_t>();
  m.warnings = j.value("warnings", std::vector<std::string>{});
  return m;
}

inline json to_json(const MlpModel& m) {
  return json{{"layer_sizes", m.layer_sizes},
              {"weights", m.weights},
              {"biases", m.biases},
              {"activation", to_string(m.activation)},
              {"n_features", m.n_features},
              {"epochs_run", m.epochs_run},
              {"final_loss", m.final_loss}};
}

inline MlpModel mlp_from_json(const json& j) {
  require_known_keys(
      j, {"layer_sizes", "weights", "biases", "activation", "n_features", "epochs_run",
          "final_loss"},
      "mlp");
  MlpModel m;
  m.layer_sizes = j.at("layer_sizes").get<std::vector<std::size_t>>();
  m.weights = j.at("weights").get<std::vector<std::vector<double>>>();
  m.biases = j.at("biases").get<std::vector<std::vector<double>>>();
  m.activation = enum_from_string<Activation>(j.at("activation").get<std::string>(),
                                              {Activation::relu, Activation::tanh},
                                              "activation");
  m.n_features = j.at("n_features").get<std::size_t>();
  m.epochs_run = j.at("epochs_run").get<int>();
  m.final_loss = j.at("final_loss").get<double>();
  return m;
}

/// Self-describing fitted-model document: family tag, hyperparameters, and
/// every learned parameter at full precision.
inline json to_json(const TrainedModel& tm) {
  json params;
  std::visit([&](const auto& m) { params = to_json(m); }, tm.impl);
  return json{{"family", to_string(tm.spec.family)},
              {"spec", to_json(tm.spec)},
              {"params", params},
              {"warnings", tm.warnings}};
}

inline TrainedModel trained_model_from_json(const json& j) {
  require_known_keys(j, {"family", "spec", "params", "warnings"}, "model");
  TrainedModel tm;
  tm.spec = spec_from_json(j.at("spec"));
  tm.warnings = j.value("warnings", std::vector<std::string>{});
  const Family family = family_from_string(j.at("family").get<std::string>());
  if (family != tm.spec.family) throw SchemaError("model family tag does not match its spec");
  switch (family) {
    case Family::tree: tm.impl = tree_from_json(j.at("params")); break;
    case Family::forest: tm.impl = forest_from_json(j.at("params")); break;
    case Family::svc: tm.impl = svc_from_json(j.at("params")); break;
    case Family::mlp: tm.impl = mlp_from_json(j.at("params")); break;
  }
  return tm;
}

// ---------------------------------------------------------------------------
// Cascade model
// ---------------------------------------------------------------------------

inline json to_json(const CascadeModel& m) {
  json stages = json::array();
  for (const auto& st : m.stages)
    stages.push_back(json{{"preprocess", to_json(st.preprocess)}, {"model", to_json(st.model)}});
  return json{{"mode", to_string(m.mode)},
              {"augmentation", to_string(m.augmentation)},
              {"base_features", m.base_features},
              {"input_dim", m.input_dim},
              {"stages", stages}};
}

inline CascadeModel cascade_from_json(const json& j) {
  require_known_keys(j, {"mode", "augmentation", "base_features", "input_dim", "stages"},
                     "cascade");
  CascadeModel m;
  const std::string mode = j.at("mode").get<std::string>();
  if (mode == "OOF_SAFE")
    m.mode = CascadeMode::oof_safe;
  else if (mode == "PAPER_FAITHFUL")
    m.mode = CascadeMode::paper_faithful;
  else
    throw SchemaError("unknown cascade mode '" + mode + "'");
  const std::string aug = j.at("augmentation").get<std::string>();
  if (aug == "PROBA")
    m.augmentation = Augmentation::proba;
  else if (aug == "LABEL")
    m.augmentation = Augmentation::label;
  else
    throw SchemaError("unknown augmentation '" + aug + "'");
  m.base_features = j.at("base_features").get<std::vector<std::size_t>>();
  m.input_dim = j.at("input_dim").get<std::size_t>();
  for (const auto& js : j.at("stages")) {
    require_known_keys(js, {"preprocess", "model"}, "cascade stage");
    CascadeStage st;
    st.preprocess = preprocess_from_json(js.at("preprocess"));
    st.model = trained_model_from_json(js.at("model"));
    m.stages.push_back(std::move(st));
  }
  return m;
}

// ---------------------------------------------------------------------------
// Cohort spec
// ---------------------------------------------------------------------------

inline json to_json(const CohortSpec& s) {
  return json{{"n", s.n},
              {"prevalence_target", s.prevalence_target},
              {"trauma_base_rate", s.trauma_base_rate},
              {"noise_scale", s.noise_scale},
              {"seed", s.seed},
              {"interaction_ace_threshold", s.interaction_ace_threshold},
              {"interaction_mdi_threshold", s.interaction_mdi_threshold},
              {"effects",
               json{{"ace_to_mdi", s.effects.ace_to_mdi},
                    {"ace_to_gad7", s.effects.ace_to_gad7},
                    {"ace_to_isi", s.effects.ace_to_isi},
                    {"ace_to_who5", s.effects.ace_to_who5},
                    {"mdi_x_ace", s.effects.mdi_x_ace},
                    {"self_harm_weight", s.effects.self_harm_weight}}}};
}

inline CohortSpec cohort_spec_from_json(const json& j) {
  require_known_keys(j,
                     {"n", "prevalence_target", "trauma_base_rate", "noise_scale", "seed",
                      "interaction_ace_threshold", "interaction_mdi_threshold", "effects"},
                     "cohort spec");
  CohortSpec s;
  if (j.contains("n")) s.n = j["n"].get<std::size_t>();
  if (j.contains("prevalence_target")) s.prevalence_target = j["prevalence_target"].get<double>();
  if (j.contains("trauma_base_rate")) s.trauma_base_rate = j["trauma_base_rate"].get<double>();
  if (j.contains("noise_scale")) s.noise_scale = j["noise_scale"].get<double>();
  if (j.contains("seed")) s.seed = j["seed"].get<std::uint64_t>();
  if (j.contains("interaction_ace_threshold"))
    s.interaction_ace_threshold = j["interaction_ace_threshold"].get<double>();
  if (j.contains("interaction_mdi_threshold"))
    s.interaction_mdi_threshold = j["interaction_mdi_threshold"].get<double>();
  if (j.contains("effects")) {
    const auto& je = j["effects"];
    require_known_keys(je,
                       {"ace_to_mdi", "ace_to_gad7", "ace_to_isi", "ace_to_who5", "mdi_x_ace",
                        "self_harm_weight"},
                       "effects");
    if (je.contains("ace_to_mdi")) s.effects.ace_to_mdi = je["ace_to_mdi"].get<double>();
    if (je.contains("ace_to_gad7")) s.effects.ace_to_gad7 = je["ace_to_gad7"].get<double>();
    if (je.contains("ace_to_isi")) s.effects.ace_to_isi = je["ace_to_isi"].get<double>();
    if (je.contains("ace_to_who5")) s.effects.ace_to_who5 = je["ace_to_who5"].get<double>();
    if (je.contains("mdi_x_ace")) s.effects.mdi_x_ace = je["mdi_x_ace"].get<double>();
    if (je.contains("self_harm_weight"))
      s.effects.self_harm_weight = je["self_harm_weight"].get<double>();
  }
  return s;
}

}  // namespace cascreen
