#pragma once

#include <string>
#include <variant>
#include <vector>

#include "cascreen/error.hpp"

namespace cascreen {

enum class Family { svc, mlp, tree, forest };

enum class Kernel { linear, poly, rbf, sigmoid };
enum class GammaMode { scale, auto_mode };
enum class Activation { relu, tanh };
enum class Solver { sgd, adam };
enum class LrSchedule { constant, adaptive };
enum class Criterion { gini, entropy };
enum class MaxFeatureRule { sqrt, log2 };

// --- name tables -----------------------------------------------------------

inline const char* to_string(Family f) {
  switch (f) {
    case Family::svc: return "SVC";
    case Family::mlp: return "MLP";
    case Family::tree: return "TREE";
    case Family::forest: return "FOREST";
  }
  return "?";
}
inline const char* to_string(Kernel k) {
  switch (k) {
    case Kernel::linear: return "linear";
    case Kernel::poly: return "poly";
    case Kernel::rbf: return "rbf";
    case Kernel::sigmoid: return "sigmoid";
  }
  return "?";
}
inline const char* to_string(GammaMode g) {
  return g == GammaMode::scale ? "scale" : "auto";
}
inline const char* to_string(Activation a) { return a == Activation::relu ? "relu" : "tanh"; }
inline const char* to_string(Solver s) { return s == Solver::sgd ? "sgd" : "adam"; }
inline const char* to_string(LrSchedule s) {
  return s == LrSchedule::constant ? "constant" : "adaptive";
}
inline const char* to_string(Criterion c) { return c == Criterion::gini ? "gini" : "entropy"; }
inline const char* to_string(MaxFeatureRule r) {
  return r == MaxFeatureRule::sqrt ? "sqrt" : "log2";
}

template <class E>
E enum_from_string(const std::string& s, std::initializer_list<E> values,
                   const char* what) {
  for (E v : values)
    if (s == to_string(v)) return v;
  throw SchemaError(std::string("unknown ") + what + " '" + s + "'");
}

// --- hyperparameters (exactly the grid-visible names and domains) ----------

struct SvcParams {
  Kernel kernel = Kernel::rbf;
  GammaMode gamma = GammaMode::scale;
  double c = 2.0;
  int degree = 2;  // affects only the poly kernel but is accepted everywhere
  bool probability = true;
};

struct MlpParams {
  int hidden_width = 64;
  int hidden_depth = 3;
  Activation activation = Activation::relu;
  Solver solver = Solver::sgd;
  double alpha = 3e-4;
  LrSchedule learning_rate = LrSchedule::adaptive;
};

/// Shared by TREE and FOREST; the max-feature rule is accepted for a
/// standalone tree but subsets candidate features only inside a forest.
struct TreeParams {
  Criterion criterion = Criterion::gini;
  int max_depth = 50;
  MaxFeatureRule max_features = MaxFeatureRule::sqrt;
  int min_leaf = 5;
  int min_split = 2;
};

/// Training internals that are not grid hyperparameters. All defaults are
/// config-overridable; the test hooks exist so a degenerate forest can be
/// compared against a single tree.
struct TrainControls {
  int n_trees = 100;
  bool bootstrap = true;       // test hook when disabled
  bool all_features = false;   // test hook: every feature is a split candidate

  int max_epochs = 500;
  int batch_size = 32;
  double sgd_learning_rate = 0.01;
  double adam_learning_rate = 0.001;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_epsilon = 1e-8;
  double plateau_tol = 1e-4;   // adaptive schedule: halve lr after
  int plateau_patience = 10;   // this many epochs without improvement
  double early_stop_tol = 1e-6;

  double svc_tol = 1e-3;
  long long svc_max_updates_per_row = 10 * 1000;  // pair-update cap = this * n

  bool operator==(const TrainControls&) const = default;
};

struct LearnerSpec {
  Family family = Family::svc;
  std::variant<SvcParams, MlpParams, TreeParams> params;
  TrainControls controls;

  /// Table 5 optima per family.
  static LearnerSpec defaults(Family f) {
    LearnerSpec s;
    s.family = f;
    switch (f) {
      case Family::svc:
        s.params = SvcParams{};  // rbf, scale, C=2, degree=2
        break;
      case Family::mlp:
        s.params = MlpParams{};  // relu, sgd, alpha=3e-4, 64x3, adaptive
        break;
      case Family::tree:
        s.params = TreeParams{};  // gini, depth 50, leaf 5, split 2
        break;
      case Family::forest:
        s.params = TreeParams{Criterion::entropy, 2, MaxFeatureRule::sqrt, 8, 50};
        break;
    }
    return s;
  }

  const SvcParams& svc() const { return std::get<SvcParams>(params); }
  const MlpParams& mlp() const { return std::get<MlpParams>(params); }
  const TreeParams& tree() const { return std::get<TreeParams>(params); }

  /// True when training consumes the seed (MLP init and batch order, forest
  /// bootstraps). SVC and a standalone tree are seed-free.
  bool seed_consuming() const { return family == Family::mlp || family == Family::forest; }
};

// --- domain validation ------------------------------------------------------

namespace detail {
template <class T>
bool one_of(T v, std::initializer_list<T> allowed) {
  for (T a : allowed)
    if (v == a) return true;
  return false;
}
}  // namespace detail

/// Enforces the listed value domains for every grid hyperparameter.
inline void validate_spec(const LearnerSpec& spec) {
  const auto fail = [&](const std::string& msg) {
    throw DataError(std::string(to_string(spec.family)) + " spec: " + msg);
  };
  switch (spec.family) {
    case Family::svc: {
      const auto& p = spec.svc();
      if (!detail::one_of(p.c, {0.5, 1.0, 2.0})) fail("C must be one of 0.5, 1, 2");
      if (!detail::one_of(p.degree, {2, 3, 4})) fail("degree must be one of 2, 3, 4");
      if (!p.probability) fail("probability must be true");
      break;
    }
    case Family::mlp: {
      const auto& p = spec.mlp();
      if (!detail::one_of(p.hidden_width, {32, 64, 128}))
        fail("hidden width must be one of 32, 64, 128");
      if (!detail::one_of(p.hidden_depth, {2, 3, 4}))
        fail("hidden depth must be one of 2, 3, 4");
      if (!detail::one_of(p.alpha, {1e-4, 3e-4, 0.05}))
        fail("alpha must be one of 1e-4, 3e-4, 0.05");
      break;
    }
    case Family::tree:
    case Family::forest: {
      const auto& p = spec.tree();
      if (!detail::one_of(p.max_depth, {2, 3, 5, 10, 50}))
        fail("max depth must be one of 2, 3, 5, 10, 50");
      if (!detail::one_of(p.min_leaf, {1, 5, 8, 10}))
        fail("min leaf must be one of 1, 5, 8, 10");
      if (!detail::one_of(p.min_split, {2, 3, 50, 100}))
        fail("min split must be one of 2, 3, 50, 100");
      break;
    }
  }
  if (spec.controls.n_trees < 1) fail("n_trees must be positive");
  if (spec.controls.batch_size < 1) fail("batch size must be positive");
  if (spec.controls.max_epochs < 1) fail("max epochs must be positive");
}

// --- grid enumeration --------------------------------------------------------

/// Full Cartesian hyperparameter grid for a family, enumerated with the first
/// listed hyperparameter outermost and values in listed order. Tie-breaking
/// by grid index therefore matches "row order, values left to right".
inline std::vector<LearnerSpec> family_grid(Family family,
                                            const TrainControls& controls = {}) {
  std::vector<LearnerSpec> grid;
  LearnerSpec s;
  s.family = family;
  s.controls = controls;
  switch (family) {
    case Family::svc:
      for (Kernel k : {Kernel::linear, Kernel::poly, Kernel::rbf, Kernel::sigmoid})
        for (GammaMode g : {GammaMode::scale, GammaMode::auto_mode})
          for (double c : {0.5, 1.0, 2.0})
            for (int d : {2, 3, 4}) {
              s.params = SvcParams{k, g, c, d, true};
              grid.push_back(s);
            }
      break;
    case Family::mlp:
      for (int w : {32, 64, 128})
        for (int depth : {2, 3, 4})
          for (Activation a : {Activation::relu, Activation::tanh})
            for (Solver sol : {Solver::sgd, Solver::adam})
              for (double alpha : {1e-4, 3e-4, 0.05})
                for (LrSchedule lr : {LrSchedule::constant, LrSchedule::adaptive}) {
                  s.params = MlpParams{w, depth, a, sol, alpha, lr};
                  grid.push_back(s);
                }
      break;
    case Family::tree:
    case Family::forest:
      for (Criterion c : {Criterion::gini, Criterion::entropy})
        for (int depth : {2, 3, 5, 10, 50})
          for (MaxFeatureRule mf : {MaxFeatureRule::sqrt, MaxFeatureRule::log2})
            for (int leaf : {1, 5, 8, 10})
              for (int split : {2, 3, 50, 100}) {
                s.params = TreeParams{c, depth, mf, leaf, split};
                grid.push_back(s);
              }
      break;
  }
  return grid;
}

}  // namespace cascreen
