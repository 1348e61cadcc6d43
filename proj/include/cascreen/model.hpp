#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "cascreen/forest.hpp"
#include "cascreen/learner.hpp"
#include "cascreen/matrix.hpp"
#include "cascreen/mlp.hpp"
#include "cascreen/svc.hpp"
#include "cascreen/tree.hpp"

namespace cascreen {

/// A fitted learner of any family behind one predict surface.
/// Labels follow one fixed rule everywhere: 1 iff probability >= 0.5.
struct TrainedModel {
  LearnerSpec spec;
  std::variant<TreeModel, ForestModel, SvcModel, MlpModel> impl;
  std::vector<std::string> warnings;

  double predict_proba(std::span<const double> x) const {
    return std::visit([&](const auto& m) { return m.predict_proba(x); }, impl);
  }
  int predict(std::span<const double> x) const { return predict_proba(x) >= 0.5 ? 1 : 0; }

  std::size_t n_features() const {
    return std::visit([](const auto& m) { return m.n_features; }, impl);
  }
};

inline TrainedModel train_model(const LearnerSpec& spec, const Matrix& x,
                                const std::vector<int>& y, std::uint64_t seed,
                                int jobs = 1) {
  TrainedModel tm;
  tm.spec = spec;
  switch (spec.family) {
    case Family::tree:
      tm.impl = train_tree(x, y, spec);
      break;
    case Family::forest:
      tm.impl = train_forest(x, y, spec, seed, jobs);
      break;
    case Family::svc: {
      auto m = train_svc(x, y, spec);
      tm.warnings = m.warnings;
      tm.impl = std::move(m);
      break;
    }
    case Family::mlp:
      tm.impl = train_mlp(x, y, spec, seed);
      break;
  }
  return tm;
}

}  // namespace cascreen
