#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "cascreen/error.hpp"

namespace cascreen {

struct ConfusionMatrix {
  std::int64_t tp = 0;
  std::int64_t tn = 0;
  std::int64_t fp = 0;
  std::int64_t fn = 0;

  std::int64_t total() const { return tp + tn + fp + fn; }
  bool operator==(const ConfusionMatrix&) const = default;
};

inline ConfusionMatrix confusion(const std::vector<int>& y_true,
                                 const std::vector<int>& y_pred) {
  if (y_true.empty()) throw DataError("confusion matrix needs at least one example");
  if (y_true.size() != y_pred.size())
    throw DataError("label vectors differ in length");
  ConfusionMatrix cm;
  for (std::size_t i = 0; i < y_true.size(); ++i) {
    if (y_true[i] == 1)
      (y_pred[i] == 1 ? cm.tp : cm.fn)++;
    else
      (y_pred[i] == 1 ? cm.fp : cm.tn)++;
  }
  return cm;
}

/// Standard accuracy (tp+tn)/total. Undefined metrics come back empty and
/// must never be silently folded into averages as zeros.
inline std::optional<double> accuracy(const ConfusionMatrix& cm) {
  const auto t = cm.total();
  if (t == 0) return std::nullopt;
  return double(cm.tp + cm.tn) / double(t);
}

/// The literal printed form of the accuracy equation, tp/total, kept for
/// side-by-side comparison; see ExperimentConfig::paper_literal_accuracy.
inline std::optional<double> accuracy_paper_literal(const ConfusionMatrix& cm) {
  const auto t = cm.total();
  if (t == 0) return std::nullopt;
  return double(cm.tp) / double(t);
}

inline std::optional<double> sensitivity(const ConfusionMatrix& cm) {
  if (cm.tp + cm.fn == 0) return std::nullopt;
  return double(cm.tp) / double(cm.tp + cm.fn);
}

inline std::optional<double> specificity(const ConfusionMatrix& cm) {
  if (cm.tn + cm.fp == 0) return std::nullopt;
  return double(cm.tn) / double(cm.tn + cm.fp);
}

struct MetricTriple {
  std::optional<double> accuracy;
  std::optional<double> sensitivity;
  std::optional<double> specificity;
};

inline MetricTriple metric_triple(const ConfusionMatrix& cm, bool paper_literal = false) {
  return {paper_literal ? accuracy_paper_literal(cm) : accuracy(cm), sensitivity(cm),
          specificity(cm)};
}

/// Mean of the defined values; empty if none are defined. `skipped` counts
/// the undefined entries left out of the average.
inline std::optional<double> mean_defined(const std::vector<std::optional<double>>& xs,
                                          std::size_t* skipped = nullptr) {
  double sum = 0.0;
  std::size_t n = 0;
  for (const auto& x : xs) {
    if (x.has_value()) {
      sum += *x;
      ++n;
    }
  }
  if (skipped) *skipped = xs.size() - n;
  if (n == 0) return std::nullopt;
  return sum / static_cast<double>(n);
}

/// Max of the defined values; empty if none are defined.
inline std::optional<double> max_defined(const std::vector<std::optional<double>>& xs) {
  std::optional<double> best;
  for (const auto& x : xs)
    if (x.has_value() && (!best.has_value() || *x > *best)) best = x;
  return best;
}

}  // namespace cascreen
