#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "cascreen/dataset.hpp"
#include "cascreen/questionnaire.hpp"
#include "cascreen/rng.hpp"

namespace cascreen {

/// Named effect sizes of the generative model. The four ace_to_* values
/// shift instrument item means for traumatized participants and also weight
/// the corresponding normalized totals in the label score, so zeroing every
/// effect makes the label independent of the features by construction.
struct EffectSizes {
  double ace_to_mdi = 1.4;
  double ace_to_gad7 = 0.9;
  double ace_to_isi = 1.1;
  double ace_to_who5 = -1.3;  // wellbeing drops with trauma
  double mdi_x_ace = 2.4;     // interaction bonus when both run high
  double self_harm_weight = 1.6;

  bool operator==(const EffectSizes&) const = default;
};

struct CohortSpec {
  std::size_t n = 400;
  double prevalence_target = 0.30;
  double trauma_base_rate = 0.35;
  EffectSizes effects;
  double noise_scale = 0.6;
  std::uint64_t seed = 20240001;
  // The interaction term fires only when both scores exceed these raw totals.
  double interaction_ace_threshold = 6.0;
  double interaction_mdi_threshold = 30.0;

  bool operator==(const CohortSpec&) const = default;
};

struct GenerationMeta {
  double realized_prevalence = 0.0;
  double intercept = 0.0;
  std::vector<std::string> warnings;
};

namespace detail {

inline int clipped_normal_item(Rng& rng, double mean, double sd, int lo, int hi) {
  const double v = std::round(rng.normal(mean, sd));
  if (v < lo) return lo;
  if (v > hi) return hi;
  return static_cast<int>(v);
}

inline double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

}  // namespace detail

/// Synthetic cohort with a latent trauma factor: trauma raises ACE item
/// rates, shifts every instrument toward distress, and drives the label
/// through the weighted mental-health totals, a self-harm term, an
/// ACE-by-depression interaction, and Gaussian noise. The sigmoid intercept
/// is calibrated by bisection so the expected prevalence hits the target.
/// Rows come from per-row generators seeded with mix(seed, row), so the
/// cohort is reproducible row by row.
inline std::vector<ParticipantRecord> generate(const CohortSpec& spec,
                                               GenerationMeta* meta = nullptr) {
  if (spec.n < 20) throw DataError("cohort size must be at least 20");
  if (spec.prevalence_target <= 0.0 || spec.prevalence_target >= 1.0)
    throw DataError("prevalence target must lie in (0, 1)");
  if (spec.trauma_base_rate < 0.0 || spec.trauma_base_rate > 1.0)
    throw DataError("trauma base rate must lie in [0, 1]");

  const EffectSizes& e = spec.effects;
  std::vector<ParticipantRecord> records(spec.n);
  std::vector<double> score(spec.n), label_u(spec.n);

  for (std::size_t r = 0; r < spec.n; ++r) {
    Rng rng(mix(spec.seed, r));
    ParticipantRecord& rec = records[r];
    rec.id = "synth-" + std::to_string(r + 1);
    const double t = rng.bernoulli(spec.trauma_base_rate) ? 1.0 : 0.0;
    for (auto& item : rec.ace_items) item = rng.bernoulli(0.1 + 0.5 * t) ? 1 : 0;
    for (auto& item : rec.who5_items)
      item = detail::clipped_normal_item(rng, 3.2 + e.ace_to_who5 * t, 1.3, 0, 5);
    for (auto& item : rec.mdi_items)
      item = detail::clipped_normal_item(rng, 1.3 + e.ace_to_mdi * t, 1.3, 0, 5);
    for (auto& item : rec.gad7_items)
      item = detail::clipped_normal_item(rng, 0.9 + e.ace_to_gad7 * t, 0.9, 0, 3);
    for (auto& item : rec.isi_items)
      item = detail::clipped_normal_item(rng, 1.2 + e.ace_to_isi * t, 1.1, 0, 4);
    const double behavior_rates[6] = {0.06 + 0.30 * t, 0.15 + 0.25 * t, 0.20 + 0.30 * t,
                                      0.25 + 0.25 * t, 0.05 + 0.15 * t, 0.08 + 0.40 * t};
    for (std::size_t b = 0; b < 6; ++b)
      rec.behavioral[b] = rng.bernoulli(behavior_rates[b]) ? 1 : 0;

    int ace_total = 0;
    for (int a : rec.ace_items) ace_total += a;
    int mdi_total = 0;
    for (int a : rec.mdi_items) mdi_total += a;
    int gad7_total = 0;
    for (int a : rec.gad7_items) gad7_total += a;
    int isi_total = 0;
    for (int a : rec.isi_items) isi_total += a;
    int who5_total = 0;
    for (int a : rec.who5_items) who5_total += a;
    who5_total *= 4;

    const double interaction = (ace_total >= spec.interaction_ace_threshold &&
                                mdi_total >= spec.interaction_mdi_threshold)
                                   ? e.mdi_x_ace
                                   : 0.0;
    score[r] = 3.0 * (e.ace_to_mdi * (mdi_total / 60.0) + e.ace_to_gad7 * (gad7_total / 21.0) +
                      e.ace_to_isi * (isi_total / 28.0) + e.ace_to_who5 * (who5_total / 100.0)) +
               e.self_harm_weight * rec.behavioral[0] + interaction +
               rng.normal(0.0, spec.noise_scale);
    label_u[r] = rng.uniform();
  }

  // Bisect the intercept so mean sigmoid(score + c) equals the target.
  double lo = -40.0, hi = 40.0;
  for (int iter = 0; iter < 200; ++iter) {
    const double mid = 0.5 * (lo + hi);
    double mean = 0.0;
    for (double s : score) mean += detail::sigmoid(s + mid);
    mean /= static_cast<double>(spec.n);
    (mean < spec.prevalence_target ? lo : hi) = mid;
    if (hi - lo < 1e-11) break;
  }
  const double intercept = 0.5 * (lo + hi);

  std::size_t positives = 0;
  for (std::size_t r = 0; r < spec.n; ++r) {
    records[r].label = label_u[r] < detail::sigmoid(score[r] + intercept) ? 1 : 0;
    positives += records[r].label;
  }
  const double realized = static_cast<double>(positives) / static_cast<double>(spec.n);
  if (meta) {
    meta->realized_prevalence = realized;
    meta->intercept = intercept;
    if (std::abs(realized - spec.prevalence_target) > 0.15)
      meta->warnings.push_back("realized prevalence " + std::to_string(realized) +
                               " drifted more than 0.15 from the target");
  }
  return records;
}

/// Convenience: generate and encode into a Dataset.
inline Dataset generate_dataset(const CohortSpec& spec, GenerationMeta* meta = nullptr) {
  Dataset ds;
  ds.records = generate(spec, meta);
  for (const auto& rec : ds.records) ds.rows.push_back(encode_record(rec));
  return ds;
}

}  // namespace cascreen
