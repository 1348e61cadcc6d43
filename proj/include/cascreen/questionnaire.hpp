#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "cascreen/error.hpp"

namespace cascreen {

// ---------------------------------------------------------------------------
// Instruments
// ---------------------------------------------------------------------------

enum class InstrumentId { ace16, who5, mdi, gad7, isi };

enum class Aggregation { sum, sum_times_4 };

struct InstrumentSpec {
  InstrumentId id;
  const char* name;
  int item_count;
  int item_min;
  int item_max;
  Aggregation aggregation;

  int score_min() const {
    return item_count * item_min * (aggregation == Aggregation::sum_times_4 ? 4 : 1);
  }
  int score_max() const {
    return item_count * item_max * (aggregation == Aggregation::sum_times_4 ? 4 : 1);
  }
};

/// The five standardized instruments: ACE-16 (binary, summed), WHO-5
/// (0..5, sum times 4 giving a 0..100 percentage), MDI (0..5, summed),
/// GAD-7 (0..3, summed), ISI (0..4, summed).
inline constexpr std::array<InstrumentSpec, 5> instruments = {{
    {InstrumentId::ace16, "ace16", 16, 0, 1, Aggregation::sum},
    {InstrumentId::who5, "who5", 5, 0, 5, Aggregation::sum_times_4},
    {InstrumentId::mdi, "mdi", 12, 0, 5, Aggregation::sum},
    {InstrumentId::gad7, "gad7", 7, 0, 3, Aggregation::sum},
    {InstrumentId::isi, "isi", 7, 0, 4, Aggregation::sum},
}};

inline const InstrumentSpec& instrument(InstrumentId id) {
  return instruments[static_cast<std::size_t>(id)];
}

// ---------------------------------------------------------------------------
// Records
// ---------------------------------------------------------------------------

/// The six ACE items that are individually usable as model features.
/// They occupy the first six slots of ParticipantRecord::ace_items; the
/// remaining ten items contribute only to the cumulative score and may carry
/// caller-configured column names.
inline constexpr std::array<const char*, 6> canonical_ace_items = {
    "emotional_abuse",        "emotional_neglect", "domestic_violence_witness",
    "parent_mental_illness",  "peer_rejection",    "parents_fighting",
};

inline constexpr std::array<const char*, 6> behavioral_items = {
    "self_harm",           "irrational_decisions", "focus_difficulty",
    "relationship_issues", "physical_violence",    "violent_family",
};

struct ParticipantRecord {
  std::string id;
  std::array<int, 16> ace_items{};  // canonical six first, then the ten extras
  std::array<int, 5> who5_items{};
  std::array<int, 12> mdi_items{};
  std::array<int, 7> gad7_items{};
  std::array<int, 7> isi_items{};
  std::array<int, 6> behavioral{};  // order of behavioral_items
  int label = 0;                    // suicidal behavior present

  bool operator==(const ParticipantRecord&) const = default;
};

struct Violation {
  std::string field;
  std::string value;
  std::string allowed;
};

// ---------------------------------------------------------------------------
// Feature vector
// ---------------------------------------------------------------------------

inline constexpr std::size_t feature_count = 17;

/// Fixed, globally ordered names of the 17 model features.
inline constexpr std::array<const char*, feature_count> feature_names = {
    "emotional_abuse",
    "emotional_neglect",
    "domestic_violence_witness",
    "parent_mental_illness",
    "peer_rejection",
    "parents_fighting",
    "ace_cumulative",
    "who5_total",
    "gad7_total",
    "mdi_total",
    "isi_total",
    "self_harm",
    "irrational_decisions",
    "focus_difficulty",
    "relationship_issues",
    "physical_violence",
    "violent_family",
};

/// Which features are 0/1 indicators (the six canonical ACE items and the
/// six behavioral items). Instrument totals are the five non-binary columns.
inline constexpr std::array<bool, feature_count> feature_is_binary = {
    true, true, true, true, true, true,           // canonical ACE items
    false, false, false, false, false,            // totals
    true, true, true, true, true, true,           // behavioral items
};

inline int feature_index(const std::string& name) {
  for (std::size_t i = 0; i < feature_count; ++i)
    if (name == feature_names[i]) return static_cast<int>(i);
  return -1;
}

struct FeatureVector {
  std::array<double, feature_count> values{};
  int label = 0;

  bool operator==(const FeatureVector&) const = default;
};

// ---------------------------------------------------------------------------
// Operations
// ---------------------------------------------------------------------------

namespace detail {
template <std::size_t N>
void check_items(const std::array<int, N>& items, const InstrumentSpec& spec,
                 const char* prefix, std::vector<Violation>& out) {
  for (std::size_t i = 0; i < N; ++i) {
    if (items[i] < spec.item_min || items[i] > spec.item_max) {
      out.push_back({std::string(prefix) + "[" + std::to_string(i) + "]",
                     std::to_string(items[i]),
                     std::to_string(spec.item_min) + ".." + std::to_string(spec.item_max)});
    }
  }
}
}  // namespace detail

/// Checks every item of a record against its instrument's range. Violations
/// are data, not failures: an empty list means the record is valid.
inline std::vector<Violation> validate_record(const ParticipantRecord& rec) {
  std::vector<Violation> out;
  detail::check_items(rec.ace_items, instrument(InstrumentId::ace16), "ace", out);
  detail::check_items(rec.who5_items, instrument(InstrumentId::who5), "who5", out);
  detail::check_items(rec.mdi_items, instrument(InstrumentId::mdi), "mdi", out);
  detail::check_items(rec.gad7_items, instrument(InstrumentId::gad7), "gad7", out);
  detail::check_items(rec.isi_items, instrument(InstrumentId::isi), "isi", out);
  for (std::size_t i = 0; i < rec.behavioral.size(); ++i) {
    if (rec.behavioral[i] < 0 || rec.behavioral[i] > 1)
      out.push_back({behavioral_items[i], std::to_string(rec.behavioral[i]), "0..1"});
  }
  if (rec.label < 0 || rec.label > 1)
    out.push_back({"suicidal_behavior", std::to_string(rec.label), "0..1"});
  return out;
}

/// Instrument score: sum of the answers, times four for WHO-5.
inline int score_instrument(const InstrumentSpec& spec, const std::vector<int>& answers) {
  if (answers.size() != static_cast<std::size_t>(spec.item_count))
    throw DataError(std::string(spec.name) + ": expected " + std::to_string(spec.item_count) +
                    " answers, got " + std::to_string(answers.size()));
  int sum = 0;
  for (int a : answers) {
    if (a < spec.item_min || a > spec.item_max)
      throw DataError(std::string(spec.name) + ": answer " + std::to_string(a) +
                      " outside " + std::to_string(spec.item_min) + ".." +
                      std::to_string(spec.item_max));
    sum += a;
  }
  return spec.aggregation == Aggregation::sum_times_4 ? 4 * sum : sum;
}

/// Encodes a valid record into the fixed 17-feature order. Throws DataError
/// listing the violations if the record fails validation.
inline FeatureVector encode_record(const ParticipantRecord& rec) {
  const auto violations = validate_record(rec);
  if (!violations.empty()) {
    std::string msg = "record " + rec.id + " failed validation:";
    for (const auto& v : violations)
      msg += " [" + v.field + "=" + v.value + " allowed " + v.allowed + "]";
    throw DataError(msg);
  }
  FeatureVector fv;
  for (std::size_t i = 0; i < 6; ++i) fv.values[i] = rec.ace_items[i];
  int ace_total = 0;
  for (int a : rec.ace_items) ace_total += a;
  fv.values[6] = ace_total;
  fv.values[7] = score_instrument(instrument(InstrumentId::who5),
                                  {rec.who5_items.begin(), rec.who5_items.end()});
  fv.values[8] = score_instrument(instrument(InstrumentId::gad7),
                                  {rec.gad7_items.begin(), rec.gad7_items.end()});
  fv.values[9] = score_instrument(instrument(InstrumentId::mdi),
                                  {rec.mdi_items.begin(), rec.mdi_items.end()});
  fv.values[10] = score_instrument(instrument(InstrumentId::isi),
                                   {rec.isi_items.begin(), rec.isi_items.end()});
  for (std::size_t i = 0; i < 6; ++i) fv.values[11 + i] = rec.behavioral[i];
  fv.label = rec.label;
  return fv;
}

}  // namespace cascreen
