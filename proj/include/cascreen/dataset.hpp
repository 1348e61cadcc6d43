#pragma once

#include <algorithm>
#include <cstdint>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "cascreen/error.hpp"
#include "cascreen/matrix.hpp"
#include "cascreen/questionnaire.hpp"
#include "cascreen/rng.hpp"

namespace cascreen {

enum class LoadMode { strict, impute_mode };

// ---------------------------------------------------------------------------
// CSV schema
// ---------------------------------------------------------------------------
//
// Column order is fixed: id, the six canonical ACE items (prefixed "ace_"),
// ten extra ACE items, who5_q1..q5, mdi_q01..q12, gad7_q1..q7, isi_q1..q7,
// the six behavioral items, suicidal_behavior. The ten extra-ACE column
// names are caller-configurable; every other header cell must match exactly.

inline constexpr std::size_t csv_column_count = 55;
inline constexpr std::size_t ace_extra_first_column = 7;   // after id + 6 canonical
inline constexpr std::size_t ace_extra_count = 10;

inline std::vector<std::string> default_ace_extra_names() {
  std::vector<std::string> names;
  for (int i = 1; i <= static_cast<int>(ace_extra_count); ++i) {
    std::ostringstream os;
    os << "ace_extra_" << (i < 10 ? "0" : "") << i;
    names.push_back(os.str());
  }
  return names;
}

/// Full header for the given extra-ACE names (defaults if empty).
inline std::vector<std::string> csv_header(std::vector<std::string> extra_names = {}) {
  if (extra_names.empty()) extra_names = default_ace_extra_names();
  if (extra_names.size() != ace_extra_count)
    throw SchemaError("expected " + std::to_string(ace_extra_count) + " extra ACE names");
  std::vector<std::string> h;
  h.push_back("id");
  for (const char* n : canonical_ace_items) h.push_back(std::string("ace_") + n);
  for (const auto& n : extra_names) h.push_back(n);
  for (int i = 1; i <= 5; ++i) h.push_back("who5_q" + std::to_string(i));
  for (int i = 1; i <= 12; ++i)
    h.push_back(i < 10 ? "mdi_q0" + std::to_string(i) : "mdi_q" + std::to_string(i));
  for (int i = 1; i <= 7; ++i) h.push_back("gad7_q" + std::to_string(i));
  for (int i = 1; i <= 7; ++i) h.push_back("isi_q" + std::to_string(i));
  for (const char* n : behavioral_items) h.push_back(n);
  h.push_back("suicidal_behavior");
  return h;
}

// ---------------------------------------------------------------------------
// Dataset
// ---------------------------------------------------------------------------

struct Dataset {
  std::vector<ParticipantRecord> records;  // raw answers, post-imputation
  std::vector<FeatureVector> rows;         // encoded 17-feature rows
  std::vector<std::string> ace_extra_names = default_ace_extra_names();

  std::size_t n() const { return rows.size(); }
  std::size_t positive_count() const {
    std::size_t c = 0;
    for (const auto& r : rows) c += r.label == 1;
    return c;
  }
  double prevalence() const { return n() == 0 ? 0.0 : double(positive_count()) / double(n()); }

  std::vector<int> labels() const {
    std::vector<int> y(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) y[i] = rows[i].label;
    return y;
  }

  Matrix feature_matrix() const {
    Matrix m(rows.size(), feature_count);
    for (std::size_t i = 0; i < rows.size(); ++i)
      for (std::size_t j = 0; j < feature_count; ++j) m(i, j) = rows[i].values[j];
    return m;
  }

  Dataset take_rows(const std::vector<std::size_t>& idx) const {
    Dataset out;
    out.ace_extra_names = ace_extra_names;
    for (std::size_t i : idx) {
      out.records.push_back(records[i]);
      out.rows.push_back(rows[i]);
    }
    return out;
  }

  bool operator==(const Dataset&) const = default;
};

// ---------------------------------------------------------------------------
// CSV I/O
// ---------------------------------------------------------------------------

namespace detail {

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cur;
  for (char ch : line) {
    if (ch == ',') {
      cells.push_back(cur);
      cur.clear();
    } else if (ch != '\r') {
      cur += ch;
    }
  }
  cells.push_back(cur);
  return cells;
}

inline std::optional<int> parse_int_cell(const std::string& cell) {
  if (cell.empty()) return std::nullopt;
  std::size_t pos = 0;
  int value = 0;
  try {
    value = std::stoi(cell, &pos);
  } catch (const std::exception&) {
    throw DataError("non-integer cell '" + cell + "'");
  }
  if (pos != cell.size()) throw DataError("non-integer cell '" + cell + "'");
  return value;
}

inline ParticipantRecord record_from_cells(const std::string& id, const std::vector<int>& v) {
  ParticipantRecord rec;
  rec.id = id;
  std::size_t p = 0;
  for (auto& x : rec.ace_items) x = v[p++];
  for (auto& x : rec.who5_items) x = v[p++];
  for (auto& x : rec.mdi_items) x = v[p++];
  for (auto& x : rec.gad7_items) x = v[p++];
  for (auto& x : rec.isi_items) x = v[p++];
  for (auto& x : rec.behavioral) x = v[p++];
  rec.label = v[p++];
  return rec;
}

}  // namespace detail

/// Loads the fixed-schema cohort CSV. STRICT rejects any missing or invalid
/// cell with its line number; IMPUTE_MODE fills missing integer cells with
/// the column mode computed over complete rows (ties to the lowest value).
inline Dataset load_csv(std::istream& in, LoadMode mode) {
  std::string line;
  if (!std::getline(in, line)) throw DataError("empty file: no header row");
  const auto header = detail::split_csv_line(line);
  const auto expected = csv_header();
  if (header.size() != csv_column_count)
    throw SchemaError("expected " + std::to_string(csv_column_count) + " columns, got " +
                      std::to_string(header.size()));
  std::vector<std::string> extra_names;
  for (std::size_t c = 0; c < csv_column_count; ++c) {
    const bool is_extra = c >= ace_extra_first_column &&
                          c < ace_extra_first_column + ace_extra_count;
    if (is_extra) {
      if (header[c].empty()) throw SchemaError("empty extra-ACE column name at column " +
                                               std::to_string(c + 1));
      extra_names.push_back(header[c]);
    } else if (header[c] != expected[c]) {
      throw SchemaError("header column " + std::to_string(c + 1) + ": expected '" +
                        expected[c] + "', got '" + header[c] + "'");
    }
  }
  for (std::size_t a = 0; a < extra_names.size(); ++a)
    for (std::size_t b = a + 1; b < extra_names.size(); ++b)
      if (extra_names[a] == extra_names[b])
        throw SchemaError("duplicate extra-ACE column name '" + extra_names[a] + "'");

  // Parse into id + 54 optional integer cells per row.
  struct RawRow {
    std::string id;
    std::vector<std::optional<int>> cells;
    std::size_t line_no;
  };
  std::vector<RawRow> raw;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto cells = detail::split_csv_line(line);
    if (cells.size() != csv_column_count)
      throw DataError("line " + std::to_string(line_no) + ": expected " +
                      std::to_string(csv_column_count) + " cells, got " +
                      std::to_string(cells.size()));
    RawRow row;
    row.id = cells[0];
    row.line_no = line_no;
    for (std::size_t c = 1; c < csv_column_count; ++c) {
      std::optional<int> v;
      try {
        v = detail::parse_int_cell(cells[c]);
      } catch (const DataError& e) {
        throw DataError("line " + std::to_string(line_no) + ", column " + expected[c] +
                        ": " + e.what());
      }
      if (!v.has_value() && mode == LoadMode::strict)
        throw DataError("line " + std::to_string(line_no) + ", column " +
                        (c >= ace_extra_first_column && c < ace_extra_first_column + ace_extra_count
                             ? extra_names[c - ace_extra_first_column]
                             : expected[c]) +
                        ": missing value");
      row.cells.push_back(v);
    }
    raw.push_back(std::move(row));
  }
  if (raw.empty()) throw DataError("empty dataset: no data rows");

  if (mode == LoadMode::impute_mode) {
    const std::size_t ncells = csv_column_count - 1;
    std::vector<std::map<int, std::size_t>> counts(ncells);
    for (const auto& row : raw) {
      const bool complete = std::all_of(row.cells.begin(), row.cells.end(),
                                        [](const auto& c) { return c.has_value(); });
      if (!complete) continue;
      for (std::size_t c = 0; c < ncells; ++c) ++counts[c][*row.cells[c]];
    }
    for (auto& row : raw) {
      for (std::size_t c = 0; c < ncells; ++c) {
        if (row.cells[c].has_value()) continue;
        if (counts[c].empty())
          throw DataError("line " + std::to_string(row.line_no) +
                          ": cannot impute, no complete rows");
        // std::map iterates keys ascending, so ties resolve to the lowest value.
        auto best = counts[c].begin();
        for (auto it = counts[c].begin(); it != counts[c].end(); ++it)
          if (it->second > best->second) best = it;
        row.cells[c] = best->first;
      }
    }
  }

  Dataset ds;
  ds.ace_extra_names = extra_names;
  for (const auto& row : raw) {
    std::vector<int> v(row.cells.size());
    for (std::size_t c = 0; c < v.size(); ++c) v[c] = *row.cells[c];
    auto rec = detail::record_from_cells(row.id, v);
    try {
      ds.rows.push_back(encode_record(rec));
    } catch (const DataError& e) {
      throw DataError("line " + std::to_string(row.line_no) + ": " + e.what());
    }
    ds.records.push_back(std::move(rec));
  }
  return ds;
}

/// Writes the dataset back out in the same schema it was loaded with.
inline void write_csv(const Dataset& ds, std::ostream& out) {
  const auto header = csv_header(ds.ace_extra_names);
  for (std::size_t c = 0; c < header.size(); ++c)
    out << header[c] << (c + 1 == header.size() ? "\n" : ",");
  for (const auto& rec : ds.records) {
    out << rec.id;
    for (int v : rec.ace_items) out << ',' << v;
    for (int v : rec.who5_items) out << ',' << v;
    for (int v : rec.mdi_items) out << ',' << v;
    for (int v : rec.gad7_items) out << ',' << v;
    for (int v : rec.isi_items) out << ',' << v;
    for (int v : rec.behavioral) out << ',' << v;
    out << ',' << rec.label << "\n";
  }
}

// ---------------------------------------------------------------------------
// Fold assignment
// ---------------------------------------------------------------------------

struct FoldAssignment {
  int k = 0;
  std::vector<int> assignment;  // per-row fold index in 0..k-1
  std::uint64_t seed = 0;

  std::vector<std::size_t> test_indices(int fold) const {
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < assignment.size(); ++i)
      if (assignment[i] == fold) idx.push_back(i);
    return idx;
  }
  std::vector<std::size_t> train_indices(int fold) const {
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < assignment.size(); ++i)
      if (assignment[i] != fold) idx.push_back(i);
    return idx;
  }
};

/// Shuffles each class separately with the seeded generator, then deals the
/// classes round-robin across folds. The deal pointer carries over from the
/// positives into the negatives so total fold sizes stay within one of each
/// other while each class remains evenly spread.
inline FoldAssignment stratified_kfold(const std::vector<int>& labels, int k,
                                       std::uint64_t seed) {
  if (k < 2) throw DataError("k must be at least 2");
  std::vector<std::size_t> pos, neg;
  for (std::size_t i = 0; i < labels.size(); ++i) (labels[i] == 1 ? pos : neg).push_back(i);
  if (pos.size() < static_cast<std::size_t>(k))
    throw DataError("positive class has " + std::to_string(pos.size()) +
                    " members, fewer than k=" + std::to_string(k));
  if (neg.size() < static_cast<std::size_t>(k))
    throw DataError("negative class has " + std::to_string(neg.size()) +
                    " members, fewer than k=" + std::to_string(k));
  Rng rng(seed);
  rng.shuffle(pos);
  rng.shuffle(neg);
  FoldAssignment fa;
  fa.k = k;
  fa.seed = seed;
  fa.assignment.assign(labels.size(), -1);
  int next_fold = 0;
  for (std::size_t i : pos) {
    fa.assignment[i] = next_fold;
    next_fold = (next_fold + 1) % k;
  }
  for (std::size_t i : neg) {
    fa.assignment[i] = next_fold;
    next_fold = (next_fold + 1) % k;
  }
  return fa;
}

inline FoldAssignment stratified_kfold(const Dataset& ds, int k, std::uint64_t seed) {
  return stratified_kfold(ds.labels(), k, seed);
}

/// Plain shuffled k-fold, no class balancing. Folds can lack a class
/// entirely; training errors then surface as such.
inline FoldAssignment unstratified_kfold(std::size_t n, int k, std::uint64_t seed) {
  if (k < 2) throw DataError("k must be at least 2");
  if (n < static_cast<std::size_t>(k)) throw DataError("fewer rows than folds");
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  Rng rng(seed);
  rng.shuffle(order);
  FoldAssignment fa;
  fa.k = k;
  fa.seed = seed;
  fa.assignment.assign(n, -1);
  int next_fold = 0;
  for (std::size_t i : order) {
    fa.assignment[i] = next_fold;
    next_fold = (next_fold + 1) % k;
  }
  return fa;
}

inline Dataset load_csv_string(const std::string& text, LoadMode mode) {
  std::istringstream in(text);
  return load_csv(in, mode);
}

}  // namespace cascreen
