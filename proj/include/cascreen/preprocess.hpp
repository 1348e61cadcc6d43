#pragma once

#include <cmath>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "cascreen/error.hpp"
#include "cascreen/matrix.hpp"

namespace cascreen {

// ---------------------------------------------------------------------------
// Column statistics
// ---------------------------------------------------------------------------

inline double column_mean(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

/// Population standard deviation (divide by n).
inline double column_stddev(std::span<const double> v) {
  const double m = column_mean(v);
  double s2 = 0.0;
  for (double x : v) s2 += (x - m) * (x - m);
  return std::sqrt(s2 / static_cast<double>(v.size()));
}

/// Adjusted Fisher-Pearson skewness: g1 * sqrt(n(n-1)) / (n-2) with
/// g1 = m3 / m2^(3/2) over the biased sample moments.
inline double sample_skewness(std::span<const double> v) {
  const auto n = static_cast<double>(v.size());
  if (v.size() < 3) throw DataError("skewness needs at least 3 values");
  const double m = column_mean(v);
  double m2 = 0.0, m3 = 0.0;
  for (double x : v) {
    const double d = x - m;
    m2 += d * d;
    m3 += d * d * d;
  }
  m2 /= n;
  m3 /= n;
  if (m2 == 0.0) throw DataError("skewness undefined for a constant column");
  const double g1 = m3 / std::pow(m2, 1.5);
  return g1 * std::sqrt(n * (n - 1.0)) / (n - 2.0);
}

// ---------------------------------------------------------------------------
// Yeo-Johnson power transform
// ---------------------------------------------------------------------------

/// The Yeo-Johnson transform, valid for any real input (unlike Box-Cox).
inline double yeo_johnson(double lambda, double y) {
  if (y >= 0.0) {
    if (std::abs(lambda) < 1e-12) return std::log1p(y);
    return (std::pow(y + 1.0, lambda) - 1.0) / lambda;
  }
  if (std::abs(lambda - 2.0) < 1e-12) return -std::log1p(-y);
  return -(std::pow(1.0 - y, 2.0 - lambda) - 1.0) / (2.0 - lambda);
}

/// Profile log-likelihood of lambda under the normality objective:
/// -n/2 log(var of transformed values) + (lambda-1) * sum sgn(y) log(1+|y|).
inline double yeo_johnson_log_likelihood(double lambda, std::span<const double> v) {
  const auto n = static_cast<double>(v.size());
  double mean = 0.0;
  std::vector<double> t(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    t[i] = yeo_johnson(lambda, v[i]);
    mean += t[i];
  }
  mean /= n;
  double var = 0.0;
  for (double x : t) var += (x - mean) * (x - mean);
  var /= n;
  if (!(var > 0.0) || !std::isfinite(var)) return -std::numeric_limits<double>::infinity();
  double jacobian = 0.0;
  for (double y : v) {
    const double s = y >= 0.0 ? 1.0 : -1.0;
    jacobian += s * std::log1p(std::abs(y));
  }
  return -0.5 * n * std::log(var) + (lambda - 1.0) * jacobian;
}

/// Maximum-likelihood lambda by golden-section search on [-5, 5].
inline double fit_yeo_johnson(std::span<const double> v, double tol = 1e-4) {
  if (v.size() < 3) throw DataError("yeo-johnson fit needs at least 3 values");
  const double phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = -5.0, b = 5.0;
  double x1 = b - phi * (b - a);
  double x2 = a + phi * (b - a);
  double f1 = yeo_johnson_log_likelihood(x1, v);
  double f2 = yeo_johnson_log_likelihood(x2, v);
  while (b - a > tol) {
    if (f1 < f2) {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + phi * (b - a);
      f2 = yeo_johnson_log_likelihood(x2, v);
    } else {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - phi * (b - a);
      f1 = yeo_johnson_log_likelihood(x1, v);
    }
  }
  return 0.5 * (a + b);
}

// ---------------------------------------------------------------------------
// Fitted preprocessing model
// ---------------------------------------------------------------------------

enum class ColumnPlan { binary_passthrough, standardize, power_then_standardize };

inline const char* column_plan_name(ColumnPlan p) {
  switch (p) {
    case ColumnPlan::binary_passthrough: return "BINARY_PASSTHROUGH";
    case ColumnPlan::standardize: return "STANDARDIZE";
    case ColumnPlan::power_then_standardize: return "POWER_THEN_STANDARDIZE";
  }
  return "?";
}

struct ColumnModel {
  ColumnPlan plan = ColumnPlan::binary_passthrough;
  double lambda = std::numeric_limits<double>::quiet_NaN();  // power columns only
  double mean = 0.0;
  double stddev = 1.0;
};

struct PreprocessModel {
  std::vector<ColumnModel> columns;
  double skew_threshold = 0.75;
  std::vector<std::string> warnings;

  std::size_t n_columns() const { return columns.size(); }
};

/// Fits per-column plans on the training matrix. Binary columns pass through
/// untouched; non-binary columns whose |skewness| exceeds the threshold get a
/// Yeo-Johnson transform before standardization; the rest are standardized.
/// Constant columns fall back to passthrough with a recorded warning.
inline PreprocessModel fit_preprocess(const Matrix& x, const std::vector<bool>& is_binary,
                                      double skew_threshold = 0.75) {
  if (x.empty()) throw DataError("cannot fit preprocessing on an empty dataset");
  if (is_binary.size() != x.cols()) throw DataError("binary-flag count does not match columns");
  PreprocessModel model;
  model.skew_threshold = skew_threshold;
  model.columns.resize(x.cols());
  for (std::size_t c = 0; c < x.cols(); ++c) {
    ColumnModel& cm = model.columns[c];
    if (is_binary[c]) {
      cm.plan = ColumnPlan::binary_passthrough;
      continue;
    }
    const auto col = x.column(c);
    const double sd = column_stddev(col);
    if (sd == 0.0) {
      cm.plan = ColumnPlan::binary_passthrough;
      model.warnings.push_back("column " + std::to_string(c) +
                               " is constant; passed through unchanged");
      continue;
    }
    double skew = 0.0;
    if (col.size() >= 3) skew = sample_skewness(col);
    if (std::abs(skew) > skew_threshold) {
      cm.lambda = fit_yeo_johnson(col);
      std::vector<double> t(col.size());
      for (std::size_t i = 0; i < col.size(); ++i) t[i] = yeo_johnson(cm.lambda, col[i]);
      const double tsd = column_stddev(t);
      if (tsd == 0.0) {
        cm.plan = ColumnPlan::binary_passthrough;
        model.warnings.push_back("column " + std::to_string(c) +
                                 " is constant after power transform; passed through");
        continue;
      }
      cm.plan = ColumnPlan::power_then_standardize;
      cm.mean = column_mean(t);
      cm.stddev = tsd;
    } else {
      cm.plan = ColumnPlan::standardize;
      cm.mean = column_mean(col);
      cm.stddev = sd;
    }
  }
  return model;
}

/// Applies the fitted plans to one row. Uses only fitted statistics; never
/// refits on transform inputs.
inline std::vector<double> transform_row(const PreprocessModel& model,
                                         std::span<const double> row) {
  if (row.size() != model.columns.size())
    throw DataError("row has " + std::to_string(row.size()) + " columns, model expects " +
                    std::to_string(model.columns.size()));
  std::vector<double> out(row.size());
  for (std::size_t c = 0; c < row.size(); ++c) {
    const ColumnModel& cm = model.columns[c];
    switch (cm.plan) {
      case ColumnPlan::binary_passthrough:
        out[c] = row[c];
        break;
      case ColumnPlan::standardize:
        out[c] = (row[c] - cm.mean) / cm.stddev;
        break;
      case ColumnPlan::power_then_standardize:
        out[c] = (yeo_johnson(cm.lambda, row[c]) - cm.mean) / cm.stddev;
        break;
    }
  }
  return out;
}

inline Matrix transform_matrix(const PreprocessModel& model, const Matrix& x) {
  Matrix out(x.rows(), x.cols());
  for (std::size_t r = 0; r < x.rows(); ++r) {
    const auto t = transform_row(model, x.row(r));
    for (std::size_t c = 0; c < x.cols(); ++c) out(r, c) = t[c];
  }
  return out;
}

}  // namespace cascreen
