#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "cascreen/error.hpp"
#include "cascreen/learner.hpp"
#include "cascreen/matrix.hpp"

namespace cascreen {

// ---------------------------------------------------------------------------
// Kernels
// ---------------------------------------------------------------------------

/// Kernel with gamma resolved to a number. gamma "scale" is
/// 1 / (d * Var(X_train)) with the variance taken over every entry of the
/// training matrix; "auto" is 1 / d.
struct ResolvedKernel {
  Kernel kind = Kernel::rbf;
  double gamma = 1.0;
  int degree = 2;
};

inline double resolve_gamma(GammaMode mode, const Matrix& x) {
  const double d = static_cast<double>(x.cols());
  if (mode == GammaMode::auto_mode) return 1.0 / d;
  double mean = 0.0;
  for (std::size_t r = 0; r < x.rows(); ++r)
    for (std::size_t c = 0; c < x.cols(); ++c) mean += x(r, c);
  const double count = static_cast<double>(x.rows() * x.cols());
  mean /= count;
  double var = 0.0;
  for (std::size_t r = 0; r < x.rows(); ++r)
    for (std::size_t c = 0; c < x.cols(); ++c) {
      const double dv = x(r, c) - mean;
      var += dv * dv;
    }
  var /= count;
  if (var <= 0.0) return 1.0 / d;  // degenerate all-constant matrix
  return 1.0 / (d * var);
}

inline ResolvedKernel resolve_kernel(const SvcParams& p, const Matrix& x_train) {
  return {p.kernel, resolve_gamma(p.gamma, x_train), p.degree};
}

inline double kernel_value(const ResolvedKernel& k, std::span<const double> u,
                           std::span<const double> v) {
  if (u.size() != v.size()) throw DataError("kernel inputs differ in dimension");
  switch (k.kind) {
    case Kernel::linear: {
      double dot = 0.0;
      for (std::size_t i = 0; i < u.size(); ++i) dot += u[i] * v[i];
      return dot;
    }
    case Kernel::poly: {
      double dot = 0.0;
      for (std::size_t i = 0; i < u.size(); ++i) dot += u[i] * v[i];
      return std::pow(k.gamma * dot + 1.0, k.degree);
    }
    case Kernel::rbf: {
      double dist2 = 0.0;
      for (std::size_t i = 0; i < u.size(); ++i) {
        const double d = u[i] - v[i];
        dist2 += d * d;
      }
      return std::exp(-k.gamma * dist2);
    }
    case Kernel::sigmoid: {
      double dot = 0.0;
      for (std::size_t i = 0; i < u.size(); ++i) dot += u[i] * v[i];
      return std::tanh(k.gamma * dot + 1.0);
    }
  }
  return 0.0;
}

// ---------------------------------------------------------------------------
// SMO dual solver
// ---------------------------------------------------------------------------

struct SmoResult {
  std::vector<double> alpha;  // box-constrained dual variables, 0 <= a <= C
  double bias = 0.0;
  bool converged = true;
  long long pair_updates = 0;
};

/// Dual objective sum(a) - 1/2 sum_ij a_i a_j y_i y_j K_ij.
inline double dual_objective(const Matrix& k, const std::vector<int>& y,
                             const std::vector<double>& alpha) {
  const std::size_t n = alpha.size();
  double obj = 0.0;
  for (std::size_t i = 0; i < n; ++i) obj += alpha[i];
  for (std::size_t i = 0; i < n; ++i) {
    if (alpha[i] == 0.0) continue;
    for (std::size_t j = 0; j < n; ++j)
      obj -= 0.5 * alpha[i] * alpha[j] * y[i] * y[j] * k(i, j);
  }
  return obj;
}

/// Two-variable SMO over a precomputed kernel matrix. Each round picks the
/// worst KKT violator as the first index and pairs it with the index
/// maximizing |E_i - E_j|, falling back to a linear scan when the analytic
/// step cannot move.
///
/// `tol` is the KKT certificate reported through `converged`. The loop
/// itself drives violations down to tol * refine: stopping right at the
/// certificate leaves a dual-objective gap of roughly tol^2 (a few 1e-6 at
/// tol 1e-3), and the optimality contract wants the dual within 1e-6, so the
/// solver keeps polishing well past the certificate before checking it.
inline SmoResult smo_solve(const Matrix& k, const std::vector<int>& y, double c,
                           double tol, long long max_pair_updates, double refine = 1e-3) {
  const double inner_tol = tol * refine;
  const std::size_t n = y.size();
  SmoResult res;
  res.alpha.assign(n, 0.0);
  std::vector<double> u(n, 0.0);  // u_k = sum_j a_j y_j K_jk (no bias)
  double b = 0.0;

  const auto error_of = [&](std::size_t i) { return u[i] + b - y[i]; };
  // Projected KKT residual |a - clip(a - yE, 0, C)|: continuous in alpha, so
  // a multiplier sitting one ulp away from its bound does not read as a
  // violation it cannot fix.
  const auto violation_of = [&](std::size_t i) {
    const double r = y[i] * error_of(i);
    return std::abs(res.alpha[i] - std::clamp(res.alpha[i] - r, 0.0, c));
  };

  // Analytic step on the pair (i, j); returns false when no progress is made.
  const auto take_step = [&](std::size_t i, std::size_t j) {
    if (i == j) return false;
    const double ai = res.alpha[i], aj = res.alpha[j];
    const double yi = y[i], yj = y[j];
    const double ei = error_of(i), ej = error_of(j);
    double lo, hi;
    if (y[i] != y[j]) {
      lo = std::max(0.0, aj - ai);
      hi = std::min(c, c + aj - ai);
    } else {
      lo = std::max(0.0, ai + aj - c);
      hi = std::min(c, ai + aj);
    }
    if (lo >= hi) return false;
    const double eta = k(i, i) + k(j, j) - 2.0 * k(i, j);
    double aj_new;
    if (eta > 0.0) {
      aj_new = aj + yj * (ei - ej) / eta;
      aj_new = std::clamp(aj_new, lo, hi);
    } else {
      // Non-concave direction (possible for the sigmoid kernel): compare the
      // exact dual-objective change at both box ends using the cached margins.
      const double s = yi * yj;
      const auto objective_delta = [&](double t) {
        const double dj2 = t - aj;
        const double di2 = -s * dj2;
        return (di2 + dj2) - di2 * yi * u[i] - dj2 * yj * u[j] -
               0.5 * (di2 * di2 * k(i, i) + 2.0 * di2 * dj2 * yi * yj * k(i, j) +
                      dj2 * dj2 * k(j, j));
      };
      const double at_lo = objective_delta(lo);
      const double at_hi = objective_delta(hi);
      if (std::max(at_lo, at_hi) <= 1e-12) return false;
      aj_new = at_lo > at_hi ? lo : hi;
    }
    if (std::abs(aj_new - aj) < 1e-12) return false;
    double ai_new = ai + yi * yj * (aj - aj_new);
    ai_new = std::clamp(ai_new, 0.0, c);  // guards float dust
    const double di = (ai_new - ai) * yi;
    const double dj = (aj_new - aj) * yj;
    for (std::size_t t = 0; t < n; ++t) u[t] += di * k(i, t) + dj * k(j, t);
    const double b1 = b - ei - di * k(i, i) - dj * k(i, j);
    const double b2 = b - ej - di * k(i, j) - dj * k(j, j);
    if (ai_new > 0.0 && ai_new < c)
      b = b1;
    else if (aj_new > 0.0 && aj_new < c)
      b = b2;
    else
      b = 0.5 * (b1 + b2);
    res.alpha[i] = ai_new;
    res.alpha[j] = aj_new;
    ++res.pair_updates;
    return true;
  };

  // One round = pick the worst violator, pair it with the index maximizing
  // |E_i - E_j|, fall back to a linear partner scan, and only if the worst
  // violator is completely stuck walk the remaining violators in descending
  // order (rare, so the common round costs two O(n) passes).
  const auto try_index = [&](std::size_t i) {
    std::size_t jbest = i;
    double gap = -1.0;
    const double ei = error_of(i);
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i) continue;
      const double g = std::abs(ei - error_of(j));
      if (g > gap) {
        gap = g;
        jbest = j;
      }
    }
    if (jbest != i && take_step(i, jbest)) return true;
    for (std::size_t j = 0; j < n; ++j)
      if (j != i && j != jbest && take_step(i, j)) return true;
    return false;
  };
  while (res.pair_updates < max_pair_updates) {
    std::size_t worst = n;
    double worst_violation = inner_tol;
    for (std::size_t i = 0; i < n; ++i) {
      const double v = violation_of(i);
      if (v > worst_violation) {
        worst_violation = v;
        worst = i;
      }
    }
    if (worst == n) break;  // every violation inside the polish target
    if (try_index(worst)) continue;
    std::vector<std::pair<double, std::size_t>> order;
    for (std::size_t i = 0; i < n; ++i) {
      const double v = violation_of(i);
      if (v > inner_tol && i != worst) order.emplace_back(-v, i);
    }
    std::sort(order.begin(), order.end());
    bool progressed = false;
    for (const auto& [neg_v, i] : order)
      if (try_index(i)) {
        progressed = true;
        break;
      }
    if (!progressed) break;  // no pair can move; accept the current point
  }

  // Center the bias inside the optimal KKT interval. Bound membership uses a
  // small tolerance: multipliers converge to the box edge without landing on
  // it exactly, and counting them as interior would poison the interval.
  const double edge = 1e-9 * c;
  double lo_bound = -std::numeric_limits<double>::infinity();
  double hi_bound = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < n; ++i) {
    const double cand = y[i] - u[i];
    const bool at_zero = res.alpha[i] <= edge;
    const bool at_c = res.alpha[i] >= c - edge;
    const bool upper = (y[i] == 1 && at_c) || (y[i] == -1 && at_zero);
    const bool lower = (y[i] == 1 && at_zero) || (y[i] == -1 && at_c);
    if (!at_zero && !at_c) {
      lo_bound = std::max(lo_bound, cand);
      hi_bound = std::min(hi_bound, cand);
    } else if (upper) {
      hi_bound = std::min(hi_bound, cand);
    } else if (lower) {
      lo_bound = std::max(lo_bound, cand);
    }
  }
  if (std::isfinite(lo_bound) && std::isfinite(hi_bound))
    res.bias = 0.5 * (lo_bound + hi_bound);
  else if (std::isfinite(lo_bound))
    res.bias = lo_bound;
  else if (std::isfinite(hi_bound))
    res.bias = hi_bound;
  else
    res.bias = b;

  double remaining = 0.0;
  b = res.bias;
  for (std::size_t i = 0; i < n; ++i) remaining = std::max(remaining, violation_of(i));
  res.converged = remaining <= tol;
  return res;
}

// ---------------------------------------------------------------------------
// Platt scaling
// ---------------------------------------------------------------------------

struct PlattParams {
  double a = -1.0;
  double b = 0.0;
};

/// Newton fit of P(y=1|f) = 1 / (1 + exp(A f + B)) with the prior-adjusted
/// targets t+ = (N+ + 1)/(N+ + 2), t- = 1/(N- + 2) regularizing the
/// log-loss, after Lin, Weng & Keerthi's robust formulation.
inline PlattParams platt_fit(const std::vector<double>& decision, const std::vector<int>& label) {
  const std::size_t n = decision.size();
  double prior1 = 0.0;
  for (int y : label) prior1 += y == 1;
  const double prior0 = static_cast<double>(n) - prior1;
  const double hi = (prior1 + 1.0) / (prior1 + 2.0);
  const double lo = 1.0 / (prior0 + 2.0);
  std::vector<double> t(n);
  for (std::size_t i = 0; i < n; ++i) t[i] = label[i] == 1 ? hi : lo;

  double a = 0.0;
  double b = std::log((prior0 + 1.0) / (prior1 + 1.0));
  const auto objective = [&](double pa, double pb) {
    double obj = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double z = decision[i] * pa + pb;
      // log(1 + e^-|z|) + max(z, 0) keeps the log-loss finite.
      obj += z >= 0.0 ? t[i] * z + std::log1p(std::exp(-z))
                      : (t[i] - 1.0) * z + std::log1p(std::exp(z));
    }
    return obj;
  };

  double best = objective(a, b);
  const int max_iter = 100;
  for (int iter = 0; iter < max_iter; ++iter) {
    double g1 = 0.0, g2 = 0.0, h11 = 1e-12, h22 = 1e-12, h21 = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double z = decision[i] * a + b;
      double p, q;
      if (z >= 0.0) {
        const double e = std::exp(-z);
        p = e / (1.0 + e);
        q = 1.0 / (1.0 + e);
      } else {
        const double e = std::exp(z);
        p = 1.0 / (1.0 + e);
        q = e / (1.0 + e);
      }
      const double d1 = t[i] - p;
      const double d2 = p * q;
      g1 += decision[i] * d1;
      g2 += d1;
      h11 += decision[i] * decision[i] * d2;
      h22 += d2;
      h21 += decision[i] * d2;
    }
    if (std::abs(g1) < 1e-5 && std::abs(g2) < 1e-5) break;
    const double det = h11 * h22 - h21 * h21;
    const double da = -(h22 * g1 - h21 * g2) / det;
    const double db = -(-h21 * g1 + h11 * g2) / det;
    const double gd = g1 * da + g2 * db;
    double step = 1.0;
    bool moved = false;
    while (step >= 1e-10) {
      const double na = a + step * da;
      const double nb = b + step * db;
      const double obj = objective(na, nb);
      if (obj < best + 1e-4 * step * gd) {
        a = na;
        b = nb;
        best = obj;
        moved = true;
        break;
      }
      step /= 2.0;
    }
    if (!moved) break;  // line search failed; current point is good enough
  }
  return {a, b};
}

// ---------------------------------------------------------------------------
// Trained model
// ---------------------------------------------------------------------------

struct SvcModel {
  ResolvedKernel kernel;
  GammaMode gamma_mode = GammaMode::scale;
  Matrix support_vectors;            // rows with alpha > 0
  std::vector<double> dual_coef;     // alpha_i * y_i per support vector
  double bias = 0.0;
  PlattParams platt;
  bool converged = true;
  std::size_t n_features = 0;
  std::vector<std::string> warnings;

  double decision(std::span<const double> x) const {
    if (x.size() != n_features) throw DataError("input has wrong dimension for svc");
    double f = bias;
    for (std::size_t s = 0; s < support_vectors.rows(); ++s)
      f += dual_coef[s] * kernel_value(kernel, support_vectors.row(s), x);
    return f;
  }
  double predict_proba(std::span<const double> x) const {
    const double z = platt.a * decision(x) + platt.b;
    if (z >= 0.0) return std::exp(-z) / (1.0 + std::exp(-z));
    return 1.0 / (1.0 + std::exp(z));
  }
};

namespace detail {

/// Deterministic stratified 80/20 split: within each class, in row order,
/// every fifth row goes to the calibration side.
inline void platt_split(const std::vector<int>& y, std::vector<std::size_t>& train_idx,
                        std::vector<std::size_t>& calib_idx) {
  std::size_t seen_pos = 0, seen_neg = 0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    std::size_t& seen = y[i] == 1 ? seen_pos : seen_neg;
    if (seen % 5 == 4)
      calib_idx.push_back(i);
    else
      train_idx.push_back(i);
    ++seen;
  }
}

inline Matrix kernel_matrix(const ResolvedKernel& k, const Matrix& x) {
  Matrix m(x.rows(), x.rows());
  for (std::size_t i = 0; i < x.rows(); ++i) {
    for (std::size_t j = 0; j <= i; ++j) {
      const double v = kernel_value(k, x.row(i), x.row(j));
      m(i, j) = v;
      m(j, i) = v;
    }
  }
  return m;
}

inline SvcModel fit_svc_raw(const Matrix& x, const std::vector<int>& y01,
                            const SvcParams& params, const TrainControls& controls) {
  std::vector<int> y(y01.size());
  for (std::size_t i = 0; i < y01.size(); ++i) y[i] = y01[i] == 1 ? 1 : -1;
  const ResolvedKernel kern = resolve_kernel(params, x);
  const Matrix k = kernel_matrix(kern, x);
  const long long cap = controls.svc_max_updates_per_row * static_cast<long long>(y.size());
  const SmoResult smo = smo_solve(k, y, params.c, controls.svc_tol, cap);

  SvcModel model;
  model.kernel = kern;
  model.gamma_mode = params.gamma;
  model.bias = smo.bias;
  model.converged = smo.converged;
  model.n_features = x.cols();
  std::vector<std::size_t> sv;
  for (std::size_t i = 0; i < smo.alpha.size(); ++i)
    if (smo.alpha[i] > 0.0) sv.push_back(i);
  model.support_vectors = x.take_rows(sv);
  model.dual_coef.resize(sv.size());
  for (std::size_t s = 0; s < sv.size(); ++s)
    model.dual_coef[s] = smo.alpha[sv[s]] * y[sv[s]];
  if (!smo.converged)
    model.warnings.push_back("smo hit the pair-update cap before meeting tolerance");
  return model;
}

}  // namespace detail

/// Trains the SVC: SMO on an internal stratified 80% split, Platt scaling on
/// the held-out 20%, then a final SMO refit on all rows keeping the fitted
/// (A, B). Falls back to in-sample calibration when the split is too small
/// to hold both classes.
inline SvcModel train_svc(const Matrix& x, const std::vector<int>& y01,
                          const LearnerSpec& spec) {
  validate_spec(spec);
  if (x.rows() != y01.size()) throw TrainingError("row/label count mismatch");
  std::size_t pos = 0;
  for (int v : y01) pos += v == 1;
  if (pos == 0 || pos == y01.size())
    throw TrainingError("svc needs both classes in the training data");

  const SvcParams& params = spec.svc();
  std::vector<std::size_t> train_idx, calib_idx;
  detail::platt_split(y01, train_idx, calib_idx);

  std::size_t calib_pos = 0;
  for (std::size_t i : calib_idx) calib_pos += y01[i] == 1;
  std::size_t train_pos = 0;
  for (std::size_t i : train_idx) train_pos += y01[i] == 1;
  const bool split_usable = calib_idx.size() >= 2 && train_pos > 0 &&
                            train_pos < train_idx.size();

  SvcModel model = detail::fit_svc_raw(x, y01, params, spec.controls);
  if (split_usable) {
    const Matrix x80 = x.take_rows(train_idx);
    std::vector<int> y80(train_idx.size());
    for (std::size_t i = 0; i < train_idx.size(); ++i) y80[i] = y01[train_idx[i]];
    const SvcModel sub = detail::fit_svc_raw(x80, y80, params, spec.controls);
    std::vector<double> dec(calib_idx.size());
    std::vector<int> lab(calib_idx.size());
    for (std::size_t i = 0; i < calib_idx.size(); ++i) {
      dec[i] = sub.decision(x.row(calib_idx[i]));
      lab[i] = y01[calib_idx[i]];
    }
    model.platt = platt_fit(dec, lab);
    for (const auto& w : sub.warnings) model.warnings.push_back("calibration split: " + w);
  } else {
    std::vector<double> dec(x.rows());
    std::vector<int> lab(y01);
    for (std::size_t i = 0; i < x.rows(); ++i) dec[i] = model.decision(x.row(i));
    model.platt = platt_fit(dec, lab);
    model.warnings.push_back("platt calibrated in-sample: too few rows for a held-out split");
  }
  return model;
}

}  // namespace cascreen
