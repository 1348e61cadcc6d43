#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "cascreen/error.hpp"
#include "cascreen/learner.hpp"
#include "cascreen/matrix.hpp"
#include "cascreen/rng.hpp"

namespace cascreen {

namespace detail {

/// Four-lane dot product; the independent accumulators let the compiler
/// vectorize the reduction without reassociating a single serial sum.
inline double dot(const double* a, const double* b, std::size_t n) {
  double s0 = 0.0, s1 = 0.0, s2 = 0.0, s3 = 0.0;
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    s0 += a[i] * b[i];
    s1 += a[i + 1] * b[i + 1];
    s2 += a[i + 2] * b[i + 2];
    s3 += a[i + 3] * b[i + 3];
  }
  double s = (s0 + s1) + (s2 + s3);
  for (; i < n; ++i) s += a[i] * b[i];
  return s;
}

}  // namespace detail

/// Feedforward binary classifier: `hidden_depth` equal-width hidden layers
/// and a single sigmoid output unit. Weights are row-major (out x in).
struct MlpModel {
  std::vector<std::size_t> layer_sizes;       // input, hidden..., 1
  std::vector<std::vector<double>> weights;   // per layer transition
  std::vector<std::vector<double>> biases;
  Activation activation = Activation::relu;
  std::size_t n_features = 0;
  int epochs_run = 0;
  double final_loss = 0.0;

  double predict_proba(std::span<const double> x) const {
    if (x.size() != n_features) throw DataError("input has wrong dimension for mlp");
    std::vector<double> a(x.begin(), x.end()), next;
    for (std::size_t l = 0; l < weights.size(); ++l) {
      const std::size_t out = layer_sizes[l + 1], in = layer_sizes[l];
      next.assign(out, 0.0);
      for (std::size_t o = 0; o < out; ++o) {
        const double z =
            biases[l][o] + detail::dot(weights[l].data() + o * in, a.data(), in);
        if (l + 1 == weights.size())
          next[o] = 1.0 / (1.0 + std::exp(-z));
        else
          next[o] = activation == Activation::relu ? (z > 0.0 ? z : 0.0) : std::tanh(z);
      }
      a.swap(next);
    }
    return a[0];
  }
};

namespace detail {

/// Forward/backward pass over a batch. Returns the batch loss
/// (mean binary cross-entropy plus alpha/2 * ||W||^2) and fills gradients
/// laid out like the model's weights and biases. Shared by training and the
/// finite-difference checks so the two always evaluate the same function.
/// Activations are held batch-major and each weight row sweeps the whole
/// batch while it is hot in cache.
inline double mlp_loss_and_gradients(const MlpModel& m, const Matrix& x,
                                     const std::vector<int>& y,
                                     const std::vector<std::size_t>& batch, double alpha,
                                     std::vector<std::vector<double>>* grad_w,
                                     std::vector<std::vector<double>>* grad_b) {
  const std::size_t layers = m.weights.size();
  const std::size_t nb = batch.size();
  if (grad_w) {
    grad_w->resize(layers);
    grad_b->resize(layers);
    for (std::size_t l = 0; l < layers; ++l) {
      (*grad_w)[l].assign(m.weights[l].size(), 0.0);
      (*grad_b)[l].assign(m.biases[l].size(), 0.0);
    }
  }
  const double inv_n = 1.0 / static_cast<double>(nb);

  std::vector<std::vector<double>> act(layers + 1);  // act[l]: nb x layer_sizes[l]
  act[0].resize(nb * m.layer_sizes[0]);
  for (std::size_t s = 0; s < nb; ++s) {
    const auto row = x.row(batch[s]);
    std::copy(row.begin(), row.end(), act[0].begin() + s * m.layer_sizes[0]);
  }
  for (std::size_t l = 0; l < layers; ++l) {
    const std::size_t out = m.layer_sizes[l + 1], in = m.layer_sizes[l];
    act[l + 1].assign(nb * out, 0.0);
    const bool last = l + 1 == layers;
    for (std::size_t o = 0; o < out; ++o) {
      const double* __restrict w = m.weights[l].data() + o * in;
      const double bias = m.biases[l][o];
      for (std::size_t s = 0; s < nb; ++s) {
        const double z = bias + dot(w, act[l].data() + s * in, in);
        // The output layer keeps raw logits; the loss lives in logit space.
        act[l + 1][s * out + o] =
            last ? z : (m.activation == Activation::relu ? (z > 0.0 ? z : 0.0) : std::tanh(z));
      }
    }
  }

  double loss = 0.0;
  for (std::size_t s = 0; s < nb; ++s) {
    const double z = act[layers][s];
    const double target = static_cast<double>(y[batch[s]]);
    // log(1+e^z) - y z, evaluated stably.
    loss += (z >= 0.0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z))) - target * z;
  }
  loss *= inv_n;
  for (std::size_t l = 0; l < layers; ++l) {
    double w2 = 0.0;
    for (double w : m.weights[l]) w2 += w * w;
    loss += 0.5 * alpha * w2;
  }
  if (!grad_w) return loss;

  std::vector<std::vector<double>> delta(layers + 1);
  delta[layers].resize(nb);
  for (std::size_t s = 0; s < nb; ++s) {
    const double z = act[layers][s];
    const double p = 1.0 / (1.0 + std::exp(-z));
    delta[layers][s] = (p - static_cast<double>(y[batch[s]])) * inv_n;
  }
  for (std::size_t l = layers; l-- > 0;) {
    const std::size_t out = m.layer_sizes[l + 1], in = m.layer_sizes[l];
    auto& gw = (*grad_w)[l];
    auto& gb = (*grad_b)[l];
    for (std::size_t o = 0; o < out; ++o) {
      double* __restrict gwo = gw.data() + o * in;
      double gbo = 0.0;
      for (std::size_t s = 0; s < nb; ++s) {
        const double d = delta[l + 1][s * out + o];
        gbo += d;
        const double* __restrict a = act[l].data() + s * in;
        for (std::size_t i = 0; i < in; ++i) gwo[i] += d * a[i];
      }
      gb[o] += gbo;
    }
    if (l == 0) break;
    delta[l].assign(nb * in, 0.0);
    for (std::size_t o = 0; o < out; ++o) {
      const double* __restrict w = m.weights[l].data() + o * in;
      for (std::size_t s = 0; s < nb; ++s) {
        const double d = delta[l + 1][s * out + o];
        double* __restrict dl = delta[l].data() + s * in;
        for (std::size_t i = 0; i < in; ++i) dl[i] += d * w[i];
      }
    }
    const double* __restrict a_in = act[l].data();
    double* __restrict dl = delta[l].data();
    for (std::size_t i = 0; i < nb * in; ++i) {
      const double a = a_in[i];
      dl[i] *= m.activation == Activation::relu ? (a > 0.0 ? 1.0 : 0.0) : (1.0 - a * a);
    }
  }
  for (std::size_t l = 0; l < layers; ++l)
    for (std::size_t i = 0; i < m.weights[l].size(); ++i)
      (*grad_w)[l][i] += alpha * m.weights[l][i];
  return loss;
}

inline double mlp_full_loss(const MlpModel& m, const Matrix& x, const std::vector<int>& y,
                            double alpha) {
  std::vector<std::size_t> all(x.rows());
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
  return mlp_loss_and_gradients(m, x, y, all, alpha, nullptr, nullptr);
}

}  // namespace detail

/// Glorot-uniform initialization with the given seed; biases start at zero.
inline MlpModel init_mlp(std::size_t n_features, const MlpParams& params, Rng& rng) {
  MlpModel m;
  m.activation = params.activation;
  m.n_features = n_features;
  m.layer_sizes.push_back(n_features);
  for (int l = 0; l < params.hidden_depth; ++l)
    m.layer_sizes.push_back(static_cast<std::size_t>(params.hidden_width));
  m.layer_sizes.push_back(1);
  for (std::size_t l = 0; l + 1 < m.layer_sizes.size(); ++l) {
    const std::size_t in = m.layer_sizes[l], out = m.layer_sizes[l + 1];
    const double r = std::sqrt(6.0 / static_cast<double>(in + out));
    std::vector<double> w(in * out);
    for (auto& v : w) v = rng.uniform(-r, r);
    m.weights.push_back(std::move(w));
    m.biases.emplace_back(out, 0.0);
  }
  return m;
}

/// Minibatch training (batch 32) with either plain sgd (lr 0.01; the
/// adaptive schedule halves the rate after 10 epochs without a 1e-4
/// improvement) or adam (lr 0.001). Runs at most max_epochs epochs and stops
/// early once the full-data loss moves by less than early_stop_tol.
inline MlpModel train_mlp(const Matrix& x, const std::vector<int>& y, const LearnerSpec& spec,
                          std::uint64_t seed) {
  validate_spec(spec);
  if (x.rows() < 2) throw TrainingError("mlp needs at least 2 rows");
  if (x.rows() != y.size()) throw TrainingError("row/label count mismatch");
  std::size_t pos = 0;
  for (int v : y) pos += v == 1;
  if (pos == 0 || pos == y.size())
    throw TrainingError("mlp needs both classes in the training data");

  const MlpParams& params = spec.mlp();
  const TrainControls& c = spec.controls;
  Rng rng(seed);
  MlpModel m = init_mlp(x.cols(), params, rng);

  std::vector<std::vector<double>> gw, gb, adam_mw, adam_vw, adam_mb, adam_vb;
  if (params.solver == Solver::adam) {
    adam_mw.resize(m.weights.size());
    adam_vw.resize(m.weights.size());
    adam_mb.resize(m.weights.size());
    adam_vb.resize(m.weights.size());
    for (std::size_t l = 0; l < m.weights.size(); ++l) {
      adam_mw[l].assign(m.weights[l].size(), 0.0);
      adam_vw[l].assign(m.weights[l].size(), 0.0);
      adam_mb[l].assign(m.biases[l].size(), 0.0);
      adam_vb[l].assign(m.biases[l].size(), 0.0);
    }
  }

  double lr = params.solver == Solver::adam ? c.adam_learning_rate : c.sgd_learning_rate;
  long long adam_t = 0;
  double prev_loss = std::numeric_limits<double>::infinity();
  double best_loss = prev_loss;
  int stagnant = 0;

  std::vector<std::size_t> order(x.rows());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

  for (int epoch = 1; epoch <= c.max_epochs; ++epoch) {
    rng.shuffle(order);
    // Epoch loss tracks the sample-weighted running mean of batch losses,
    // the same bookkeeping the plateau and early-stop rules act on.
    double epoch_loss = 0.0;
    for (std::size_t start = 0; start < order.size();
         start += static_cast<std::size_t>(c.batch_size)) {
      const std::size_t stop = std::min(order.size(),
                                        start + static_cast<std::size_t>(c.batch_size));
      const std::vector<std::size_t> batch(order.begin() + start, order.begin() + stop);
      const double batch_loss =
          detail::mlp_loss_and_gradients(m, x, y, batch, params.alpha, &gw, &gb);
      epoch_loss += batch_loss * static_cast<double>(batch.size()) /
                    static_cast<double>(order.size());
      if (params.solver == Solver::sgd) {
        for (std::size_t l = 0; l < m.weights.size(); ++l) {
          for (std::size_t i = 0; i < m.weights[l].size(); ++i)
            m.weights[l][i] -= lr * gw[l][i];
          for (std::size_t i = 0; i < m.biases[l].size(); ++i)
            m.biases[l][i] -= lr * gb[l][i];
        }
      } else {
        ++adam_t;
        const double bc1 = 1.0 - std::pow(c.adam_beta1, static_cast<double>(adam_t));
        const double bc2 = 1.0 - std::pow(c.adam_beta2, static_cast<double>(adam_t));
        for (std::size_t l = 0; l < m.weights.size(); ++l) {
          for (std::size_t i = 0; i < m.weights[l].size(); ++i) {
            auto& mo = adam_mw[l][i];
            auto& vo = adam_vw[l][i];
            mo = c.adam_beta1 * mo + (1.0 - c.adam_beta1) * gw[l][i];
            vo = c.adam_beta2 * vo + (1.0 - c.adam_beta2) * gw[l][i] * gw[l][i];
            m.weights[l][i] -= lr * (mo / bc1) / (std::sqrt(vo / bc2) + c.adam_epsilon);
          }
          for (std::size_t i = 0; i < m.biases[l].size(); ++i) {
            auto& mo = adam_mb[l][i];
            auto& vo = adam_vb[l][i];
            mo = c.adam_beta1 * mo + (1.0 - c.adam_beta1) * gb[l][i];
            vo = c.adam_beta2 * vo + (1.0 - c.adam_beta2) * gb[l][i] * gb[l][i];
            m.biases[l][i] -= lr * (mo / bc1) / (std::sqrt(vo / bc2) + c.adam_epsilon);
          }
        }
      }
    }
    const double loss = epoch_loss;
    if (!std::isfinite(loss))
      throw TrainingError("mlp training diverged at epoch " + std::to_string(epoch));
    m.epochs_run = epoch;
    m.final_loss = loss;
    if (params.solver == Solver::sgd && params.learning_rate == LrSchedule::adaptive) {
      if (loss > best_loss - c.plateau_tol) {
        if (++stagnant >= c.plateau_patience) {
          lr /= 2.0;
          stagnant = 0;
        }
      } else {
        stagnant = 0;
      }
    }
    best_loss = std::min(best_loss, loss);
    if (std::abs(prev_loss - loss) < c.early_stop_tol) break;
    prev_loss = loss;
  }
  return m;
}

}  // namespace cascreen
