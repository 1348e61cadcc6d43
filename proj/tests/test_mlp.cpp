#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "cascreen/mlp.hpp"
#include "oracles.hpp"

using namespace cascreen;

namespace {

LearnerSpec mlp_spec(int width, int depth, Activation act, Solver solver,
                     LrSchedule lr = LrSchedule::adaptive, double alpha = 3e-4) {
  LearnerSpec s = LearnerSpec::defaults(Family::mlp);
  s.params = MlpParams{width, depth, act, solver, alpha, lr};
  return s;
}

// Central finite differences over every parameter of the batch loss.
double max_gradient_relative_error(MlpModel& m, const Matrix& x, const std::vector<int>& y,
                                   double alpha, double eps = 1e-5) {
  std::vector<std::size_t> batch(x.rows());
  for (std::size_t i = 0; i < batch.size(); ++i) batch[i] = i;
  std::vector<std::vector<double>> gw, gb;
  detail::mlp_loss_and_gradients(m, x, y, batch, alpha, &gw, &gb);

  double worst = 0.0;
  const auto check_param = [&](double& p, double analytic) {
    const double keep = p;
    p = keep + eps;
    const double up = detail::mlp_loss_and_gradients(m, x, y, batch, alpha, nullptr, nullptr);
    p = keep - eps;
    const double down = detail::mlp_loss_and_gradients(m, x, y, batch, alpha, nullptr, nullptr);
    p = keep;
    const double fd = (up - down) / (2.0 * eps);
    const double rel = std::abs(analytic - fd) / std::max({1.0, std::abs(analytic), std::abs(fd)});
    worst = std::max(worst, rel);
  };
  for (std::size_t l = 0; l < m.weights.size(); ++l) {
    for (std::size_t i = 0; i < m.weights[l].size(); ++i)
      check_param(m.weights[l][i], gw[l][i]);
    for (std::size_t i = 0; i < m.biases[l].size(); ++i) check_param(m.biases[l][i], gb[l][i]);
  }
  return worst;
}

}  // namespace

TEST_CASE("analytic gradients match central finite differences on a 2-2-1 net") {
  Rng rng(101);
  const Matrix x = oracles::random_matrix(rng, 8, 2);
  std::vector<int> y(8);
  for (auto& v : y) v = rng.bernoulli(0.5) ? 1 : 0;
  for (Activation act : {Activation::relu, Activation::tanh}) {
    Rng init_rng(55);
    MlpModel m = init_mlp(2, MlpParams{2, 1, act, Solver::sgd, 1e-4, LrSchedule::constant},
                          init_rng);
    // Hidden depth 1 is below the grid domain but fine for the raw net.
    CHECK(max_gradient_relative_error(m, x, y, 1e-4) < 1e-4);
  }
}

TEST_CASE("glorot initialization stays inside its bounds and biases start at zero") {
  Rng rng(7);
  const MlpModel m = init_mlp(17, MlpParams{64, 3, Activation::relu, Solver::sgd, 3e-4,
                                            LrSchedule::adaptive},
                              rng);
  REQUIRE(m.layer_sizes == std::vector<std::size_t>{17, 64, 64, 64, 1});
  for (std::size_t l = 0; l < m.weights.size(); ++l) {
    const double bound =
        std::sqrt(6.0 / double(m.layer_sizes[l] + m.layer_sizes[l + 1]));
    for (double w : m.weights[l]) {
      CHECK(w >= -bound);
      CHECK(w <= bound);
    }
    for (double b : m.biases[l]) CHECK(b == 0.0);
  }
}

TEST_CASE("separable blobs train to high accuracy with both solvers") {
  Rng rng(102);
  const std::size_t n = 120;
  Matrix x(n, 2);
  std::vector<int> y(n);
  for (std::size_t i = 0; i < n; ++i) {
    const int c = int(i % 2);
    x(i, 0) = rng.normal() + (c ? 2.0 : -2.0);
    x(i, 1) = rng.normal() + (c ? 2.0 : -2.0);
    y[i] = c;
  }
  for (Solver solver : {Solver::sgd, Solver::adam}) {
    const auto m = train_mlp(x, y, mlp_spec(32, 2, Activation::relu, solver), 5);
    int correct = 0;
    for (std::size_t i = 0; i < n; ++i)
      correct += (m.predict_proba(x.row(i)) >= 0.5 ? 1 : 0) == y[i];
    CHECK(double(correct) / double(n) >= 0.95);
  }
}

TEST_CASE("same seed and data give identical weights") {
  Rng rng(103);
  const Matrix x = oracles::random_matrix(rng, 40, 3);
  const auto y = oracles::random_labels(rng, x);
  const auto spec = mlp_spec(32, 2, Activation::tanh, Solver::adam);
  const auto a = train_mlp(x, y, spec, 11);
  const auto b = train_mlp(x, y, spec, 11);
  CHECK(a.weights == b.weights);
  CHECK(a.biases == b.biases);
  const auto c = train_mlp(x, y, spec, 12);
  CHECK(a.weights != c.weights);
}

TEST_CASE("one vanishing sgd step decreases loss by lr * ||grad||^2") {
  Rng rng(104);
  const Matrix x = oracles::random_matrix(rng, 16, 3);
  std::vector<int> y(16);
  for (auto& v : y) v = rng.bernoulli(0.5) ? 1 : 0;
  Rng init_rng(9);
  MlpModel m = init_mlp(3, MlpParams{4, 1, Activation::tanh, Solver::sgd, 1e-4,
                                     LrSchedule::constant},
                        init_rng);
  std::vector<std::size_t> batch(x.rows());
  for (std::size_t i = 0; i < batch.size(); ++i) batch[i] = i;
  std::vector<std::vector<double>> gw, gb;
  const double loss0 = detail::mlp_loss_and_gradients(m, x, y, batch, 1e-4, &gw, &gb);
  double grad_norm2 = 0.0;
  for (const auto& layer : gw)
    for (double g : layer) grad_norm2 += g * g;
  for (const auto& layer : gb)
    for (double g : layer) grad_norm2 += g * g;

  const double lr = 1e-6;
  MlpModel stepped = m;
  for (std::size_t l = 0; l < m.weights.size(); ++l) {
    for (std::size_t i = 0; i < m.weights[l].size(); ++i)
      stepped.weights[l][i] -= lr * gw[l][i];
    for (std::size_t i = 0; i < m.biases[l].size(); ++i)
      stepped.biases[l][i] -= lr * gb[l][i];
  }
  const double loss1 =
      detail::mlp_loss_and_gradients(stepped, x, y, batch, 1e-4, nullptr, nullptr);
  const double predicted_drop = lr * grad_norm2;
  CHECK_THAT(loss0 - loss1, Catch::Matchers::WithinRel(predicted_drop, 1e-3));
}

TEST_CASE("training preconditions") {
  Matrix x(1, 2);
  CHECK_THROWS_AS(train_mlp(x, {1}, mlp_spec(32, 2, Activation::relu, Solver::sgd), 1),
                  TrainingError);
  Matrix x2 = Matrix::from_rows({{0, 0}, {1, 1}});
  CHECK_THROWS_AS(train_mlp(x2, {1, 1}, mlp_spec(32, 2, Activation::relu, Solver::sgd), 1),
                  TrainingError);
}

TEST_CASE("hidden width outside the domain is a validation error") {
  Matrix x = Matrix::from_rows({{0, 0}, {1, 1}, {0, 1}, {1, 0}});
  CHECK_THROWS_AS(train_mlp(x, {0, 1, 0, 1}, mlp_spec(7, 2, Activation::relu, Solver::sgd), 1),
                  DataError);
}
