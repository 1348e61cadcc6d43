// Acceptance suite: one pass/fail line per criterion, every tolerance pinned
// in code. Exit status is the number of failed criteria.

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "cascreen/cascade.hpp"
#include "cascreen/cli.hpp"
#include "cascreen/experiment.hpp"
#include "cascreen/metrics.hpp"
#include "cascreen/mlp.hpp"
#include "cascreen/preprocess.hpp"
#include "cascreen/questionnaire.hpp"
#include "cascreen/selection.hpp"
#include "cascreen/svc.hpp"
#include "cascreen/synth.hpp"
#include "cascreen/tree.hpp"
#include "oracles.hpp"

using namespace cascreen;

namespace {

int g_jobs = 2;

struct Outcome {
  bool pass = true;
  std::string detail;
};

using CriterionFn = std::function<Outcome()>;

struct AcceptanceCheck {
  int id;
  std::string name;
  double budget_seconds;
  CriterionFn fn;
};

Dataset shuffled_labels(Dataset ds, std::uint64_t seed) {
  auto y = ds.labels();
  Rng rng(seed);
  rng.shuffle(y);
  for (std::size_t i = 0; i < ds.rows.size(); ++i) {
    ds.rows[i].label = y[i];
    ds.records[i].label = y[i];
  }
  return ds;
}

std::vector<std::size_t> all17() {
  std::vector<std::size_t> v(feature_count);
  for (std::size_t i = 0; i < feature_count; ++i) v[i] = i;
  return v;
}

LearnerSpec default_with_controls(Family f) {
  LearnerSpec s = LearnerSpec::defaults(f);
  return s;
}

CascadeSpec cascade_spec(ModelKind kind, CascadeMode mode) {
  CascadeSpec spec;
  for (Family f : cascade_stage_families(kind)) spec.stages.push_back(default_with_controls(f));
  spec.mode = mode;
  spec.augmentation = Augmentation::proba;
  return spec;
}

// --------------------------------------------------------------------------
// 1. Metric identities
// --------------------------------------------------------------------------

Outcome criterion_metric_identities() {
  Rng rng(10001);
  Outcome out;
  int checked = 0;
  for (int trial = 0; trial < 10000; ++trial) {
    const ConfusionMatrix cm{std::int64_t(rng.uniform_u64(200)),
                             std::int64_t(rng.uniform_u64(200)),
                             std::int64_t(rng.uniform_u64(200)),
                             std::int64_t(rng.uniform_u64(200))};
    if (cm.total() == 0) continue;
    const auto acc = accuracy(cm);
    const auto sen = sensitivity(cm);
    const auto spe = specificity(cm);
    for (const auto& m : {acc, sen, spe}) {
      if (!m.has_value()) continue;
      if (*m < 0.0 || *m > 1.0) {
        out.pass = false;
        out.detail = "metric outside [0,1]";
        return out;
      }
    }
    if (acc.has_value() && sen.has_value() && spe.has_value()) {
      const double prevalence = double(cm.tp + cm.fn) / double(cm.total());
      const double rhs = prevalence * *sen + (1.0 - prevalence) * *spe;
      if (std::abs(*acc - rhs) > 1e-12) {
        out.pass = false;
        out.detail = "identity violated by " + std::to_string(std::abs(*acc - rhs));
        return out;
      }
      ++checked;
    }
  }
  out.detail = std::to_string(checked) + " identities within 1e-12";
  return out;
}

// --------------------------------------------------------------------------
// 2. Tree-split oracle
// --------------------------------------------------------------------------

Outcome criterion_tree_split_oracle() {
  Rng rng(10002);
  Outcome out;
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 2 + rng.uniform_u64(29);
    const std::size_t d = 1 + rng.uniform_u64(4);
    Matrix x(n, d);
    std::vector<int> y(n);
    for (std::size_t r = 0; r < n; ++r) {
      for (std::size_t c = 0; c < d; ++c) x(r, c) = double(rng.uniform_u64(7));
      y[r] = int(rng.uniform_u64(2));
    }
    const int min_leaf = 1 + int(rng.uniform_u64(3));
    const bool gini = rng.bernoulli(0.5);
    std::vector<std::size_t> features(d);
    for (std::size_t i = 0; i < d; ++i) features[i] = i;
    const auto ours =
        best_split(x, y, features, gini ? Criterion::gini : Criterion::entropy, min_leaf);
    const auto oracle = oracles::oracle_best_split(x, y, gini, min_leaf);
    const bool same_presence = ours.has_value() == oracle.has_value();
    const bool same_value =
        !ours.has_value() ||
        (ours->feature == oracle->feature && ours->threshold == oracle->threshold &&
         ours->decrease == oracle->decrease);
    if (!same_presence || !same_value) {
      out.pass = false;
      out.detail = "mismatch at trial " + std::to_string(trial);
      return out;
    }
  }
  out.detail = "200 datasets exact, tie rule included";
  return out;
}

// --------------------------------------------------------------------------
// 3. SVC optimality vs projected-gradient oracle
// --------------------------------------------------------------------------

Outcome criterion_svc_optimality() {
  Outcome out;
  const auto problems = parallel_map<std::string>(100, g_jobs, [&](std::size_t trial) ->
                                                  std::string {
    Rng rng(mix(10003, trial));
    const std::size_t n = 4 + rng.uniform_u64(7);
    const std::size_t d = 1 + rng.uniform_u64(3);
    const Matrix x = oracles::random_matrix(rng, n, d);
    std::vector<int> y(n);
    for (auto& v : y) v = rng.bernoulli(0.5) ? 1 : -1;
    y[0] = -1;
    y[n - 1] = 1;
    const double c = std::vector<double>{0.5, 1.0, 2.0}[rng.uniform_u64(3)];
    // Positive-semidefinite kernels only: the sigmoid Gram matrix is
    // indefinite, so its dual is non-concave and a projected-gradient oracle
    // (or any local solver) has no unique objective to agree on.
    const Kernel kind = std::vector<Kernel>{Kernel::linear, Kernel::rbf,
                                            Kernel::poly}[rng.uniform_u64(3)];
    const ResolvedKernel kern{kind, 0.7, 3};
    Matrix k(n, n);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) k(i, j) = kernel_value(kern, x.row(i), x.row(j));

    const auto res = smo_solve(k, y, c, 1e-3, 10 * 1000 * (long long)n);
    const auto oracle = oracles::qp_oracle(k, y, c, 80000);
    const double gap = std::abs(dual_objective(k, y, res.alpha) - oracle.objective);
    if (gap > 1e-6) return "objective gap " + std::to_string(gap);

    double balance = 0.0;
    double worst_violation = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      balance += res.alpha[i] * y[i];
      if (res.alpha[i] < 0.0 || res.alpha[i] > c) return "alpha outside the box";
      double u = 0.0;
      for (std::size_t j = 0; j < n; ++j) u += res.alpha[j] * y[j] * k(j, i);
      const double r = y[i] * (u + res.bias - y[i]);
      // Projected KKT residual; continuous at the box edges.
      worst_violation = std::max(
          worst_violation, std::abs(res.alpha[i] - std::clamp(res.alpha[i] - r, 0.0, c)));
    }
    if (worst_violation > 1e-3) return "kkt violation " + std::to_string(worst_violation);
    if (std::abs(balance) > 1e-9) return "alpha balance " + std::to_string(std::abs(balance));
    return {};
  });
  for (std::size_t t = 0; t < problems.size(); ++t) {
    if (!problems[t].empty()) {
      out.pass = false;
      out.detail = "problem " + std::to_string(t) + ": " + problems[t];
      return out;
    }
  }
  out.detail = "100 problems within 1e-6 of the qp oracle";
  return out;
}

// --------------------------------------------------------------------------
// 4. MLP gradient check
// --------------------------------------------------------------------------

Outcome criterion_mlp_gradients() {
  Outcome out;
  double worst = 0.0;
  const auto check_net = [&](std::size_t inputs, int width, int depth, Activation act,
                             std::uint64_t seed) {
    Rng rng(seed);
    const Matrix x = oracles::random_matrix(rng, 8, inputs);
    std::vector<int> y(8);
    for (auto& v : y) v = rng.bernoulli(0.5) ? 1 : 0;
    Rng init_rng(mix(seed, 1));
    MlpModel m = init_mlp(inputs, MlpParams{width, depth, act, Solver::sgd, 3e-4,
                                            LrSchedule::constant},
                          init_rng);
    std::vector<std::size_t> batch(x.rows());
    for (std::size_t i = 0; i < batch.size(); ++i) batch[i] = i;
    std::vector<std::vector<double>> gw, gb;
    detail::mlp_loss_and_gradients(m, x, y, batch, 3e-4, &gw, &gb);
    const double eps = 1e-5;
    const auto probe = [&](double& p, double analytic) {
      const double keep = p;
      p = keep + eps;
      const double up = detail::mlp_loss_and_gradients(m, x, y, batch, 3e-4, nullptr, nullptr);
      p = keep - eps;
      const double down = detail::mlp_loss_and_gradients(m, x, y, batch, 3e-4, nullptr, nullptr);
      p = keep;
      const double fd = (up - down) / (2.0 * eps);
      const double rel =
          std::abs(analytic - fd) / std::max({1.0, std::abs(analytic), std::abs(fd)});
      worst = std::max(worst, rel);
    };
    for (std::size_t l = 0; l < m.weights.size(); ++l) {
      for (std::size_t i = 0; i < m.weights[l].size(); ++i) probe(m.weights[l][i], gw[l][i]);
      for (std::size_t i = 0; i < m.biases[l].size(); ++i) probe(m.biases[l][i], gb[l][i]);
    }
  };
  check_net(2, 2, 1, Activation::relu, 20001);
  check_net(2, 2, 1, Activation::tanh, 20002);
  check_net(17, 64, 3, Activation::relu, 20003);
  check_net(17, 64, 3, Activation::tanh, 20004);
  out.pass = worst < 1e-4;
  std::ostringstream d;
  d << "max relative error " << worst;
  out.detail = d.str();
  return out;
}

// --------------------------------------------------------------------------
// 5. SFS oracle
// --------------------------------------------------------------------------

Outcome criterion_sfs_oracle() {
  Outcome out;
  const auto results = parallel_map<std::string>(50, g_jobs, [&](std::size_t trial) ->
                                                 std::string {
    Rng rng(mix(10005, trial));
    const std::size_t d = 2 + rng.uniform_u64(5);  // up to 6
    const std::size_t n = 30 + rng.uniform_u64(31);
    Matrix x(n, d);
    std::vector<int> y(n);
    for (std::size_t r = 0; r < n; ++r) {
      for (std::size_t c = 0; c < d; ++c) x(r, c) = double(rng.uniform_u64(5));
      y[r] = int(rng.uniform_u64(2));
    }
    y[0] = 0;
    y[1] = 0;
    y[2] = 0;
    y[n - 1] = 1;
    y[n - 2] = 1;
    y[n - 3] = 1;
    LearnerSpec tree = LearnerSpec::defaults(Family::tree);
    tree.params = TreeParams{Criterion::gini, 3, MaxFeatureRule::sqrt, 1, 2};
    std::vector<bool> flags(d, false);
    const auto evaluate = [&](const std::vector<std::size_t>& features) {
      const Matrix sub = x.take_columns(features);
      std::vector<bool> sub_flags(features.size(), false);
      CvOptions opt;
      const auto cv = cv_core(sub, y, 3, trial, learner_fold_trainer(tree, [&] {
                                std::vector<std::size_t> idx(features.size());
                                for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
                                return idx;
                              }(), sub_flags, opt),
                              opt);
      return *cv.test.mean_accuracy;
    };
    const auto oracle = oracles::greedy_forward_oracle(d, evaluate, d, 0.0);
    const auto ours = sfs_core(d, evaluate, d, 0.0);
    if (ours.trace.size() != oracle.size())
      return "trace length " + std::to_string(ours.trace.size()) + " vs " +
             std::to_string(oracle.size());
    for (std::size_t i = 0; i < oracle.size(); ++i)
      if (ours.trace[i].feature != oracle[i].feature ||
          ours.trace[i].mean_test_accuracy != oracle[i].score)
        return "divergence at step " + std::to_string(i);
    return {};
  });
  for (std::size_t t = 0; t < results.size(); ++t) {
    if (!results[t].empty()) {
      out.pass = false;
      out.detail = "dataset " + std::to_string(t) + ": " + results[t];
      return out;
    }
  }
  out.detail = "50 traces step-for-step identical";
  return out;
}

// --------------------------------------------------------------------------
// 6. No-leakage null on shuffled labels
// --------------------------------------------------------------------------

struct NullSeedResult {
  double svc, mlp, tree, forest;
  double svc_dt_safe, svc_dt_leaky, svc_dt_rf_safe, svc_dt_rf_leaky;
};

Outcome criterion_no_leakage_null() {
  Outcome out;
  const int seeds = 20;
  CvOptions opt;
  opt.jobs = g_jobs;
  const auto per_seed = [&](std::size_t s) {
    CohortSpec spec;
    spec.n = 400;
    spec.prevalence_target = 0.5;
    spec.seed = 42000 + s;
    const Dataset ds = shuffled_labels(generate_dataset(spec), mix(777, s));
    const std::uint64_t seed = mix(4242, s);
    NullSeedResult r{};
    r.svc = *cross_validate(default_with_controls(Family::svc), ds, all17(), 10, seed, opt)
                 .test.mean_accuracy;
    r.mlp = *cross_validate(default_with_controls(Family::mlp), ds, all17(), 10, seed, opt)
                 .test.mean_accuracy;
    r.tree = *cross_validate(default_with_controls(Family::tree), ds, all17(), 10, seed, opt)
                  .test.mean_accuracy;
    r.forest =
        *cross_validate(default_with_controls(Family::forest), ds, all17(), 10, seed, opt)
             .test.mean_accuracy;
    r.svc_dt_safe = *fit_cascade(cascade_spec(ModelKind::svc_dt, CascadeMode::oof_safe), ds, 10,
                                 seed, opt)
                         .stage_cv.back()
                         .test.mean_accuracy;
    r.svc_dt_leaky = *fit_cascade(cascade_spec(ModelKind::svc_dt, CascadeMode::paper_faithful),
                                  ds, 10, seed, opt)
                          .stage_cv.back()
                          .test.mean_accuracy;
    r.svc_dt_rf_safe = *fit_cascade(cascade_spec(ModelKind::svc_dt_rf, CascadeMode::oof_safe),
                                    ds, 10, seed, opt)
                            .stage_cv.back()
                            .test.mean_accuracy;
    r.svc_dt_rf_leaky =
        *fit_cascade(cascade_spec(ModelKind::svc_dt_rf, CascadeMode::paper_faithful), ds, 10,
                     seed, opt)
             .stage_cv.back()
             .test.mean_accuracy;
    return r;
  };
  NullSeedResult mean{};
  for (int s = 0; s < seeds; ++s) {
    const auto r = per_seed(s);
    mean.svc += r.svc / seeds;
    mean.mlp += r.mlp / seeds;
    mean.tree += r.tree / seeds;
    mean.forest += r.forest / seeds;
    mean.svc_dt_safe += r.svc_dt_safe / seeds;
    mean.svc_dt_leaky += r.svc_dt_leaky / seeds;
    mean.svc_dt_rf_safe += r.svc_dt_rf_safe / seeds;
    mean.svc_dt_rf_leaky += r.svc_dt_rf_leaky / seeds;
  }
  std::ostringstream d;
  d << "null means: svc " << mean.svc << " mlp " << mean.mlp << " tree " << mean.tree
    << " forest " << mean.forest << " svc_dt " << mean.svc_dt_safe << " svc_dt_rf "
    << mean.svc_dt_rf_safe << "; leak margins " << (mean.svc_dt_leaky - mean.svc_dt_safe)
    << ", " << (mean.svc_dt_rf_leaky - mean.svc_dt_rf_safe);
  out.detail = d.str();
  for (double v : {mean.svc, mean.mlp, mean.tree, mean.forest, mean.svc_dt_safe,
                   mean.svc_dt_rf_safe}) {
    if (v < 0.42 || v > 0.58) {
      out.pass = false;
      return out;
    }
  }
  if (mean.svc_dt_leaky - mean.svc_dt_safe <= 0.0 ||
      mean.svc_dt_rf_leaky - mean.svc_dt_rf_safe <= 0.0)
    out.pass = false;
  return out;
}

// --------------------------------------------------------------------------
// 7. Qualitative replication of the result-table ordering
// --------------------------------------------------------------------------

Outcome criterion_qualitative_ordering() {
  Outcome out;
  const int seeds = 20;
  CvOptions opt;
  opt.jobs = g_jobs;
  double baseline_mean = 0.0;
  std::array<double, 6> model_means{};  // svc, mlp, tree, forest, svc_dt, svc_dt_rf
  int cascade_top2 = 0;
  for (int s = 0; s < seeds; ++s) {
    CohortSpec spec;
    spec.seed = 52000 + s;
    const Dataset ds = generate_dataset(spec);
    const std::uint64_t seed = mix(5252, s);
    std::array<double, 6> acc{};
    acc[0] = *cross_validate(default_with_controls(Family::svc), ds, all17(), 10, seed, opt)
                  .test.mean_accuracy;
    acc[1] = *cross_validate(default_with_controls(Family::mlp), ds, all17(), 10, seed, opt)
                  .test.mean_accuracy;
    acc[2] = *cross_validate(default_with_controls(Family::tree), ds, all17(), 10, seed, opt)
                  .test.mean_accuracy;
    acc[3] = *cross_validate(default_with_controls(Family::forest), ds, all17(), 10, seed, opt)
                  .test.mean_accuracy;
    acc[4] = *fit_cascade(cascade_spec(ModelKind::svc_dt, CascadeMode::oof_safe), ds, 10, seed,
                          opt)
                  .stage_cv.back()
                  .test.mean_accuracy;
    acc[5] = *fit_cascade(cascade_spec(ModelKind::svc_dt_rf, CascadeMode::oof_safe), ds, 10,
                          seed, opt)
                  .stage_cv.back()
                  .test.mean_accuracy;
    baseline_mean += std::max(ds.prevalence(), 1.0 - ds.prevalence()) / seeds;
    for (std::size_t m = 0; m < 6; ++m) model_means[m] += acc[m] / seeds;
    int strictly_better = 0;
    for (std::size_t m = 0; m < 5; ++m) strictly_better += acc[m] > acc[5];
    cascade_top2 += strictly_better <= 1;
  }
  const double cascade = model_means[5];
  const double best_individual =
      std::max({model_means[0], model_means[1], model_means[2], model_means[3]});
  std::ostringstream d;
  d << "baseline " << baseline_mean << "; means svc " << model_means[0] << " mlp "
    << model_means[1] << " tree " << model_means[2] << " forest " << model_means[3]
    << " svc_dt " << model_means[4] << " svc_dt_rf " << cascade << "; top2 in "
    << cascade_top2 << "/20 seeds";
  out.detail = d.str();
  out.pass = cascade >= baseline_mean + 0.10 && cascade >= best_individual - 0.01 &&
             cascade_top2 >= 12;
  return out;
}

// --------------------------------------------------------------------------
// 8. Scoring exactness
// --------------------------------------------------------------------------

Outcome criterion_scoring_exactness() {
  Outcome out;
  const bool who5 =
      score_instrument(instrument(InstrumentId::who5), std::vector<int>(5, 5)) == 100;
  const bool ace =
      score_instrument(instrument(InstrumentId::ace16), std::vector<int>(16, 1)) == 16;
  bool ranges = true;
  const auto expect_reject = [&](InstrumentId id, std::vector<int> answers) {
    try {
      score_instrument(instrument(id), answers);
      ranges = false;
    } catch (const DataError&) {
    }
  };
  expect_reject(InstrumentId::ace16, std::vector<int>(16, 2));
  expect_reject(InstrumentId::who5, std::vector<int>(5, 6));
  expect_reject(InstrumentId::mdi, std::vector<int>(12, 6));
  expect_reject(InstrumentId::gad7, std::vector<int>(7, 4));
  expect_reject(InstrumentId::isi, std::vector<int>(7, 5));
  expect_reject(InstrumentId::isi, std::vector<int>(7, -1));
  ParticipantRecord rec;
  rec.who5_items[0] = 6;
  const bool validator = !validate_record(rec).empty();
  out.pass = who5 && ace && ranges && validator;
  out.detail = "who5=100, ace=16, all instrument ranges enforced";
  return out;
}

// --------------------------------------------------------------------------
// 9. Determinism of `run`
// --------------------------------------------------------------------------

Outcome criterion_run_determinism() {
  Outcome out;
  namespace fs = std::filesystem;
  const fs::path base = fs::temp_directory_path() / "cascreen-acceptance-det";
  fs::remove_all(base);
  fs::create_directories(base);
  const json cfg{{"dataset", json{{"synth", json{{"n", 400}, {"seed", 606}}}}},
                 {"k", 10},
                 {"seed", 31416},
                 {"models", json::array({"SVC", "MLP", "TREE", "FOREST", "SVC_DT",
                                         "SVC_DT_RF"})},
                 {"sfs", json{{"enabled", false}}},
                 {"grid", json{{"enabled", false}}},
                 {"jobs", g_jobs}};
  const std::string cfg_path = (base / "exp.json").string();
  {
    std::ofstream o(cfg_path);
    o << cfg.dump(2);
  }
  const auto run_once = [&](const std::string& dir) {
    return run_cli({"run", "--config", cfg_path, "--out-dir", (base / dir).string()});
  };
  if (run_once("a") != 0 || run_once("b") != 0) {
    out.pass = false;
    out.detail = "run invocation failed";
    return out;
  }
  const auto slurp = [](const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
  };
  const bool csv_same = slurp(base / "a" / "metrics.csv") == slurp(base / "b" / "metrics.csv");
  json ra = json::parse(slurp(base / "a" / "report.json"));
  json rb = json::parse(slurp(base / "b" / "report.json"));
  ra.erase("provenance");
  rb.erase("provenance");
  const bool report_same = ra.dump() == rb.dump();
  fs::remove_all(base);
  out.pass = csv_same && report_same;
  out.detail = std::string("metrics.csv ") + (csv_same ? "identical" : "DIFFER") +
               ", report sans provenance " + (report_same ? "identical" : "DIFFER");
  return out;
}

// --------------------------------------------------------------------------
// 10. Preprocess sanity
// --------------------------------------------------------------------------

Outcome criterion_preprocess_sanity() {
  Outcome out;
  Rng rng(10010);
  std::vector<double> normal_draws(1000);
  for (auto& v : normal_draws) v = rng.normal();
  const double lambda = fit_yeo_johnson(normal_draws);
  if (lambda < 0.85 || lambda > 1.15) {
    out.pass = false;
    out.detail = "lambda on normal draws " + std::to_string(lambda);
    return out;
  }
  int transformed = 0;
  for (int trial = 0; transformed < 50; ++trial) {
    if (trial > 500) {
      out.pass = false;
      out.detail = "could not build 50 skewed columns";
      return out;
    }
    std::vector<double> col(120);
    const double shape = rng.uniform(0.8, 2.5);
    const bool flip = rng.bernoulli(0.3);
    for (auto& v : col) {
      const double draw = std::exp(shape * rng.normal());
      v = flip ? -draw : draw;
    }
    const double before = sample_skewness(col);
    if (std::abs(before) <= 0.75) continue;
    const double lam = fit_yeo_johnson(col);
    std::vector<double> t(col.size());
    for (std::size_t i = 0; i < col.size(); ++i) t[i] = yeo_johnson(lam, col[i]);
    const double after = sample_skewness(t);
    if (std::abs(after) > std::abs(before)) {
      out.pass = false;
      out.detail = "skew grew from " + std::to_string(before) + " to " + std::to_string(after);
      return out;
    }
    ++transformed;
  }
  out.detail = "lambda " + std::to_string(lambda) + ", 50 columns de-skewed";
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  if (const char* env = std::getenv("CASCADE_SCREEN_JOBS")) {
    const int v = std::atoi(env);
    if (v > 0) g_jobs = v;
  }
  int only = 0;
  if (argc > 1) only = std::atoi(argv[1]);

  std::vector<AcceptanceCheck> criteria = {
      {1, "metric identities on 10000 random confusion matrices", 1.0,
       criterion_metric_identities},
      {2, "best-split equals exhaustive enumeration on 200 datasets", 5.0,
       criterion_tree_split_oracle},
      {3, "smo dual matches the projected-gradient qp oracle", 30.0, criterion_svc_optimality},
      {4, "mlp analytic gradients vs central differences", 10.0, criterion_mlp_gradients},
      {5, "sfs trace equals the exhaustive greedy oracle", 60.0, criterion_sfs_oracle},
      {6, "shuffled-label null at chance plus the paper-faithful leak margin", 300.0,
       criterion_no_leakage_null},
      {7, "cascade ordering on the default synthetic cohort", 600.0,
       criterion_qualitative_ordering},
      {8, "questionnaire scoring exactness", 1.0, criterion_scoring_exactness},
      {9, "byte-identical reruns (provenance excluded)", 1200.0, criterion_run_determinism},
      {10, "yeo-johnson lambda and skew reduction", 5.0, criterion_preprocess_sanity},
  };

  int failures = 0;
  for (const auto& crit : criteria) {
    if (only != 0 && crit.id != only) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome outcome;
    try {
      outcome = crit.fn();
    } catch (const std::exception& e) {
      outcome.pass = false;
      outcome.detail = std::string("exception: ") + e.what();
    }
    const double elapsed =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const bool in_budget = elapsed < crit.budget_seconds;
    const bool pass = outcome.pass && in_budget;
    std::printf("[%s] criterion %2d: %s (%.2fs, budget %.0fs)%s%s\n", pass ? "PASS" : "FAIL",
                crit.id, crit.name.c_str(), elapsed, crit.budget_seconds,
                outcome.detail.empty() ? "" : " -- ", outcome.detail.c_str());
    if (!pass) ++failures;
    std::fflush(stdout);
  }
  return failures;
}
