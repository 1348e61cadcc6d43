#pragma once

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "cascreen/pipeline.hpp"

namespace cascreen {

namespace detail {

inline json read_json_file(const std::string& path, const char* what) {
  std::ifstream in(path);
  if (!in) throw DataError(std::string("cannot open ") + what + " file " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw SchemaError(std::string(what) + " " + path + ": invalid JSON: " + e.what());
  }
  return j;
}

inline void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write file " + path);
  out << text;
}

inline Dataset load_dataset_file(const std::string& path, bool impute) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open dataset file " + path);
  return load_csv(in, impute ? LoadMode::impute_mode : LoadMode::strict);
}

inline int resolve_jobs(int flag_jobs, int config_jobs) {
  if (flag_jobs > 0) return flag_jobs;
  if (const char* env = std::getenv("CASCADE_SCREEN_JOBS")) {
    const int v = std::atoi(env);
    if (v > 0) return v;
  }
  return config_jobs > 0 ? config_jobs : 1;
}

/// Lenient scan for `validate`: reports every malformed cell and range
/// violation instead of stopping at the first.
inline std::vector<std::string> scan_violations(std::istream& in) {
  std::vector<std::string> out;
  std::string line;
  if (!std::getline(in, line)) {
    out.push_back("empty file: no header row");
    return out;
  }
  const auto header = detail::split_csv_line(line);
  const auto expected = csv_header();
  if (header.size() != csv_column_count) {
    out.push_back("header: expected " + std::to_string(csv_column_count) + " columns, got " +
                  std::to_string(header.size()));
    return out;
  }
  for (std::size_t c = 0; c < csv_column_count; ++c) {
    const bool is_extra =
        c >= ace_extra_first_column && c < ace_extra_first_column + ace_extra_count;
    if (!is_extra && header[c] != expected[c])
      out.push_back("header column " + std::to_string(c + 1) + ": expected '" + expected[c] +
                    "', got '" + header[c] + "'");
  }
  if (!out.empty()) return out;

  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto cells = detail::split_csv_line(line);
    const std::string where = "line " + std::to_string(line_no);
    if (cells.size() != csv_column_count) {
      out.push_back(where + ": expected " + std::to_string(csv_column_count) + " cells, got " +
                    std::to_string(cells.size()));
      continue;
    }
    std::vector<int> values;
    bool cells_ok = true;
    for (std::size_t c = 1; c < csv_column_count; ++c) {
      std::optional<int> v;
      try {
        v = detail::parse_int_cell(cells[c]);
      } catch (const DataError&) {
        out.push_back(where + ": " + header[c] + "='" + cells[c] + "' is not an integer");
        cells_ok = false;
        continue;
      }
      if (!v.has_value()) {
        out.push_back(where + ": " + header[c] + " is missing");
        cells_ok = false;
        continue;
      }
      values.push_back(*v);
    }
    if (!cells_ok) continue;
    const auto rec = detail::record_from_cells(cells[0], values);
    for (const auto& v : validate_record(rec))
      out.push_back(where + " (id " + rec.id + "): " + v.field + "=" + v.value + " allowed " +
                    v.allowed);
  }
  return out;
}

}  // namespace detail

/// CLI entry point. Exit codes: 0 success, 1 usage error, 2 data/validation
/// error, 3 training or other runtime error.
inline int run_cli(const std::vector<std::string>& args) {
  CLI::App app{"suicidal-behavior screening pipeline: questionnaire scoring, synthetic "
               "cohorts, from-scratch learners, and cascade ensembles"};
  app.require_subcommand(1);

  // score
  auto* score_cmd = app.add_subcommand("score", "encode a cohort CSV into feature rows");
  std::string score_in, score_out;
  bool score_impute = false;
  score_cmd->add_option("--in", score_in, "cohort CSV")->required();
  score_cmd->add_option("--out", score_out, "feature CSV to write")->required();
  score_cmd->add_flag("--impute", score_impute, "fill missing cells with column modes");

  // validate
  auto* validate_cmd = app.add_subcommand("validate", "list schema and range violations");
  std::string validate_in;
  validate_cmd->add_option("--in", validate_in, "cohort CSV")->required();

  // synth
  auto* synth_cmd = app.add_subcommand("synth", "generate a synthetic cohort CSV");
  std::string synth_spec_path, synth_out, synth_meta;
  synth_cmd->add_option("--spec", synth_spec_path, "cohort spec JSON (defaults when omitted)");
  synth_cmd->add_option("--out", synth_out, "cohort CSV to write")->required();
  synth_cmd->add_option("--meta", synth_meta, "sidecar JSON path (default <out>.meta.json)");

  // train
  auto* train_cmd = app.add_subcommand("train", "fit one model per the experiment config");
  std::string train_config, train_model_name, train_out;
  int train_jobs = 0;
  train_cmd->add_option("--config", train_config, "experiment config JSON")->required();
  train_cmd->add_option("--model", train_model_name, "model name (e.g. SVC_DT_RF)")->required();
  train_cmd->add_option("--out", train_out, "model JSON to write")->required();
  train_cmd->add_option("--jobs", train_jobs, "worker threads");

  // evaluate
  auto* eval_cmd = app.add_subcommand("evaluate", "score a cohort with a trained model");
  std::string eval_model, eval_in, eval_out;
  bool eval_impute = false;
  eval_cmd->add_option("--model", eval_model, "model JSON from `train`")->required();
  eval_cmd->add_option("--in", eval_in, "cohort CSV")->required();
  eval_cmd->add_option("--out", eval_out, "metrics JSON to write")->required();
  eval_cmd->add_flag("--impute", eval_impute, "fill missing cells with column modes");

  // run
  auto* run_cmd = app.add_subcommand("run", "run the full experiment");
  std::string run_config, run_out_dir;
  int run_jobs = 0;
  run_cmd->add_option("--config", run_config, "experiment config JSON")->required();
  run_cmd->add_option("--out-dir", run_out_dir, "output directory")->required();
  run_cmd->add_option("--jobs", run_jobs, "worker threads");

  std::vector<std::string> argv(args.rbegin(), args.rend());
  try {
    app.parse(argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (*score_cmd) {
      const Dataset ds = detail::load_dataset_file(score_in, score_impute);
      std::ostringstream out;
      out << "id";
      for (const char* name : feature_names) out << ',' << name;
      out << ",suicidal_behavior\n";
      for (std::size_t r = 0; r < ds.n(); ++r) {
        out << ds.records[r].id;
        for (double v : ds.rows[r].values) out << ',' << static_cast<long long>(v);
        out << ',' << ds.rows[r].label << "\n";
      }
      detail::write_text_file(score_out, out.str());
    } else if (*validate_cmd) {
      std::ifstream in(validate_in);
      if (!in) throw DataError("cannot open dataset file " + validate_in);
      const auto violations = detail::scan_violations(in);
      for (const auto& v : violations) std::cout << v << "\n";
      if (!violations.empty()) {
        std::cout << violations.size() << " violation(s)\n";
        return 2;
      }
      std::cout << "no violations\n";
    } else if (*synth_cmd) {
      CohortSpec spec;
      if (!synth_spec_path.empty())
        spec = cohort_spec_from_json(detail::read_json_file(synth_spec_path, "cohort spec"));
      GenerationMeta meta;
      const Dataset ds = generate_dataset(spec, &meta);
      std::ostringstream csv;
      write_csv(ds, csv);
      detail::write_text_file(synth_out, csv.str());
      const json sidecar{{"spec", to_json(spec)},
                         {"realized_prevalence", meta.realized_prevalence},
                         {"intercept", meta.intercept},
                         {"warnings", meta.warnings}};
      detail::write_text_file(synth_meta.empty() ? synth_out + ".meta.json" : synth_meta,
                              sidecar.dump(2) + "\n");
    } else if (*train_cmd) {
      ExperimentConfig cfg =
          experiment_config_from_json(detail::read_json_file(train_config, "config"));
      cfg.jobs = detail::resolve_jobs(train_jobs, cfg.jobs);
      const ModelKind kind = model_kind_from_string(train_model_name);
      Dataset ds;
      if (cfg.synth.has_value())
        ds = generate_dataset(*cfg.synth);
      else
        ds = detail::load_dataset_file(cfg.dataset_csv, cfg.impute);
      const Pipeline pipe = fit_pipeline(cfg, ds, kind);
      detail::write_text_file(train_out, to_json(pipe).dump(2) + "\n");
    } else if (*eval_cmd) {
      const Pipeline pipe =
          pipeline_from_json(detail::read_json_file(eval_model, "model"));
      const Dataset ds = detail::load_dataset_file(eval_in, eval_impute);
      std::vector<int> y_true, y_pred;
      for (std::size_t r = 0; r < ds.n(); ++r) {
        std::vector<double> row(ds.rows[r].values.begin(), ds.rows[r].values.end());
        y_true.push_back(ds.rows[r].label);
        y_pred.push_back(pipe.predict(row).label);
      }
      const ConfusionMatrix cm = confusion(y_true, y_pred);
      const MetricTriple t = metric_triple(cm);
      const json out{{"n", ds.n()},
                     {"confusion", detail::confusion_to_json(cm)},
                     {"metrics", detail::triple_to_json(t)}};
      detail::write_text_file(eval_out, out.dump(2) + "\n");
    } else if (*run_cmd) {
      ExperimentConfig cfg =
          experiment_config_from_json(detail::read_json_file(run_config, "config"));
      cfg.jobs = detail::resolve_jobs(run_jobs, cfg.jobs);
      const ExperimentResult res = run_experiment(cfg);
      std::filesystem::create_directories(run_out_dir);
      const auto dir = std::filesystem::path(run_out_dir);
      detail::write_text_file((dir / "report.json").string(), res.report.dump(2) + "\n");
      detail::write_text_file((dir / "metrics.csv").string(), res.metrics_csv);
    }
  } catch (const SchemaError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const DataError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const TrainingError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
  return 0;
}

inline int run_cli(int argc, char** argv) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  return run_cli(args);
}

}  // namespace cascreen
