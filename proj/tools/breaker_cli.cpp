/*
 * Copyright 2026 Breaker Contributors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *   http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

// Command-line front end: dataset generation, training, evaluation,
// gradient verification, and representation export.
//
// Exit codes: 0 success, 2 configuration error, 3 I/O error, 4 numeric
// abort, 5 gradient-verification failure.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "breaker/checkpoint.hpp"
#include "breaker/data.hpp"
#include "breaker/error.hpp"
#include "breaker/eval.hpp"
#include "breaker/trainer.hpp"
#include "breaker/verify.hpp"

namespace {

using breaker::ConfigError;
using breaker::IoError;
using ordered_json = nlohmann::ordered_json;

ordered_json read_config_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open config " + path.string());
  ordered_json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("invalid JSON in " + path.string() + ": " + e.what());
  }
  if (!j.is_object()) throw ConfigError("config root must be an object");
  for (const auto& [key, value] : j.items()) {
    if (key != "data" && key != "train" && key != "eval") {
      throw ConfigError("unknown key '" + key + "' at config root");
    }
  }
  return j;
}

struct EvalSection {
  breaker::EvalOptions opts;
  std::size_t export_cap = 3000;
};

EvalSection parse_eval_section(const ordered_json& root) {
  EvalSection s;
  if (!root.contains("eval")) return s;
  const ordered_json& j = root["eval"];
  for (const auto& [key, value] : j.items()) {
    if (key != "silhouette" && key != "ari" && key != "tower_correlation" &&
        key != "silhouette_cap" && key != "export_cap" && key != "seed") {
      throw ConfigError("unknown key '" + key + "' in eval");
    }
  }
  try {
    if (j.contains("silhouette")) s.opts.with_silhouette = j["silhouette"].get<bool>();
    if (j.contains("ari")) s.opts.with_ari = j["ari"].get<bool>();
    if (j.contains("tower_correlation")) {
      s.opts.with_tower_correlation = j["tower_correlation"].get<bool>();
    }
    if (j.contains("silhouette_cap")) {
      s.opts.silhouette_cap = j["silhouette_cap"].get<std::size_t>();
    }
    if (j.contains("export_cap")) s.export_cap = j["export_cap"].get<std::size_t>();
    if (j.contains("seed")) s.opts.seed = j["seed"].get<std::uint64_t>();
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("bad value in eval config: ") + e.what());
  }
  return s;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << text;
  if (!out) throw IoError("failed writing " + path.string());
}

void ensure_dir(const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create directory " + dir.string());
}

void check_manifest_compat(const breaker::Checkpoint& ck,
                           const breaker::DatasetManifest& mf) {
  std::string ckpt_shape = "features(";
  for (std::size_t i = 0; i < ck.cardinalities.size(); ++i) {
    if (i) ckpt_shape += ",";
    ckpt_shape += std::to_string(ck.cardinalities[i]);
  }
  ckpt_shape += ") items " + std::to_string(ck.n_items);
  std::string data_shape = "features(";
  for (std::size_t i = 0; i < mf.features.size(); ++i) {
    if (i) data_shape += ",";
    data_shape += std::to_string(mf.features[i].cardinality);
  }
  data_shape += ") items " + std::to_string(mf.n_items);
  bool ok = ck.n_items == mf.n_items &&
            ck.cardinalities.size() == mf.features.size();
  for (std::size_t i = 0; ok && i < mf.features.size(); ++i) {
    ok = ck.cardinalities[i] == mf.features[i].cardinality;
  }
  if (!ok) {
    throw ConfigError("checkpoint does not match dataset: checkpoint " +
                      ckpt_shape + " vs dataset " + data_shape);
  }
}

int cmd_gen(const std::string& config_path, const std::string& out_dir) {
  const ordered_json root = read_config_file(config_path);
  if (!root.contains("data")) {
    throw ConfigError("missing required section 'data'");
  }
  const breaker::SyntheticConfig cfg =
      breaker::synthetic_config_from_json(root["data"].dump());
  const breaker::Dataset ds = breaker::generate_synthetic(cfg);
  ensure_dir(out_dir);
  breaker::write_dataset(ds, out_dir);
  ordered_json resolved;
  resolved["data"] = ordered_json::parse(breaker::to_json(cfg));
  write_text(std::filesystem::path(out_dir) / "resolved_config.json",
             resolved.dump(2) + "\n");
  std::cout << "gen: " << ds.manifest.train_records << " train / "
            << ds.manifest.test_records << " test records over "
            << ds.manifest.n_items << " items -> " << out_dir << "\n";
  return 0;
}

int cmd_train(const std::string& data_dir, const std::string& config_path,
              const std::string& out_dir, const std::string& variant_flag) {
  breaker::TrainConfig cfg;
  if (!config_path.empty()) {
    const ordered_json root = read_config_file(config_path);
    if (root.contains("train")) {
      cfg = breaker::train_config_from_json(root["train"].dump());
    }
  }
  if (!variant_flag.empty()) {
    cfg.variant = breaker::variant_from_string(variant_flag);
  }
  const breaker::Dataset ds = breaker::load_dataset(data_dir);
  const breaker::TrainResult result =
      breaker::train(ds, cfg, /*eval_each_epoch=*/!ds.test.empty(), nullptr,
                     &std::cerr);
  ensure_dir(out_dir);
  const std::filesystem::path out(out_dir);
  breaker::write_epoch_csv(result.epochs, out / "epochs.csv");
  breaker::save_checkpoint(out / "model.ckpt",
                           breaker::make_checkpoint(cfg, result, ds.manifest));
  ordered_json resolved;
  resolved["train"] = ordered_json::parse(breaker::to_json(cfg));
  write_text(out / "resolved_config.json", resolved.dump(2) + "\n");

  const breaker::EpochLog& last = result.epochs.back();
  std::cout << "train: epoch " << last.epoch << " loss "
            << breaker::format_double(last.loss) << " loss_p "
            << breaker::format_double(last.loss_p) << " loss_c "
            << breaker::format_double(last.loss_c);
  if (last.recall_at_1) {
    std::cout << " recall_at_1 " << breaker::format_double(*last.recall_at_1)
              << " item_auc_macro "
              << breaker::format_double(*last.item_auc_macro) << " aer "
              << breaker::format_double(*last.aer);
  }
  std::cout << "\n";
  return 0;
}

int cmd_eval(const std::string& data_dir, const std::string& ckpt_path,
             const std::string& report_path, const std::string& config_path) {
  EvalSection section;
  if (!config_path.empty()) {
    section = parse_eval_section(read_config_file(config_path));
  }
  const breaker::Dataset ds = breaker::load_dataset(data_dir);
  const breaker::Checkpoint ck = breaker::load_checkpoint(ckpt_path);
  check_manifest_compat(ck, ds.manifest);
  const breaker::BreakerNet net(ck.dims());
  const breaker::EvalReport report = breaker::evaluate(
      net, ck.tensors, ck.config.variant, ds.test, section.opts);
  write_text(report_path, breaker::eval_report_to_json(report) + "\n");
  std::cout << "eval: recall_at_1 " << breaker::format_double(report.recall_at_1)
            << " aer " << breaker::format_double(report.aer)
            << " item_auc_macro "
            << breaker::format_double(report.item_auc_macro) << " over "
            << report.counts.test_records << " records -> " << report_path
            << "\n";
  return 0;
}

int cmd_gradcheck(std::uint64_t seed, const std::string& inject) {
  breaker::InjectFault fault = breaker::InjectFault::kNone;
  if (inject == "cluster-sign") {
    fault = breaker::InjectFault::kClusterGradSign;
  } else if (!inject.empty()) {
    throw ConfigError("unknown fault '" + inject + "'");
  }
  const breaker::GradientSuite suite = breaker::run_gradient_suite(seed, fault);
  for (const breaker::GradientCheck& c : suite.checks) {
    std::printf("group %-28s %s_err %.3e  tol %.0e  %s\n", c.group.c_str(),
                c.relative ? "max_rel" : "max_abs", c.max_error, c.tolerance,
                c.pass ? "PASS" : "FAIL");
  }
  if (!suite.all_pass) {
    std::string failing;
    for (const breaker::GradientCheck& c : suite.checks) {
      if (!c.pass) failing += (failing.empty() ? "" : ", ") + c.group;
    }
    std::cerr << "gradcheck failed: " << failing << "\n";
    return 5;
  }
  std::cout << "gradcheck: PASS\n";
  return 0;
}

int cmd_export_reps(const std::string& data_dir, const std::string& ckpt_path,
                    const std::string& out_path,
                    const std::string& config_path) {
  EvalSection section;
  if (!config_path.empty()) {
    section = parse_eval_section(read_config_file(config_path));
  }
  const breaker::Dataset ds = breaker::load_dataset(data_dir);
  const breaker::Checkpoint ck = breaker::load_checkpoint(ckpt_path);
  check_manifest_compat(ck, ds.manifest);
  const breaker::BreakerNet net(ck.dims());
  breaker::export_representations(net, ck.tensors, ck.config.variant, ds.test,
                                  out_path, section.export_cap,
                                  section.opts.seed);
  std::cout << "export-reps: wrote " << out_path << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Breaker: single-slot recommendation training toolkit"};
  app.require_subcommand(1);

  std::string config_path, out_path, data_dir, ckpt_path, report_path;
  std::string variant_flag, inject;
  std::uint64_t seed = 0;

  CLI::App* gen = app.add_subcommand("gen", "generate a synthetic dataset");
  gen->add_option("--config", config_path, "JSON config file")->required();
  gen->add_option("--out", out_path, "output directory")->required();

  CLI::App* train = app.add_subcommand("train", "train a model");
  train->add_option("--data", data_dir, "dataset directory")->required();
  train->add_option("--config", config_path, "JSON config file");
  train->add_option("--out", out_path, "output directory")->required();
  train->add_option("--variant", variant_flag,
                    "breaker | breaker1- | breaker2-");

  CLI::App* eval = app.add_subcommand("eval", "evaluate a checkpoint");
  eval->add_option("--data", data_dir, "dataset directory")->required();
  eval->add_option("--ckpt", ckpt_path, "checkpoint file")->required();
  eval->add_option("--report", report_path, "report JSON path")->required();
  eval->add_option("--config", config_path, "JSON config file");

  CLI::App* gradcheck =
      app.add_subcommand("gradcheck", "run the gradient verification suite");
  gradcheck->add_option("--seed", seed, "suite seed");
  gradcheck->add_option("--inject", inject, "fault injection (testing)")
      ->group("");  // hidden

  CLI::App* exp =
      app.add_subcommand("export-reps", "export user representations");
  exp->add_option("--data", data_dir, "dataset directory")->required();
  exp->add_option("--ckpt", ckpt_path, "checkpoint file")->required();
  exp->add_option("--out", out_path, "output CSV path")->required();
  exp->add_option("--config", config_path, "JSON config file");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << e.what() << "\n";
    return 2;
  }

  try {
    if (gen->parsed()) return cmd_gen(config_path, out_path);
    if (train->parsed()) {
      return cmd_train(data_dir, config_path, out_path, variant_flag);
    }
    if (eval->parsed()) {
      return cmd_eval(data_dir, ckpt_path, report_path, config_path);
    }
    if (gradcheck->parsed()) return cmd_gradcheck(seed, inject);
    if (exp->parsed()) {
      return cmd_export_reps(data_dir, ckpt_path, out_path, config_path);
    }
  } catch (const breaker::CheckpointShapeError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::out_of_range& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const IoError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const breaker::NumericError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 4;
  }
  return 2;
}
