// Command-line front end for the lvad shared library. Talks to the library
// exclusively through the C API in lvad.h.

#include <cstdint>
#include <cstdio>
#include <string>

#include "CLI11.hpp"
#include "lvad.h"

namespace {

struct ConfigHandle {
  lvad_config* cfg = nullptr;
  ~ConfigHandle() { lvad_config_free(cfg); }
};

int report_failure(const char* verb, lvad_status status) {
  std::fprintf(stderr, "%s failed: %s: %s\n", verb, lvad_status_name(status), lvad_last_error());
  return 1;
}

bool load_config(const std::string& path, bool seed_set, uint64_t seed, ConfigHandle& handle,
                 const char* verb) {
  lvad_status s = lvad_config_load(path.c_str(), &handle.cfg);
  if (s != LVAD_OK) {
    report_failure(verb, s);
    return false;
  }
  if (seed_set) lvad_config_set_seed(handle.cfg, seed);
  return true;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Point cloud video anomaly detection with a Lorentz-model "
               "spatio-temporal transformer"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(lvad_version()));

  std::string config_path, data_dir, checkpoint_path, out_path, log_path, scores_dir, split;
  uint64_t seed = 0;
  bool seed_set = false, want_params = false;
  double fd_step = 1e-5;

  auto add_seed = [&](CLI::App* cmd) {
    cmd->add_option("--seed", seed, "Override the training seed from the config")
        ->each([&](const std::string&) { seed_set = true; });
  };

  CLI::App* gen = app.add_subcommand("gen-data", "Generate synthetic train/test splits");
  gen->add_option("--config", config_path, "Experiment config file")->required();
  gen->add_option("--out", out_path, "Output dataset directory")->required();
  add_seed(gen);

  CLI::App* train = app.add_subcommand("train", "Train a model on the train split");
  train->add_option("--config", config_path, "Experiment config file")->required();
  train->add_option("--data", data_dir, "Dataset directory holding train/ and test/")->required();
  train->add_option("--out", out_path, "Checkpoint output path")->required();
  train->add_option("--log", log_path, "Training log output path")->required();
  train->add_flag("--report-params", want_params, "Print trainable parameter counts and exit");
  add_seed(train);

  CLI::App* score = app.add_subcommand("score", "Score a split with a trained checkpoint");
  score->add_option("--config", config_path, "Experiment config file")->required();
  score->add_option("--checkpoint", checkpoint_path, "Checkpoint path")->required();
  score->add_option("--data", data_dir, "Dataset directory")->required();
  score->add_option("--split", split, "Split to score (default test)")->default_val("test");
  score->add_option("--out", out_path, "Directory for per-video score files")->required();
  add_seed(score);

  CLI::App* eval = app.add_subcommand("eval", "Aggregate score files into an AUROC report");
  eval->add_option("--scores", scores_dir, "Directory of .scores.csv files")->required();
  eval->add_option("--data", data_dir, "Split directory for category metadata (optional)");
  eval->add_option("--out", out_path, "Report CSV output path")->required();

  CLI::App* check = app.add_subcommand("check-grad", "Verify gradients by finite differences");
  check->add_option("--config", config_path, "Experiment config file")->required();
  check->add_option("--step", fd_step, "Central-difference step (default 1e-5)");
  check->add_option("--out", out_path, "Optional report output path");
  add_seed(check);

  CLI11_PARSE(app, argc, argv);

  if (gen->parsed()) {
    ConfigHandle cfg;
    if (!load_config(config_path, seed_set, seed, cfg, "gen-data")) return 1;
    lvad_status s = lvad_gen_data(cfg.cfg, out_path.c_str());
    if (s != LVAD_OK) return report_failure("gen-data", s);
    std::printf("wrote dataset under %s\n", out_path.c_str());
    return 0;
  }

  if (train->parsed()) {
    ConfigHandle cfg;
    if (!load_config(config_path, seed_set, seed, cfg, "train")) return 1;
    if (want_params) {
      char* text = nullptr;
      lvad_status s = lvad_config_report_params(cfg.cfg, &text);
      if (s != LVAD_OK) return report_failure("train", s);
      std::printf("%s", text);
      lvad_string_free(text);
      return 0;
    }
    lvad_status s = lvad_train(cfg.cfg, data_dir.c_str(), out_path.c_str(), log_path.c_str());
    if (s != LVAD_OK) return report_failure("train", s);
    std::printf("checkpoint written to %s\n", out_path.c_str());
    return 0;
  }

  if (score->parsed()) {
    ConfigHandle cfg;
    if (!load_config(config_path, seed_set, seed, cfg, "score")) return 1;
    lvad_status s = lvad_score(cfg.cfg, checkpoint_path.c_str(), data_dir.c_str(), split.c_str(),
                               out_path.c_str());
    if (s != LVAD_OK) return report_failure("score", s);
    std::printf("score files written under %s\n", out_path.c_str());
    return 0;
  }

  if (eval->parsed()) {
    double raw = 0, smoothed = 0;
    lvad_status s = lvad_eval(scores_dir.c_str(), data_dir.empty() ? nullptr : data_dir.c_str(),
                              out_path.c_str(), &raw, &smoothed);
    if (s != LVAD_OK) return report_failure("eval", s);
    std::printf("auroc_raw %.6f\nauroc_smoothed %.6f\nreport written to %s\n", raw, smoothed,
                out_path.c_str());
    return 0;
  }

  if (check->parsed()) {
    ConfigHandle cfg;
    if (!load_config(config_path, seed_set, seed, cfg, "check-grad")) return 1;
    char* text = nullptr;
    double max_rel = 0;
    lvad_status s = lvad_check_grad(cfg.cfg, fd_step, &text, &max_rel);
    if (s != LVAD_OK) return report_failure("check-grad", s);
    std::printf("%s", text);
    if (!out_path.empty()) {
      FILE* f = std::fopen(out_path.c_str(), "w");
      if (!f) {
        lvad_string_free(text);
        std::fprintf(stderr, "check-grad failed: cannot open %s\n", out_path.c_str());
        return 1;
      }
      std::fputs(text, f);
      std::fclose(f);
    }
    lvad_string_free(text);
    if (max_rel >= 1e-4) {
      std::fprintf(stderr, "check-grad failed: max relative error %.3e >= 1e-4\n", max_rel);
      return 1;
    }
    return 0;
  }

  return 0;
}
