#pragma once

#include <string>
#include <vector>

#include "lvad/config.hpp"
#include "lvad/eval.hpp"
#include "lvad/optimizer.hpp"

namespace lvad {

// Writes train/ (normal-only) and test/ (mixed) synthetic splits under
// out_dir, deterministically from the config seed.
void run_gen_data(const ExperimentConfig& cfg, const std::string& out_dir);

struct TrainOutcome {
  std::vector<double> epoch_mean_loss;
  uint64_t steps = 0;
};

// Slides windows over the training split, optimizes the configured loss with
// AdamW under cosine annealing, writes a per-epoch log and a checkpoint.
TrainOutcome run_training(const ExperimentConfig& cfg, const std::string& data_dir,
                          const std::string& checkpoint_out, const std::string& log_out);

// Scores every video of a split with a trained checkpoint and writes one
// score file per video into out_dir. Frames before the first full window
// receive the first computable score.
void run_scoring(const ExperimentConfig& cfg, const std::string& checkpoint_path,
                 const std::string& data_dir, const std::string& split,
                 const std::string& out_dir);

// Pools all score files, computes raw and smoothed AUROC, and adds a
// per-category breakdown when sequence metadata is reachable through
// data_dir (pass "" to skip). Writes the machine-readable report when
// report_out is non-empty.
EvalReport run_eval(const std::string& scores_dir, const std::string& data_dir,
                    const std::string& report_out);

// Builds a small seeded instance of the configured model and verifies
// reverse-mode gradients against central differences.
FiniteDiffReport run_check_grad(const ExperimentConfig& cfg, double fd_step);

// Trainable parameter counts for the configured model.
std::string report_params(const ExperimentConfig& cfg);

}  // namespace lvad
