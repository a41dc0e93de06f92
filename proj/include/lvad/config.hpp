#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "lvad/common.hpp"

namespace lvad {

enum class Space { hyperbolic, euclidean };
enum class LossKind { lorentzian, mse };
enum class TaskMode { prediction, classification };

struct ModelConfig {
  Space space = Space::hyperbolic;
  LossKind loss = LossKind::lorentzian;
  TaskMode mode = TaskMode::prediction;
  int layers = 4;
  int heads = 8;
  int channels = 256;  // Euclidean feature dimension D; tokens carry D+1 entries
  int frames = 3;      // input window length T
  int points = 2048;   // points per frame after downsampling
  std::vector<int> encoder_hidden = {64, 128};
  int decoder_hidden = 0;  // 0 selects 2*(D+1)
  double epsilon = 1.0;    // positional encoding scale
  bool positional = true;
  double dropout = 0.1;

  int ambient() const { return channels + 1; }
  int head_dim() const { return ambient() / heads; }
  int decoder_width() const { return decoder_hidden > 0 ? decoder_hidden : 2 * ambient(); }
  std::vector<int> encoder_widths() const {
    auto w = encoder_hidden;
    w.push_back(channels);
    return w;
  }
  void validate() const;
};

struct TrainConfig {
  int epochs = 30;
  double lr = 1e-4;
  int batch = 8;
  uint64_t seed = 0;
  double weight_decay = 1e-2;
  int window = 10;  // moving-average width used when scoring
};

struct DataConfig {
  int train_sequences = 200;
  int test_sequences = 80;
  double anomalous_fraction = 0.5;
  int train_frames = 8;
  int test_frames = 25;
  int actors = 2;
  double speed_min = 0.05;
  double speed_max = 0.15;
  double radius = 0.25;
  double noise_std = 0.01;
  std::vector<std::string> anomaly_types = {"velocity-jump", "teleport", "shape-collapse",
                                            "extra-object"};
  int onset_min = 10;
  int onset_max = 14;
};

// The full experiment description parsed from a sectioned key=value file.
// `text` preserves the file verbatim for checkpoint and report provenance.
struct ExperimentConfig {
  ModelConfig model;
  TrainConfig train;
  DataConfig data;
  // Parameters of the external depth foreground segmenter, carried through
  // verbatim; nothing in this library consumes them.
  std::vector<std::pair<std::string, std::string>> foreground_mask;
  std::string text;

  void validate() const;
};

ExperimentConfig parse_config_text(const std::string& text);
ExperimentConfig load_config(const std::string& path);
std::string default_config_text();

const char* space_name(Space s);
const char* loss_name(LossKind l);
const char* mode_name(TaskMode m);

}  // namespace lvad
