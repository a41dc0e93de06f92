#include "lvad/config.hpp"

#include <fstream>
#include <sstream>

namespace lvad {

const char* space_name(Space s) { return s == Space::hyperbolic ? "hyperbolic" : "euclidean"; }
const char* loss_name(LossKind l) { return l == LossKind::lorentzian ? "lorentzian" : "mse"; }
const char* mode_name(TaskMode m) { return m == TaskMode::prediction ? "prediction" : "classification"; }

void ModelConfig::validate() const {
  require(layers >= 0, Errc::invalid_config, "model.layers must be >= 0");
  require(heads >= 1, Errc::invalid_config, "model.heads must be >= 1");
  require(channels >= 2, Errc::invalid_config, "model.channels must be >= 2");
  require(frames >= 1, Errc::invalid_config, "model.frames must be >= 1");
  require(points >= 1, Errc::invalid_config, "model.points must be >= 1");
  require(epsilon >= 0, Errc::invalid_config, "model.epsilon must be >= 0");
  require(dropout >= 0 && dropout < 1, Errc::invalid_config, "model.dropout must be in [0, 1)");
  require(ambient() % heads == 0, Errc::invalid_config,
          "model.heads must divide channels + 1 (got " + std::to_string(heads) + " and " +
              std::to_string(ambient()) + ")");
  require(head_dim() >= 2, Errc::invalid_config, "per-head width (channels+1)/heads must be >= 2");
  for (int w : encoder_hidden)
    require(w >= 1, Errc::invalid_config, "model.encoder_hidden entries must be >= 1");
}

void ExperimentConfig::validate() const {
  model.validate();
  require(train.epochs >= 0, Errc::invalid_config, "train.epochs must be >= 0");
  require(train.lr > 0, Errc::invalid_config, "train.lr must be positive");
  require(train.batch >= 1, Errc::invalid_config, "train.batch must be >= 1");
  require(train.weight_decay >= 0, Errc::invalid_config, "train.weight_decay must be >= 0");
  require(train.window >= 1, Errc::invalid_window, "train.window must be >= 1");
  require(data.train_sequences >= 0 && data.test_sequences >= 0, Errc::invalid_config,
          "data sequence counts must be >= 0");
  require(data.anomalous_fraction >= 0 && data.anomalous_fraction <= 1, Errc::invalid_config,
          "data.anomalous_fraction must be in [0, 1]");
  require(data.train_frames >= model.frames + 1 && data.test_frames >= model.frames + 1,
          Errc::invalid_config, "sequences must cover at least frames+1 frames");
  for (const auto& a : data.anomaly_types)
    require(a == "velocity-jump" || a == "teleport" || a == "shape-collapse" || a == "extra-object",
            Errc::invalid_config, "unknown anomaly type '" + a + "'");
  require(data.onset_min >= 1 && data.onset_min <= data.onset_max &&
              data.onset_max < data.test_frames,
          Errc::invalid_config, "data onset range must lie within [1, test_frames)");
}

namespace {

std::string trim(const std::string& s) {
  size_t b = s.find_first_not_of(" \t\r");
  size_t e = s.find_last_not_of(" \t\r");
  return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::istringstream is(s);
  std::string item;
  while (std::getline(is, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

double parse_num(const std::string& v, const std::string& key) {
  size_t pos = 0;
  double d = 0;
  try {
    d = std::stod(v, &pos);
  } catch (...) {
    fail(Errc::invalid_config, "value of '" + key + "' is not a number: " + v);
  }
  require(pos == v.size(), Errc::invalid_config, "trailing characters in value of '" + key + "'");
  return d;
}

int parse_int(const std::string& v, const std::string& key) {
  double d = parse_num(v, key);
  require(d == double(long long(d)), Errc::invalid_config, "'" + key + "' must be an integer");
  return int(d);
}

bool parse_bool(const std::string& v, const std::string& key) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  fail(Errc::invalid_config, "'" + key + "' must be a boolean, got " + v);
}

}  // namespace

ExperimentConfig parse_config_text(const std::string& text) {
  ExperimentConfig cfg;
  cfg.text = text;
  std::istringstream is(text);
  std::string line, section;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      require(line.back() == ']', Errc::invalid_config,
              "line " + std::to_string(lineno) + ": malformed section header");
      section = trim(line.substr(1, line.size() - 2));
      require(section == "model" || section == "train" || section == "data" ||
                  section == "foreground_mask",
              Errc::invalid_config, "unknown section [" + section + "]");
      continue;
    }
    auto eq = line.find('=');
    require(eq != std::string::npos, Errc::invalid_config,
            "line " + std::to_string(lineno) + ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    require(!key.empty(), Errc::invalid_config, "line " + std::to_string(lineno) + ": empty key");

    if (section == "model") {
      if (key == "space") {
        if (value == "hyperbolic") cfg.model.space = Space::hyperbolic;
        else if (value == "euclidean") cfg.model.space = Space::euclidean;
        else fail(Errc::invalid_config, "model.space must be hyperbolic or euclidean");
      } else if (key == "loss") {
        if (value == "lorentzian") cfg.model.loss = LossKind::lorentzian;
        else if (value == "mse") cfg.model.loss = LossKind::mse;
        else fail(Errc::invalid_config, "model.loss must be lorentzian or mse");
      } else if (key == "mode") {
        if (value == "prediction") cfg.model.mode = TaskMode::prediction;
        else if (value == "classification") cfg.model.mode = TaskMode::classification;
        else fail(Errc::invalid_config, "model.mode must be prediction or classification");
      } else if (key == "layers") cfg.model.layers = parse_int(value, key);
      else if (key == "heads") cfg.model.heads = parse_int(value, key);
      else if (key == "channels") cfg.model.channels = parse_int(value, key);
      else if (key == "frames") cfg.model.frames = parse_int(value, key);
      else if (key == "points") cfg.model.points = parse_int(value, key);
      else if (key == "decoder_hidden") cfg.model.decoder_hidden = parse_int(value, key);
      else if (key == "epsilon") cfg.model.epsilon = parse_num(value, key);
      else if (key == "positional") cfg.model.positional = parse_bool(value, key);
      else if (key == "dropout") cfg.model.dropout = parse_num(value, key);
      else if (key == "encoder_hidden") {
        cfg.model.encoder_hidden.clear();
        for (const auto& w : split_list(value))
          cfg.model.encoder_hidden.push_back(parse_int(w, key));
      } else fail(Errc::invalid_config, "unknown key model." + key);
    } else if (section == "train") {
      if (key == "epochs") cfg.train.epochs = parse_int(value, key);
      else if (key == "lr") cfg.train.lr = parse_num(value, key);
      else if (key == "batch") cfg.train.batch = parse_int(value, key);
      else if (key == "seed") cfg.train.seed = uint64_t(parse_num(value, key));
      else if (key == "weight_decay") cfg.train.weight_decay = parse_num(value, key);
      else if (key == "window") cfg.train.window = parse_int(value, key);
      else fail(Errc::invalid_config, "unknown key train." + key);
    } else if (section == "data") {
      if (key == "train_sequences") cfg.data.train_sequences = parse_int(value, key);
      else if (key == "test_sequences") cfg.data.test_sequences = parse_int(value, key);
      else if (key == "anomalous_fraction") cfg.data.anomalous_fraction = parse_num(value, key);
      else if (key == "train_frames") cfg.data.train_frames = parse_int(value, key);
      else if (key == "test_frames") cfg.data.test_frames = parse_int(value, key);
      else if (key == "actors") cfg.data.actors = parse_int(value, key);
      else if (key == "speed_min") cfg.data.speed_min = parse_num(value, key);
      else if (key == "speed_max") cfg.data.speed_max = parse_num(value, key);
      else if (key == "radius") cfg.data.radius = parse_num(value, key);
      else if (key == "noise_std") cfg.data.noise_std = parse_num(value, key);
      else if (key == "onset_min") cfg.data.onset_min = parse_int(value, key);
      else if (key == "onset_max") cfg.data.onset_max = parse_int(value, key);
      else if (key == "anomaly_types") cfg.data.anomaly_types = split_list(value);
      else fail(Errc::invalid_config, "unknown key data." + key);
    } else if (section == "foreground_mask") {
      cfg.foreground_mask.emplace_back(key, value);
    } else {
      fail(Errc::invalid_config, "line " + std::to_string(lineno) + ": key outside any section");
    }
  }
  cfg.validate();
  return cfg;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream is(path);
  require(bool(is), Errc::data_not_found, "cannot open config file " + path);
  std::ostringstream buf;
  buf << is.rdbuf();
  return parse_config_text(buf.str());
}

std::string default_config_text() {
  return R"([model]
space = hyperbolic
loss = lorentzian
mode = prediction
layers = 4
heads = 8
channels = 256
frames = 3
points = 2048
encoder_hidden = 64,128
decoder_hidden = 0
epsilon = 1.0
positional = true
dropout = 0.1

[train]
epochs = 400
lr = 1e-4
batch = 8
seed = 0
weight_decay = 0.01
window = 10

[data]
train_sequences = 200
test_sequences = 80
anomalous_fraction = 0.5
train_frames = 8
test_frames = 25
actors = 2
speed_min = 0.05
speed_max = 0.15
radius = 0.25
noise_std = 0.01
anomaly_types = velocity-jump,teleport,shape-collapse,extra-object
onset_min = 10
onset_max = 14

# Parameters of the external depth foreground segmenter; carried through
# verbatim for tools that run it, unused here.
[foreground_mask]
K = 1.25
K_kinect = 5e-4
dP_max = 100
alpha = 0.4
T_W = 300
N_H = 90
)";
}

}  // namespace lvad
