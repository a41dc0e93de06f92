#include "lvad/pipeline.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>

#include "lvad/anomaly.hpp"
#include "lvad/checkpoint.hpp"
#include "lvad/data.hpp"
#include "lvad/model.hpp"

namespace fs = std::filesystem;

namespace lvad {

namespace {

SyntheticConfig base_synthetic(const ExperimentConfig& cfg, int frames) {
  SyntheticConfig s;
  s.frames = frames;
  s.points = cfg.model.points;
  s.actors = cfg.data.actors;
  s.speed_min = cfg.data.speed_min;
  s.speed_max = cfg.data.speed_max;
  s.radius = cfg.data.radius;
  s.noise_std = cfg.data.noise_std;
  s.onset_min = cfg.data.onset_min;
  s.onset_max = cfg.data.onset_max;
  return s;
}

std::string zero_pad(int v, int width) {
  std::string s = std::to_string(v);
  while (int(s.size()) < width) s.insert(s.begin(), '0');
  return s;
}

}  // namespace

void run_gen_data(const ExperimentConfig& cfg, const std::string& out_dir) {
  cfg.validate();
  fs::create_directories(fs::path(out_dir) / "train");
  fs::create_directories(fs::path(out_dir) / "test");

  for (int i = 0; i < cfg.data.train_sequences; ++i) {
    SyntheticConfig s = base_synthetic(cfg, cfg.data.train_frames);
    s.seed = splitmix64(splitmix64(cfg.train.seed ^ hash_label("data/train")) + uint64_t(i));
    const std::string id = "train_" + zero_pad(i, 4);
    write_sequence(generate_synthetic_video(s, id),
                   (fs::path(out_dir) / "train" / (id + ".pcvs")).string());
  }

  const int anomalous = int(std::lround(cfg.data.anomalous_fraction * cfg.data.test_sequences));
  for (int i = 0; i < cfg.data.test_sequences; ++i) {
    SyntheticConfig s = base_synthetic(cfg, cfg.data.test_frames);
    s.seed = splitmix64(splitmix64(cfg.train.seed ^ hash_label("data/test")) + uint64_t(i));
    if (i < anomalous && !cfg.data.anomaly_types.empty())
      s.anomaly = cfg.data.anomaly_types[size_t(i) % cfg.data.anomaly_types.size()];
    const std::string id = "test_" + zero_pad(i, 4);
    write_sequence(generate_synthetic_video(s, id),
                   (fs::path(out_dir) / "test" / (id + ".pcvs")).string());
  }
}

namespace {

struct LoadedSequence {
  SequenceRecord record;
};

// Reads a split and normalizes every frame to the configured point count.
std::vector<SequenceRecord> load_split(const ExperimentConfig& cfg, const std::string& data_dir,
                                       const std::string& split) {
  const std::string dir = (fs::path(data_dir) / split).string();
  std::vector<SequenceRecord> out;
  for (const auto& path : list_sequence_files(dir)) {
    SequenceRecord rec = read_sequence(path);
    for (size_t t = 0; t < rec.frames.size(); ++t) {
      if (rec.frames[t].rows() != cfg.model.points) {
        const uint64_t seed =
            splitmix64(cfg.train.seed ^ hash_label(rec.id + "/downsample")) + t;
        rec.frames[t] =
            downsample_frame(PointCloudFrame{rec.frames[t]}, cfg.model.points, seed).points;
      }
    }
    out.push_back(std::move(rec));
  }
  return out;
}

struct WindowRef {
  int sequence = 0;
  int start = 0;
};

std::vector<WindowRef> collect_windows(const std::vector<SequenceRecord>& seqs, int T) {
  std::vector<WindowRef> windows;
  for (size_t s = 0; s < seqs.size(); ++s) {
    const int len = int(seqs[s].frames.size());
    for (int start = 0; start + T < len; ++start) windows.push_back({int(s), start});
  }
  return windows;
}

Model::Batch assemble_batch(const ExperimentConfig& cfg,
                            const std::vector<SequenceRecord>& seqs,
                            const std::vector<WindowRef>& refs, size_t begin, size_t end) {
  const int T = cfg.model.frames;
  const int N = cfg.model.points;
  const int B = int(end - begin);
  Model::Batch batch;
  batch.count = B;
  batch.inputs.resize(Eigen::Index(B) * T * N, 3);
  const bool prediction = cfg.model.mode == TaskMode::prediction;
  if (prediction) batch.targets.resize(Eigen::Index(B) * N, 3);
  for (int b = 0; b < B; ++b) {
    const WindowRef& w = refs[begin + size_t(b)];
    const SequenceRecord& seq = seqs[size_t(w.sequence)];
    for (int f = 0; f < T; ++f)
      batch.inputs.middleRows(Eigen::Index(b) * T * N + Eigen::Index(f) * N, N) =
          seq.frames[size_t(w.start + f)];
    if (prediction)
      batch.targets.middleRows(Eigen::Index(b) * N, N) = seq.frames[size_t(w.start + T)];
    else
      batch.labels.push_back(seq.labels[size_t(w.start + T)]);
  }
  return batch;
}

}  // namespace

TrainOutcome run_training(const ExperimentConfig& cfg, const std::string& data_dir,
                          const std::string& checkpoint_out, const std::string& log_out) {
  cfg.validate();
  const std::vector<SequenceRecord> seqs = load_split(cfg, data_dir, "train");
  const std::vector<WindowRef> windows = collect_windows(seqs, cfg.model.frames);
  require(!windows.empty(), Errc::data_not_found,
          "training split holds no windows of frames+1 consecutive frames");

  Model model(cfg.model, cfg.train.seed);
  const uint64_t steps_per_epoch =
      (windows.size() + size_t(cfg.train.batch) - 1) / size_t(cfg.train.batch);
  AdamWConfig ocfg;
  ocfg.base_lr = cfg.train.lr;
  ocfg.weight_decay = cfg.train.weight_decay;
  ocfg.horizon = std::max<uint64_t>(1, steps_per_epoch * uint64_t(cfg.train.epochs));
  AdamW opt(model.params(), ocfg);

  std::ofstream log(log_out, std::ios::trunc);
  require(bool(log), Errc::io_error, "cannot open training log: " + log_out);
  char line[160];

  TrainOutcome outcome;
  std::vector<size_t> order(windows.size());
  for (size_t i = 0; i < order.size(); ++i) order[i] = i;

  for (int epoch = 0; epoch < cfg.train.epochs; ++epoch) {
    Rng shuffle_rng = Rng::derive(cfg.train.seed, "shuffle", uint64_t(epoch));
    for (size_t i = order.size(); i > 1; --i)
      std::swap(order[i - 1], order[shuffle_rng.uniform_index(i)]);

    double loss_sum = 0.0;
    size_t window_count = 0;
    for (size_t begin = 0; begin < order.size(); begin += size_t(cfg.train.batch)) {
      const size_t end = std::min(order.size(), begin + size_t(cfg.train.batch));
      std::vector<WindowRef> refs;
      refs.reserve(end - begin);
      for (size_t i = begin; i < end; ++i) refs.push_back(windows[order[i]]);
      Model::Batch batch = assemble_batch(cfg, seqs, refs, 0, refs.size());

      Tape tape;
      Rng dropout_rng = Rng::derive(cfg.train.seed, "dropout", opt.step_count());
      Model::Forward f = model.forward(tape, batch, true, &dropout_rng, true);
      const double loss = tape.scalar(f.loss);
      loss_sum += loss * double(batch.count);
      window_count += size_t(batch.count);

      model.params().zero_grads();
      tape.backward(f.loss);
      opt.step();
    }
    const double mean_loss = loss_sum / double(window_count);
    outcome.epoch_mean_loss.push_back(mean_loss);
    std::snprintf(line, sizeof line, "epoch %d mean_loss %.17g lr %.17g\n", epoch, mean_loss,
                  opt.lr_at(opt.step_count()));
    log << line;
  }
  outcome.steps = opt.step_count();

  CheckpointMeta meta;
  meta.config_text = cfg.text.empty() ? default_config_text() : cfg.text;
  meta.step = opt.step_count();
  save_checkpoint(checkpoint_out, model.params(), &opt, meta);
  return outcome;
}

void run_scoring(const ExperimentConfig& cfg, const std::string& checkpoint_path,
                 const std::string& data_dir, const std::string& split,
                 const std::string& out_dir) {
  cfg.validate();
  Model model(cfg.model, cfg.train.seed);
  load_checkpoint(checkpoint_path, model.params(), nullptr);

  const std::vector<SequenceRecord> seqs = load_split(cfg, data_dir, split);
  fs::create_directories(out_dir);
  const int T = cfg.model.frames;

  for (const SequenceRecord& seq : seqs) {
    const int len = int(seq.frames.size());
    require(len >= T + 1, Errc::invalid_window,
            "video " + seq.id + " is shorter than frames+1 and cannot be scored");
    std::vector<WindowRef> refs;
    for (int start = 0; start + T < len; ++start) refs.push_back({0, start});

    std::vector<SequenceRecord> one{seq};
    std::vector<double> raw(size_t(len), 0.0);
    for (size_t begin = 0; begin < refs.size(); begin += size_t(cfg.train.batch)) {
      const size_t end = std::min(refs.size(), begin + size_t(cfg.train.batch));
      std::vector<WindowRef> chunk(refs.begin() + long(begin), refs.begin() + long(end));
      Model::Batch batch = assemble_batch(cfg, one, chunk, 0, chunk.size());
      std::vector<double> scores = model.score_windows(batch);
      for (size_t i = 0; i < scores.size(); ++i)
        raw[size_t(chunk[i].start + T)] = scores[i];
    }
    for (int i = 0; i < T; ++i) raw[size_t(i)] = raw[size_t(T)];  // forward fill warm-up

    ScoreSeries series;
    series.video_id = seq.id;
    series.raw = raw;
    series.smoothed = moving_average(raw, cfg.train.window);
    series.labels = seq.labels;
    write_score_file((fs::path(out_dir) / (seq.id + ".scores.csv")).string(), series);
  }
}

EvalReport run_eval(const std::string& scores_dir, const std::string& data_dir,
                    const std::string& report_out) {
  require(fs::is_directory(scores_dir), Errc::data_not_found,
          "no such scores directory: " + scores_dir);
  std::vector<std::string> files;
  for (const auto& e : fs::directory_iterator(scores_dir)) {
    const std::string name = e.path().filename().string();
    if (name.size() > 11 && name.substr(name.size() - 11) == ".scores.csv")
      files.push_back(e.path().string());
  }
  require(!files.empty(), Errc::data_not_found, "no .scores.csv files under " + scores_dir);
  std::sort(files.begin(), files.end());

  std::map<std::string, std::string> category_of;
  if (!data_dir.empty()) {
    for (const auto& path : list_sequence_files(data_dir)) {
      SequenceRecord rec = read_sequence(path);
      const std::string cat = rec.meta_value("category");
      if (!cat.empty()) category_of[rec.id] = cat;
    }
  }

  std::vector<double> raw, smoothed;
  std::vector<uint8_t> labels;
  std::map<std::string, std::vector<size_t>> by_category;
  for (const auto& f : files) {
    ScoreSeries s = read_score_file(f);
    auto cat = category_of.find(s.video_id);
    for (size_t t = 0; t < s.raw.size(); ++t) {
      if (cat != category_of.end()) by_category[cat->second].push_back(raw.size());
      raw.push_back(s.raw[t]);
      smoothed.push_back(s.smoothed[t]);
      labels.push_back(s.labels[t]);
    }
  }

  EvalReport report;
  report.frames = raw.size();
  for (uint8_t l : labels) report.positives += l ? 1 : 0;
  report.auroc_raw = auroc(raw, labels);
  report.auroc_smoothed = auroc(smoothed, labels);

  for (const auto& [cat, idx] : by_category) {
    if (cat == "normal") continue;  // normal sequences join every anomaly category's negatives
    std::vector<double> craw, csmoothed;
    std::vector<uint8_t> clabels;
    for (size_t i : idx) {
      craw.push_back(raw[i]);
      csmoothed.push_back(smoothed[i]);
      clabels.push_back(labels[i]);
    }
    if (by_category.count("normal")) {
      for (size_t i : by_category.at("normal")) {
        craw.push_back(raw[i]);
        csmoothed.push_back(smoothed[i]);
        clabels.push_back(labels[i]);
      }
    }
    CategoryResult result;
    result.name = cat;
    result.frames = craw.size();
    for (uint8_t l : clabels) result.positives += l ? 1 : 0;
    try {
      result.auroc_raw = auroc(craw, clabels);
      result.auroc_smoothed = auroc(csmoothed, clabels);
      report.categories.push_back(result);
    } catch (const Error& e) {
      if (e.code() != Errc::degenerate_labels) throw;
      report.warnings.push_back("category '" + cat + "' skipped: " + e.what());
    }
  }

  if (!report_out.empty()) {
    std::ofstream os(report_out, std::ios::trunc);
    require(bool(os), Errc::io_error, "cannot open report for writing: " + report_out);
    os << report.to_csv();
    require(bool(os), Errc::io_error, "failed writing report: " + report_out);
  }
  return report;
}

FiniteDiffReport run_check_grad(const ExperimentConfig& cfg, double fd_step) {
  cfg.validate();
  Model model(cfg.model, cfg.train.seed);
  const int T = cfg.model.frames;
  const int N = cfg.model.points;

  Rng data_rng = Rng::derive(cfg.train.seed, "check-grad-data");
  Model::Batch batch;
  batch.count = 1;
  batch.inputs.resize(Eigen::Index(T) * N, 3);
  for (Eigen::Index i = 0; i < batch.inputs.rows(); ++i)
    for (int d = 0; d < 3; ++d) batch.inputs(i, d) = data_rng.uniform(-1.0, 1.0);
  if (cfg.model.mode == TaskMode::prediction) {
    batch.targets.resize(N, 3);
    for (Eigen::Index i = 0; i < batch.targets.rows(); ++i)
      for (int d = 0; d < 3; ++d) batch.targets(i, d) = data_rng.uniform(-1.0, 1.0);
  } else {
    batch.labels = {uint8_t(data_rng.uniform01() < 0.5 ? 0 : 1)};
  }

  auto evaluate = [&]() {
    Tape tape;
    // A fixed stream keeps dropout masks identical across re-evaluations.
    Rng dropout_rng = Rng::derive(cfg.train.seed, "check-grad-dropout");
    Model::Forward f = model.forward(tape, batch, true, &dropout_rng, true);
    return tape.scalar(f.loss);
  };

  model.params().zero_grads();
  {
    Tape tape;
    Rng dropout_rng = Rng::derive(cfg.train.seed, "check-grad-dropout");
    Model::Forward f = model.forward(tape, batch, true, &dropout_rng, true);
    tape.backward(f.loss);
  }
  return finite_diff_check(evaluate, model.params(), fd_step);
}

std::string report_params(const ExperimentConfig& cfg) {
  Model model(cfg.model, cfg.train.seed);
  return model.param_breakdown();
}

}  // namespace lvad
