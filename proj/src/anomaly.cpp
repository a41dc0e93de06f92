#include "lvad/anomaly.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

namespace lvad {

std::vector<double> moving_average(const std::vector<double>& raw, int w) {
  require(w >= 1, Errc::invalid_window, "moving_average: window must be >= 1");
  std::vector<double> out(raw.size());
  double acc = 0.0;
  for (size_t t = 0; t < raw.size(); ++t) {
    acc += raw[t];
    if (t >= size_t(w)) acc -= raw[t - size_t(w)];
    const size_t len = std::min(t + 1, size_t(w));
    out[t] = acc / double(len);
  }
  return out;
}

double loss_lorentzian(const Mat& pred_rows, const Mat& target_rows, const Curvature& kappa) {
  require(pred_rows.rows() == target_rows.rows() && pred_rows.cols() == target_rows.cols(),
          Errc::invalid_dimension, "loss_lorentzian: shape mismatch");
  require(pred_rows.rows() >= 1, Errc::invalid_argument, "loss_lorentzian: empty batch");
  double total = 0.0;
  for (Eigen::Index i = 0; i < pred_rows.rows(); ++i)
    total += lorentz_distance(LorentzPoint{pred_rows.row(i).transpose()},
                              LorentzPoint{target_rows.row(i).transpose()}, kappa);
  return total / double(pred_rows.rows());
}

double loss_mse(const Vec& pred, const Vec& target) {
  require(pred.size() == target.size(), Errc::invalid_dimension, "loss_mse: length mismatch");
  return (pred - target).squaredNorm() / double(pred.size());
}

namespace {

Model::Batch single_window(const Model& model, const Mat& window_points, const Mat* target) {
  const auto& cfg = model.config();
  Model::Batch batch;
  batch.count = 1;
  require(window_points.rows() == Eigen::Index(cfg.frames) * cfg.points &&
              window_points.cols() == 3,
          Errc::invalid_dimension, "window must stack frames*points rows of 3");
  batch.inputs = window_points;
  if (target) {
    require(target->rows() == cfg.points && target->cols() == 3, Errc::invalid_dimension,
            "target frame must be points x 3");
    batch.targets = *target;
  }
  return batch;
}

}  // namespace

Vec decode(Model& model, const Mat& window_points) {
  Tape t;
  Model::Batch batch = single_window(model, window_points, nullptr);
  Model::Forward f = model.forward(t, batch, false, nullptr, false);
  return t.val(f.pred).row(0).transpose();
}

double anomaly_score_prediction(Model& model, const Mat& window_points, const Mat& target_frame) {
  require(model.config().mode == TaskMode::prediction, Errc::invalid_argument,
          "anomaly_score_prediction requires a prediction-mode model");
  Tape t;
  Model::Batch batch = single_window(model, window_points, &target_frame);
  Model::Forward f = model.forward(t, batch, false, nullptr, true);
  return t.val(f.scores)(0, 0);
}

double anomaly_score_classification(Model& model, const Mat& window_points) {
  require(model.config().mode == TaskMode::classification, Errc::invalid_argument,
          "anomaly_score_classification requires a classification-mode model");
  Tape t;
  Model::Batch batch = single_window(model, window_points, nullptr);
  Model::Forward f = model.forward(t, batch, false, nullptr, false);
  return t.val(f.scores)(0, 0);
}

void write_score_file(const std::string& path, const ScoreSeries& series) {
  require(series.raw.size() == series.smoothed.size() && series.raw.size() == series.labels.size(),
          Errc::invalid_argument, "score series columns differ in length");
  std::ofstream os(path, std::ios::trunc);
  require(bool(os), Errc::io_error, "cannot open score file for writing: " + path);
  os << "video_id,frame_index,raw_score,smoothed_score,label\n";
  char line[256];
  for (size_t t = 0; t < series.raw.size(); ++t) {
    std::snprintf(line, sizeof line, "%s,%zu,%.17g,%.17g,%d\n", series.video_id.c_str(), t,
                  series.raw[t], series.smoothed[t], series.labels[t] ? 1 : 0);
    os << line;
  }
  require(bool(os), Errc::io_error, "failed writing score file: " + path);
}

ScoreSeries read_score_file(const std::string& path) {
  std::ifstream is(path);
  require(bool(is), Errc::data_not_found, "cannot open score file: " + path);
  std::string line;
  require(bool(std::getline(is, line)), Errc::corrupt_file, "empty score file: " + path);
  require(line == "video_id,frame_index,raw_score,smoothed_score,label", Errc::corrupt_file,
          "unexpected score file header in " + path);
  ScoreSeries s;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string field;
    std::vector<std::string> fields;
    while (std::getline(ls, field, ',')) fields.push_back(field);
    require(fields.size() == 5, Errc::corrupt_file, "malformed score row in " + path);
    if (s.video_id.empty()) s.video_id = fields[0];
    s.raw.push_back(std::stod(fields[2]));
    s.smoothed.push_back(std::stod(fields[3]));
    s.labels.push_back(uint8_t(std::stoi(fields[4]) ? 1 : 0));
  }
  require(!s.raw.empty(), Errc::corrupt_file, "score file has no rows: " + path);
  return s;
}

}  // namespace lvad
