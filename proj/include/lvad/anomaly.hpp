#pragma once

#include <string>
#include <vector>

#include "lvad/geometry.hpp"
#include "lvad/model.hpp"

namespace lvad {

// Per-frame anomaly scores for one video, raw and smoothed, with labels.
struct ScoreSeries {
  std::string video_id;
  std::vector<double> raw;
  std::vector<double> smoothed;
  std::vector<uint8_t> labels;
};

// smoothed[t] = mean(raw[max(0, t-w+1) .. t]); the window truncates at the
// start of the series.
std::vector<double> moving_average(const std::vector<double>& raw, int w);

// Mean Lorentzian intrinsic distance over row-paired points.
double loss_lorentzian(const Mat& pred_rows, const Mat& target_rows, const Curvature& kappa);

// Mean squared difference over all entries.
double loss_mse(const Vec& pred, const Vec& target);

// Decoder output for a single window (forward-only). Prediction mode returns
// the decoded manifold point; classification mode returns a one-entry vector
// holding the logit.
Vec decode(Model& model, const Mat& window_points);

// Lorentzian distance between the decoded prediction and the target frame
// embedded with the same encoder and exponential map as the inputs.
double anomaly_score_prediction(Model& model, const Mat& window_points, const Mat& target_frame);

// Logistic squashing of the classification decoder logit; in (0, 1).
double anomaly_score_classification(Model& model, const Mat& window_points);

// Delimited score file, one row per frame:
//   video_id,frame_index,raw_score,smoothed_score,label
void write_score_file(const std::string& path, const ScoreSeries& series);
ScoreSeries read_score_file(const std::string& path);

}  // namespace lvad
