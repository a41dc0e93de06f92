#include "lvad/frame_encoder.hpp"

#include <cmath>

#include "lvad/data.hpp"

namespace lvad {

namespace {
Mat uniform_init(int rows, int cols, double bound, Rng& rng) {
  Mat m(rows, cols);
  for (Eigen::Index j = 0; j < m.cols(); ++j)
    for (Eigen::Index i = 0; i < m.rows(); ++i) m(i, j) = rng.uniform(-bound, bound);
  return m;
}
}  // namespace

void init_encoder_params(ParamStore& ps, const std::vector<int>& widths, int input_dim, Rng& rng) {
  require(!widths.empty(), Errc::invalid_config, "encoder widths must be non-empty");
  int in = input_dim;
  for (size_t i = 0; i < widths.size(); ++i) {
    const double bound = 1.0 / std::sqrt(double(in));
    ps.add("enc.w" + std::to_string(i), uniform_init(in, widths[i], bound, rng), true, true);
    ps.add("enc.b" + std::to_string(i), uniform_init(1, widths[i], bound, rng), true, false);
    in = widths[i];
  }
}

Var build_encoder(Tape& t, Var points, const std::vector<int>& widths, ParamStore& ps,
                  int points_per_frame) {
  Var h = points;
  for (size_t i = 0; i < widths.size(); ++i) {
    Parameter* w = ps.find("enc.w" + std::to_string(i));
    Parameter* b = ps.find("enc.b" + std::to_string(i));
    require(w && b, Errc::invalid_argument, "encoder parameters missing from the store");
    h = t.add(t.matmul(h, t.parameter(*w)), t.broadcast_row(t.parameter(*b), int(t.val(h).rows())));
    if (i + 1 < widths.size()) h = t.relu(h);
  }
  return t.colwise_max_segments(h, points_per_frame);
}

Mat encode_frames(const Mat& stacked_points, int points_per_frame, const std::vector<int>& widths,
                  ParamStore& ps) {
  require(stacked_points.allFinite() && stacked_points.cols() == 3, Errc::invalid_frame,
          "encode_frames: input must be finite N x 3");
  Tape t;
  Var out = build_encoder(t, t.constant(stacked_points), widths, ps, points_per_frame);
  return t.val(out);
}

Vec encode_frame(const Mat& frame_points, const std::vector<int>& widths, ParamStore& ps) {
  validate_frame(PointCloudFrame{frame_points});
  return encode_frames(frame_points, int(frame_points.rows()), widths, ps).row(0).transpose();
}

TangentVector lift_to_tangent(const Vec& feature, const Curvature& kappa) {
  require(feature.allFinite(), Errc::invalid_argument, "lift_to_tangent: non-finite feature");
  Vec v = Vec::Zero(feature.size() + 1);
  v.tail(feature.size()) = feature;
  return TangentVector{origin(kappa, int(feature.size())), std::move(v)};
}

Mat embed_sequence(const Mat& features, const Curvature& kappa) {
  require(features.allFinite(), Errc::invalid_argument, "embed_sequence: non-finite features");
  const int d = int(features.cols());
  Mat out(features.rows(), d + 1);
  const LorentzPoint o = origin(kappa, d);
  for (Eigen::Index r = 0; r < features.rows(); ++r) {
    TangentVector v = lift_to_tangent(features.row(r).transpose(), kappa);
    out.row(r) = exp_map(o, v, kappa).coords.transpose();
  }
  return out;
}

}  // namespace lvad
