#include "lvad/transformer.hpp"

#include <cmath>

namespace lvad {

namespace {

LorentzPoint lift_spatial(const Vec& scaled_spatial, const Curvature& k2) {
  Vec out(scaled_spatial.size() + 1);
  out[0] = std::sqrt(scaled_spatial.squaredNorm() - 1.0 / k2.value());
  out.tail(scaled_spatial.size()) = scaled_spatial;
  return LorentzPoint{std::move(out)};
}

}  // namespace

LorentzPoint htc(const LorentzPoint& x, const Mat& w, const Curvature& k1, const Curvature& k2) {
  require(w.rows() == x.spatial_dim(), Errc::invalid_dimension,
          "htc: weight rows must match the spatial dimension");
  require(w.cols() >= 1, Errc::invalid_dimension, "htc: weight must have at least one column");
  const Vec s = std::sqrt(k1.value() / k2.value()) *
                (x.coords.tail(x.spatial_dim()).transpose() * w).transpose();
  return lift_spatial(s, k2);
}

LorentzPoint hrc(const LorentzPoint& x, const std::function<Vec(const Vec&)>& f_r,
                 const Curvature& k1, const Curvature& k2) {
  const Vec refined = f_r(x.coords.tail(x.spatial_dim()));
  require(refined.allFinite(), Errc::invalid_argument, "hrc: refinement produced non-finite values");
  return lift_spatial(std::sqrt(k1.value() / k2.value()) * refined, k2);
}

LorentzPoint positional_encode(const LorentzPoint& x, const LorentzPoint& p, double eps,
                               const Curvature& kappa) {
  require(eps >= 0, Errc::invalid_argument, "positional_encode: eps must be >= 0");
  if (eps == 0.0) return x;
  return project_unit_hyperboloid(x.coords + eps * p.coords, kappa);
}

Mat attention_scores(const Mat& q, const Mat& k, double bias, int head_dim) {
  require(q.cols() == k.cols(), Errc::invalid_dimension, "attention_scores: width mismatch");
  require(head_dim >= 1, Errc::invalid_dimension, "attention_scores: head_dim must be >= 1");
  const double inv = 1.0 / std::sqrt(double(head_dim));
  Mat logits(q.rows(), k.rows());
  for (Eigen::Index t = 0; t < q.rows(); ++t)
    for (Eigen::Index u = 0; u < k.rows(); ++u) {
      double inner = -q(t, 0) * k(u, 0);
      for (Eigen::Index c = 1; c < q.cols(); ++c) inner += q(t, c) * k(u, c);
      logits(t, u) = (2.0 + 2.0 * inner) * inv + bias;
    }
  for (Eigen::Index t = 0; t < logits.rows(); ++t) {
    const double m = logits.row(t).maxCoeff();
    logits.row(t) = (logits.row(t).array() - m).exp();
    logits.row(t) /= logits.row(t).sum();
  }
  return logits;
}

Mat midpoint_aggregate(const Mat& a, const Mat& v, const Curvature& kappa) {
  require(a.cols() == v.rows(), Errc::invalid_dimension, "midpoint_aggregate: shape mismatch");
  Mat out(a.rows(), v.cols());
  for (Eigen::Index t = 0; t < a.rows(); ++t) {
    Vec acc = (a.row(t) * v).transpose();
    out.row(t) = project_unit_hyperboloid(acc, kappa).coords.transpose();
  }
  return out;
}

Vec layernorm_spatial(const Vec& s, const Vec& scale, const Vec& shift) {
  require(scale.size() == s.size() && shift.size() == s.size(), Errc::invalid_dimension,
          "layernorm_spatial: parameter length mismatch");
  const double mean = s.mean();
  const Vec centered = s.array() - mean;
  const double var = centered.squaredNorm() / double(s.size());
  const Vec normed = centered / std::sqrt(var + kLayerNormEps);
  return (normed.array() * scale.array() + shift.array()).matrix();
}

}  // namespace lvad
