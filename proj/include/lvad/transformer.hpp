#pragma once

#include <functional>

#include "lvad/geometry.hpp"

namespace lvad {

// Curvature-aware linear map: the spatial part of x is multiplied by W and
// the time component is recomputed so the result lies exactly on the kappa2
// hyperboloid:
//   HTC(x; W, k1, k2) = ( sqrt((k1/k2) ||x_s W||^2 - 1/k2), sqrt(k1/k2) x_s W )
LorentzPoint htc(const LorentzPoint& x, const Mat& w, const Curvature& k1, const Curvature& k2);

// Same construction with an arbitrary spatial refinement function. Layer
// norm, activations and dropout all route through this.
LorentzPoint hrc(const LorentzPoint& x, const std::function<Vec(const Vec&)>& f_r,
                 const Curvature& k1, const Curvature& k2);

// (x + eps p) normalized back onto the hyperboloid by sqrt(|k|) ||.||_L.
LorentzPoint positional_encode(const LorentzPoint& x, const LorentzPoint& p, double eps,
                               const Curvature& kappa);

// Attention weights for one head. Rows of q and k are token points; the
// logit for (t, u) is (2 + 2 <q_t, k_u>_L) / sqrt(head_dim) + bias, softmaxed
// over u.
Mat attention_scores(const Mat& q, const Mat& k, double bias, int head_dim);

// Lorentzian-midpoint aggregation: row t of the result is the projection of
// sum_u a(t, u) v_u onto the hyperboloid.
Mat midpoint_aggregate(const Mat& a, const Mat& v, const Curvature& kappa);

// Spatial layer normalization used as HRC's refinement: zero mean, unit
// variance, then learned scale and shift.
Vec layernorm_spatial(const Vec& s, const Vec& scale, const Vec& shift);

inline constexpr double kLayerNormEps = 1e-12;

}  // namespace lvad
