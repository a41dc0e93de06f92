#pragma once

#include <vector>

#include "lvad/geometry.hpp"
#include "lvad/params.hpp"
#include "lvad/rng.hpp"
#include "lvad/tape.hpp"

namespace lvad {

// Shared per-point MLP followed by coordinate-wise max pooling. `widths` is
// the full list of layer widths; the last entry is the feature dimension D.
// Rectified-linear between layers, linear final layer.

// Registers enc.w{i} / enc.b{i} parameters, initialized uniformly in
// [-1/sqrt(fan_in), +1/sqrt(fan_in)].
void init_encoder_params(ParamStore& ps, const std::vector<int>& widths, int input_dim, Rng& rng);

// Graph form. `points` holds one or more frames stacked row-wise, each
// exactly points_per_frame rows; output has one feature row per frame.
Var build_encoder(Tape& t, Var points, const std::vector<int>& widths, ParamStore& ps,
                  int points_per_frame);

// Convenience forward-only runs over the same graph path.
Mat encode_frames(const Mat& stacked_points, int points_per_frame, const std::vector<int>& widths,
                  ParamStore& ps);
Vec encode_frame(const Mat& frame_points, const std::vector<int>& widths, ParamStore& ps);

// [0, f] at the manifold origin; tangency holds exactly.
TangentVector lift_to_tangent(const Vec& feature, const Curvature& kappa);

// Rows of `features` are lifted to the tangent space at the origin and
// pushed through the exponential map. Output rows carry D+1 entries.
Mat embed_sequence(const Mat& features, const Curvature& kappa);

}  // namespace lvad
