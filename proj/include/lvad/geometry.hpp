#pragma once

#include "lvad/common.hpp"

namespace lvad {

// Residual tolerance for all manifold membership checks (64-bit arithmetic).
inline constexpr double kManifoldTol = 1e-8;

// Below this tangent norm the exponential map switches to its first-order
// series; below beta = 1 + kLogBranchTol the logarithmic map uses the limit
// coefficient 1 (removable singularity of arcosh(b)/sqrt(b^2-1)).
inline constexpr double kExpBranchTol = 1e-7;
inline constexpr double kLogBranchTol = 1e-7;

// Negative constant curvature of a Lorentz-model hyperboloid.
class Curvature {
 public:
  explicit Curvature(double kappa) : kappa_(kappa) {
    require(std::isfinite(kappa) && kappa < 0.0, Errc::invalid_curvature,
            "curvature must be finite and strictly negative, got " + std::to_string(kappa));
  }
  double value() const { return kappa_; }

 private:
  double kappa_;
};

// A point on the upper hyperboloid sheet. coords[0] is the time axis.
struct LorentzPoint {
  Vec coords;
  int spatial_dim() const { return int(coords.size()) - 1; }
};

// A vector Lorentz-orthogonal to its base point.
struct TangentVector {
  LorentzPoint base;
  Vec vec;
};

// <x,y>_L = -x0*y0 + sum_{i>=1} xi*yi
double lorentz_inner(const Vec& x, const Vec& y);

// sqrt(|<v,v>_L|)
double lorentz_norm(const Vec& v);

// (sqrt(-1/kappa), 0, ..., 0), the manifold origin with n spatial axes.
LorentzPoint origin(const Curvature& kappa, int n);

// true iff |<x,x>_L - 1/kappa| <= tol and x0 > 0.
bool check_on_manifold(const Vec& x, const Curvature& kappa, double tol);

// cosh(a) x + sinh(a) v/a with a = sqrt(-kappa <v,v>_L). v must be spacelike
// or zero and tangent at x.
LorentzPoint exp_map(const LorentzPoint& x, const TangentVector& v, const Curvature& kappa);

// arcosh(b)/sqrt(b^2-1) * (y - b x) with b = kappa <x,y>_L.
TangentVector log_map(const LorentzPoint& x, const LorentzPoint& y, const Curvature& kappa);

// arcosh(kappa <x,y>_L), the Lorentzian intrinsic distance. The argument is
// clamped to 1 from below so coincident points give exactly 0.
double lorentz_distance(const LorentzPoint& x, const LorentzPoint& y, const Curvature& kappa);

// v / (sqrt(|kappa|) ||v||_L) for timelike upper v; lands exactly on the
// kappa hyperboloid. This is the Lorentzian midpoint normalization.
LorentzPoint project_unit_hyperboloid(const Vec& v, const Curvature& kappa);

namespace detail {
inline void check_same_dim(const Vec& x, const Vec& y, const char* where) {
  require(x.size() == y.size() && x.size() >= 2, Errc::invalid_dimension,
          std::string(where) + ": vectors must share a length >= 2");
}
}  // namespace detail

}  // namespace lvad
