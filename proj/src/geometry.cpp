#include "lvad/geometry.hpp"

#include <cmath>

namespace lvad {

const char* errc_name(Errc e) {
  switch (e) {
    case Errc::ok: return "Ok";
    case Errc::invalid_argument: return "InvalidArgument";
    case Errc::invalid_dimension: return "InvalidDimension";
    case Errc::invalid_curvature: return "InvalidCurvature";
    case Errc::invalid_tangent: return "InvalidTangent";
    case Errc::not_on_manifold: return "NotOnManifold";
    case Errc::numerical_domain: return "NumericalDomain";
    case Errc::not_timelike: return "NotTimelike";
    case Errc::invalid_frame: return "InvalidFrame";
    case Errc::invalid_window: return "InvalidWindow";
    case Errc::invalid_config: return "InvalidConfig";
    case Errc::non_finite_gradient: return "NonFiniteGradient";
    case Errc::degenerate_labels: return "DegenerateLabels";
    case Errc::empty_frame: return "EmptyFrame";
    case Errc::unsupported_version: return "UnsupportedVersion";
    case Errc::corrupt_file: return "CorruptFile";
    case Errc::data_not_found: return "DataNotFound";
    case Errc::incompatible_checkpoint: return "IncompatibleCheckpoint";
    case Errc::io_error: return "IoError";
  }
  return "Unknown";
}

double lorentz_inner(const Vec& x, const Vec& y) {
  detail::check_same_dim(x, y, "lorentz_inner");
  double s = -x[0] * y[0];
  for (Eigen::Index i = 1; i < x.size(); ++i) s += x[i] * y[i];
  return s;
}

double lorentz_norm(const Vec& v) { return std::sqrt(std::abs(lorentz_inner(v, v))); }

LorentzPoint origin(const Curvature& kappa, int n) {
  require(n >= 1, Errc::invalid_dimension, "origin: spatial dimension must be >= 1");
  Vec c = Vec::Zero(n + 1);
  c[0] = std::sqrt(-1.0 / kappa.value());
  return LorentzPoint{std::move(c)};
}

bool check_on_manifold(const Vec& x, const Curvature& kappa, double tol) {
  if (x.size() < 2 || !(x[0] > 0.0)) return false;
  return std::abs(lorentz_inner(x, x) - 1.0 / kappa.value()) <= tol;
}

LorentzPoint exp_map(const LorentzPoint& x, const TangentVector& v, const Curvature& kappa) {
  detail::check_same_dim(x.coords, v.vec, "exp_map");
  const double vv = lorentz_inner(v.vec, v.vec);
  require(vv >= -kManifoldTol, Errc::invalid_tangent,
          "exp_map: tangent must be spacelike or zero, <v,v>_L = " + std::to_string(vv));
  const double alpha = std::sqrt(std::max(0.0, -kappa.value() * vv));
  if (alpha < kExpBranchTol) {
    // sinh(a)/a -> 1; first-order series avoids the 0/0.
    return LorentzPoint{x.coords + v.vec};
  }
  return LorentzPoint{std::cosh(alpha) * x.coords + (std::sinh(alpha) / alpha) * v.vec};
}

TangentVector log_map(const LorentzPoint& x, const LorentzPoint& y, const Curvature& kappa) {
  detail::check_same_dim(x.coords, y.coords, "log_map");
  require(check_on_manifold(x.coords, kappa, kManifoldTol), Errc::not_on_manifold,
          "log_map: base point is not on the manifold");
  require(check_on_manifold(y.coords, kappa, kManifoldTol), Errc::not_on_manifold,
          "log_map: target point is not on the manifold");
  const double beta = kappa.value() * lorentz_inner(x.coords, y.coords);
  require(beta >= 1.0 - kManifoldTol, Errc::numerical_domain,
          "log_map: kappa<x,y>_L = " + std::to_string(beta) + " is below 1");
  double coeff = 1.0;
  if (beta >= 1.0 + kLogBranchTol) {
    coeff = std::acosh(beta) / std::sqrt(beta * beta - 1.0);
  }
  return TangentVector{x, coeff * (y.coords - beta * x.coords)};
}

double lorentz_distance(const LorentzPoint& x, const LorentzPoint& y, const Curvature& kappa) {
  detail::check_same_dim(x.coords, y.coords, "lorentz_distance");
  require(check_on_manifold(x.coords, kappa, kManifoldTol), Errc::not_on_manifold,
          "lorentz_distance: first point is not on the manifold");
  require(check_on_manifold(y.coords, kappa, kManifoldTol), Errc::not_on_manifold,
          "lorentz_distance: second point is not on the manifold");
  const double arg = std::max(1.0, kappa.value() * lorentz_inner(x.coords, y.coords));
  return std::acosh(arg);
}

LorentzPoint project_unit_hyperboloid(const Vec& v, const Curvature& kappa) {
  require(v.size() >= 2, Errc::invalid_dimension, "project_unit_hyperboloid: length must be >= 2");
  const double vv = lorentz_inner(v, v);
  require(vv < 0.0 && v[0] > 0.0, Errc::not_timelike,
          "project_unit_hyperboloid: input must be timelike with positive time component");
  // v / (sqrt(|k|) ||v||_L) == v / sqrt(k <v,v>_L); the latter form lands on
  // the hyperboloid exactly.
  return LorentzPoint{v / std::sqrt(kappa.value() * vv)};
}

}  // namespace lvad
