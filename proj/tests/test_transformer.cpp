#include <cmath>

#include "doctest.h"
#include "lvad/rng.hpp"
#include "lvad/transformer.hpp"

using namespace lvad;

namespace {

Vec v3(double a, double b, double c) {
  Vec v(3);
  v << a, b, c;
  return v;
}

LorentzPoint from_spatial(const Vec& s, const Curvature& k) {
  Vec c(s.size() + 1);
  c[0] = std::sqrt(s.squaredNorm() - 1.0 / k.value());
  c.tail(s.size()) = s;
  return LorentzPoint{c};
}

LorentzPoint random_point(Rng& rng, int n, const Curvature& k, double scale = 2.0) {
  Vec s(n);
  for (int i = 0; i < n; ++i) s[i] = rng.uniform(-scale, scale);
  return from_spatial(s, k);
}

}  // namespace

TEST_CASE("htc") {
  Curvature k1(-1), k2(-4);

  SUBCASE("the origin maps to the origin for any weight") {
    Rng rng(3);
    Mat w(2, 5);
    for (Eigen::Index i = 0; i < w.size(); ++i) w(i) = rng.uniform(-1, 1);
    LorentzPoint out = htc(origin(k1, 2), w, k1, k2);
    CHECK(out.coords[0] == doctest::Approx(0.5).epsilon(1e-14));
    CHECK(out.coords.tail(5).cwiseAbs().maxCoeff() == 0.0);
  }

  SUBCASE("identity weight at equal curvature is the identity on the manifold") {
    LorentzPoint x{v3(std::cosh(1), std::sinh(1), 0)};
    LorentzPoint out = htc(x, Mat::Identity(2, 2), k1, k1);
    CHECK((out.coords - x.coords).cwiseAbs().maxCoeff() < 1e-12);
  }

  SUBCASE("curvature transition follows the closed form") {
    LorentzPoint x{v3(std::cosh(1), std::sinh(1), 0)};
    LorentzPoint out = htc(x, Mat::Identity(2, 2), k1, k2);
    const double s = std::sinh(1.0) / 2.0;
    CHECK(out.coords[1] == doctest::Approx(s).epsilon(1e-14));
    CHECK(out.coords[0] == doctest::Approx(std::sqrt(std::sinh(1.0) * std::sinh(1.0) / 4 + 0.25))
                               .epsilon(1e-14));
    CHECK(std::abs(lorentz_inner(out.coords, out.coords) - 1.0 / k2.value()) < 1e-12);
  }

  SUBCASE("outputs land on the target manifold for random weights") {
    Rng rng(11);
    for (double kv2 : {-0.25, -1.0, -4.0}) {
      Curvature kt(kv2);
      for (int i = 0; i < 100; ++i) {
        LorentzPoint x = random_point(rng, 4, k1);
        Mat w(4, 3);
        for (Eigen::Index j = 0; j < w.size(); ++j) w(j) = rng.uniform(-2, 2);
        LorentzPoint out = htc(x, w, k1, kt);
        CHECK(check_on_manifold(out.coords, kt, 1e-8));
      }
    }
  }
}

TEST_CASE("hrc") {
  Curvature k(-1);

  SUBCASE("identity refinement reproduces on-manifold inputs") {
    Rng rng(5);
    LorentzPoint x = random_point(rng, 3, k);
    LorentzPoint out = hrc(x, [](const Vec& s) { return s; }, k, k);
    CHECK((out.coords - x.coords).cwiseAbs().maxCoeff() < 1e-12);
  }

  SUBCASE("rectification that zeroes the spatial part yields the origin") {
    LorentzPoint x{v3(std::sqrt(2.0), -1, 0)};
    LorentzPoint out = hrc(x, [](const Vec& s) { return s.cwiseMax(0.0).eval(); }, k, k);
    CHECK(out.coords[0] == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(out.coords.tail(2).cwiseAbs().maxCoeff() == 0.0);
  }

  SUBCASE("the zero map yields the origin") {
    Rng rng(6);
    LorentzPoint x = random_point(rng, 3, k);
    LorentzPoint out = hrc(x, [](const Vec& s) { return Vec::Zero(s.size()).eval(); }, k, k);
    CHECK(out.coords == origin(k, 3).coords);
  }
}

TEST_CASE("positional_encode") {
  Curvature k(-1);
  LorentzPoint o = origin(k, 2);

  SUBCASE("eps = 0 returns the input unchanged") {
    Rng rng(7);
    LorentzPoint x = random_point(rng, 2, k);
    CHECK(positional_encode(x, o, 0.0, k).coords == x.coords);
  }

  SUBCASE("midpoint of two copies of the origin is the origin") {
    LorentzPoint out = positional_encode(o, o, 1.0, k);
    CHECK((out.coords - o.coords).cwiseAbs().maxCoeff() < 1e-15);
  }

  SUBCASE("numeric normalization keeps the point on the manifold") {
    LorentzPoint x{v3(std::cosh(1), std::sinh(1), 0)};
    LorentzPoint out = positional_encode(x, o, 1.0, k);
    CHECK(std::abs(lorentz_inner(out.coords, out.coords) + 1.0) < 1e-12);
    CHECK(out.coords[0] > 0);
  }
}

TEST_CASE("attention_scores") {
  Curvature k(-1);

  SUBCASE("identical tokens give uniform rows") {
    Mat q(3, 3);
    for (int i = 0; i < 3; ++i) q.row(i) = v3(1, 0, 0).transpose();
    Mat a = attention_scores(q, q, 0.7, 4);
    for (int t = 0; t < 3; ++t)
      for (int u = 0; u < 3; ++u) CHECK(a(t, u) == doctest::Approx(1.0 / 3).epsilon(1e-12));
  }

  SUBCASE("two-token closed form") {
    // Row 0 of the weights equals the logistic of the logit difference.
    const int dh = 4;
    Mat q(1, 3);
    q.row(0) = v3(1, 0, 0).transpose();
    Mat kk(2, 3);
    kk.row(0) = v3(1, 0, 0).transpose();
    kk.row(1) = v3(std::cosh(2), std::sinh(2), 0).transpose();
    Mat a = attention_scores(q, kk, 0.3, dh);
    const double gap = 2.0 * (std::cosh(2.0) - 1.0) / std::sqrt(double(dh));
    const double expected = 1.0 / (1.0 + std::exp(-gap));
    CHECK(a(0, 0) == doctest::Approx(expected).epsilon(1e-12));
    CHECK(a(0, 0) + a(0, 1) == doctest::Approx(1.0).epsilon(1e-12));
  }

  SUBCASE("shift invariance in the bias") {
    Rng rng(9);
    Mat q(4, 4), kk(4, 4);
    for (int i = 0; i < 4; ++i) {
      q.row(i) = random_point(rng, 3, k).coords.transpose();
      kk.row(i) = random_point(rng, 3, k).coords.transpose();
    }
    Mat a0 = attention_scores(q, kk, 0.0, 2);
    Mat a1 = attention_scores(q, kk, 5.0, 2);
    CHECK((a0 - a1).cwiseAbs().maxCoeff() < 1e-12);
  }

  SUBCASE("rows are stochastic") {
    Rng rng(10);
    Mat q(5, 4), kk(5, 4);
    for (int i = 0; i < 5; ++i) {
      q.row(i) = random_point(rng, 3, k).coords.transpose();
      kk.row(i) = random_point(rng, 3, k).coords.transpose();
    }
    Mat a = attention_scores(q, kk, -0.2, 2);
    for (int t = 0; t < 5; ++t) {
      CHECK(a.row(t).sum() == doctest::Approx(1.0).epsilon(1e-9));
      CHECK(a.row(t).minCoeff() >= 0.0);
      CHECK(a.row(t).maxCoeff() <= 1.0);
    }
  }
}

TEST_CASE("midpoint_aggregate") {
  Curvature k(-1);
  Rng rng(12);

  SUBCASE("one-hot rows recover the attended value exactly") {
    Mat v(3, 4);
    for (int i = 0; i < 3; ++i) v.row(i) = random_point(rng, 3, k).coords.transpose();
    Mat a = Mat::Zero(3, 3);
    a(0, 2) = 1;
    a(1, 0) = 1;
    a(2, 1) = 1;
    Mat out = midpoint_aggregate(a, v, k);
    CHECK((out.row(0) - v.row(2)).cwiseAbs().maxCoeff() < 1e-12);
    CHECK((out.row(1) - v.row(0)).cwiseAbs().maxCoeff() < 1e-12);
    CHECK((out.row(2) - v.row(1)).cwiseAbs().maxCoeff() < 1e-12);
  }

  SUBCASE("identical values are a fixed point") {
    LorentzPoint p = random_point(rng, 3, k);
    Mat v(3, 4);
    for (int i = 0; i < 3; ++i) v.row(i) = p.coords.transpose();
    Mat a = Mat::Constant(2, 3, 1.0 / 3);
    Mat out = midpoint_aggregate(a, v, k);
    for (int i = 0; i < 2; ++i) CHECK((out.row(i) - p.coords.transpose()).cwiseAbs().maxCoeff() < 1e-12);
  }

  SUBCASE("uniform midpoint minimizes the weighted squared distance on the geodesic") {
    // Grid-search oracle along the geodesic between the two inputs.
    LorentzPoint a{v3(1, 0, 0)};
    LorentzPoint b{v3(std::cosh(2), std::sinh(2), 0)};
    Mat v(2, 3);
    v.row(0) = a.coords.transpose();
    v.row(1) = b.coords.transpose();
    Mat w = Mat::Constant(1, 2, 0.5);
    Mat out = midpoint_aggregate(w, v, k);

    Vec expected = (a.coords + b.coords) / 2.0;
    expected = project_unit_hyperboloid(expected, k).coords;
    CHECK((out.row(0).transpose() - expected).cwiseAbs().maxCoeff() < 1e-12);

    auto objective = [&](const LorentzPoint& z) {
      const double d1 = lorentz_distance(z, a, k);
      const double d2 = lorentz_distance(z, b, k);
      return 0.5 * d1 * d1 + 0.5 * d2 * d2;
    };
    const double at_mid = objective(LorentzPoint{out.row(0).transpose()});
    TangentVector dir = log_map(a, b, k);
    for (int i = 0; i <= 200; ++i) {
      const double s = double(i) / 200.0;
      TangentVector scaled{a, s * dir.vec};
      LorentzPoint z = exp_map(a, scaled, k);
      CHECK(objective(z) >= at_mid - 1e-9);
    }
  }
}

TEST_CASE("layernorm_spatial normalizes before scale and shift") {
  Rng rng(14);
  Vec s(8);
  for (int i = 0; i < 8; ++i) s[i] = rng.uniform(-3, 3);
  Vec ones = Vec::Ones(8), zeros = Vec::Zero(8);
  Vec n = layernorm_spatial(s, ones, zeros);
  CHECK(n.mean() == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(n.squaredNorm() / 8.0 == doctest::Approx(1.0).epsilon(1e-9));

  Curvature k(-1);
  LorentzPoint x = random_point(rng, 8, k);
  LorentzPoint out = hrc(
      x, [&](const Vec& sp) { return layernorm_spatial(sp, ones, zeros); }, k, k);
  CHECK(std::abs(lorentz_inner(out.coords, out.coords) + 1.0) < 1e-10);
}
