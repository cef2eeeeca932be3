#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "chlab/quadrature.hpp"
#include "chlab/shapes.hpp"

using namespace chlab;

namespace {

// Oracle for the curvature of geodesic circles: outward radial Riccati
// kappa' = -kappa^2 + a with kappa ~ 1/r at 0, integrated in the reciprocal
// y = 1/kappa which satisfies y' = 1 - a y^2, y(0) = 0 (no singularity).
double circle_kappa_riccati(double a, double r) {
  double y = 0.0;
  const int steps = 20000;
  const double h = r / steps;
  auto f = [a](double yy) { return 1.0 - a * yy * yy; };
  for (int i = 0; i < steps; ++i) {
    const double k1 = f(y), k2 = f(y + 0.5 * h * k1), k3 = f(y + 0.5 * h * k2),
                 k4 = f(y + h * k3);
    y += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  }
  return 1.0 / y;
}

// hyperbolic area of the bounded domain of a star-shaped curve, Green-type
// quadrature in geodesic polar coordinates: A = int (cosh r(theta) - 1) dtheta
double polar_area(const ParametricHypersurface& G, int nsamples = 4096) {
  const SpaceForm& sf = G.space;
  double A = 0.0;
  Eigen::Vector2d prev_chart;
  double prev_theta = 0.0, prev_r = 0.0;
  for (int i = 0; i <= nsamples; ++i) {
    double ls;
    const CurvePiece& pc = locate_piece(G, static_cast<double>(i % nsamples) / nsamples, ls);
    Point p = sf.hyperbolic() ? project(sf, pc.pos(ls)) : Point{pc.pos(ls)};
    const double r = distance(sf, origin(sf), p);
    const Eigen::Vector2d c = to_chart(sf, p);
    double theta = std::atan2(c[1], c[0]);
    if (i > 0) {
      double dth = theta - prev_theta;
      while (dth > M_PI) dth -= 2.0 * M_PI;
      while (dth < -M_PI) dth += 2.0 * M_PI;
      const double rm = 0.5 * (r + prev_r);
      const double integrand =
          sf.hyperbolic() ? (sf_cs(sf.a(), rm) - 1.0) / sf.a() : 0.5 * rm * rm;
      A += integrand * dth;
    }
    prev_theta = theta;
    prev_r = r;
  }
  return std::abs(A);
}

}  // namespace

TEST_CASE("curvature_data closed forms") {
  SpaceForm e2(2, 0.0), h2(2, -1.0), e3(3, 0.0);

  for (double r : {0.5, 1.0, 2.0}) {
    auto c = make_circle(e2, r);
    for (double s : {0.0, 0.3, 0.77}) {
      const auto cs = curvature_data(c, s);
      CHECK(cs.gk == doctest::Approx(1.0 / r).epsilon(1e-12));
      CHECK(metric_norm(e2, cs.normal.vec) == doctest::Approx(1.0).epsilon(1e-10));
    }
  }

  // geodesic circle in H^2: kappa = coth r, against the radial Riccati oracle
  for (double r : {0.7, 1.0, 2.0}) {
    auto c = make_circle(h2, r);
    const auto cs = curvature_data(c, 0.19);
    CHECK(cs.gk == doctest::Approx(1.0 / std::tanh(r)).epsilon(1e-11));
    CHECK(cs.gk == doctest::Approx(circle_kappa_riccati(1.0, r)).epsilon(1e-8));
  }

  // round sphere in R^3
  auto s3 = make_sphere(e3, 2.0);
  const auto ss = curvature_data(s3, 0.4);
  CHECK(ss.principal_curvatures[0] == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(ss.principal_curvatures[1] == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(ss.gk == doctest::Approx(0.25).epsilon(1e-12));

  // torus: closed-form principal curvatures
  auto T = make_torus(e3, 2.0, 0.5);
  for (double s : {0.0, 0.2, 0.5, 0.8}) {
    const auto ts = curvature_data(T, s);
    const double t = 2.0 * M_PI * s;
    const double km = 1.0 / 0.5, kp = std::cos(t) / (2.0 + 0.5 * std::cos(t));
    CHECK(ts.gk == doctest::Approx(km * kp).epsilon(1e-10));
    CHECK(ts.mean == doctest::Approx(0.5 * (km + kp)).epsilon(1e-10));
  }

  // sample invariants: gk = prod kappa, sigma_0 = 1, (n-1)H = sigma_1,
  // generating identity prod(1 + t kappa_i) = sum sigma_r t^r
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  for (const auto* G : {&s3, &T}) {
    for (int i = 0; i < 20; ++i) {
      const auto cs = curvature_data(*G, unif(rng));
      CHECK(cs.sigmas[0] == 1.0);
      CHECK(cs.gk ==
            doctest::Approx(cs.principal_curvatures.prod()).epsilon(1e-12));
      CHECK((G->n() - 1) * cs.mean == doctest::Approx(cs.sigmas[1]).epsilon(1e-12));
      for (double t : {0.3, -0.7, 1.9}) {
        double lhs = 1.0, rhs = 0.0, tp = 1.0;
        for (int k = 0; k < cs.principal_curvatures.size(); ++k)
          lhs *= 1.0 + t * cs.principal_curvatures[k];
        for (int r = 0; r < cs.sigmas.size(); ++r, tp *= t) rhs += cs.sigmas[r] * tp;
        CHECK(lhs == doctest::Approx(rhs).epsilon(1e-9));
      }
    }
  }
}

TEST_CASE("total curvature closed forms") {
  SpaceForm e2(2, 0.0), h2(2, -1.0), e3(3, 0.0);

  CHECK(total_curvature(make_circle(e2, 0.37)) == doctest::Approx(2.0 * M_PI).epsilon(1e-10));
  CHECK(total_curvature(make_circle(e2, 3.0)) == doctest::Approx(2.0 * M_PI).epsilon(1e-10));

  for (double r : {0.5, 1.0, 2.0})
    CHECK(total_curvature(make_circle(h2, r)) ==
          doctest::Approx(2.0 * M_PI * std::cosh(r)).epsilon(1e-10));

  CHECK(total_curvature(make_sphere(e3, 1.7)) == doctest::Approx(4.0 * M_PI).epsilon(1e-12));

  // non-geodesic-sphere surface: torus has total curvature 0 (Gauss-Bonnet,
  // chi = 0), and total positive curvature 4 pi
  auto T = make_torus(e3, 2.0, 0.5);
  CHECK(std::abs(total_curvature(T, 4096)) < 1e-9);
  CHECK(total_positive_curvature(T, 4096) == doctest::Approx(4.0 * M_PI).epsilon(1e-5));
}

TEST_CASE("quermassintegrals") {
  SpaceForm h2(2, -1.0), e3(3, 0.0);
  auto c = make_circle(h2, 1.0);
  CHECK(quermassintegral(c, 0) == doctest::Approx(2.0 * M_PI * std::sinh(1.0)).epsilon(1e-10));
  CHECK(quermassintegral(c, 1) ==
        doctest::Approx(2.0 * M_PI * std::cosh(1.0)).epsilon(1e-10));
  CHECK(quermassintegral(c, 1) == doctest::Approx(total_curvature(c)).epsilon(1e-12));
  CHECK_THROWS_AS((void)quermassintegral(c, 2), std::invalid_argument);

  auto s = make_sphere(e3, 2.0);
  CHECK(quermassintegral(s, 0) == doctest::Approx(16.0 * M_PI).epsilon(1e-12));
  CHECK(quermassintegral(s, 1) == doctest::Approx(16.0 * M_PI).epsilon(1e-12));  // sigma_1 = 2/r = 1
  CHECK(quermassintegral(s, 2) == doctest::Approx(total_curvature(s)).epsilon(1e-12));
}

TEST_CASE("total positive curvature: non-convex curves") {
  SpaceForm e2(2, 0.0);
  auto lim = make_limacon(e2, 1.5, 1.0);  // dimpled, embedded
  CHECK(min_principal_curvature(lim) < -1e-3);  // genuinely non-convex

  const double g = total_curvature(lim, 8192);
  const double gp = total_positive_curvature(lim, 8192);
  CHECK(g == doctest::Approx(2.0 * M_PI).epsilon(1e-8));  // turning number
  CHECK(gp >= g);

  // direct oracle: quadrature with max(GK, 0) integrand
  const double oracle = integrate_samples(
      lim, 8192, [](const CurvatureSample& cs) { return std::max(cs.gk, 0.0); });
  CHECK(gp == doctest::Approx(oracle).epsilon(1e-12));

  // convex shapes: positive part equals the whole
  for (double r : {0.5, 2.0}) {
    auto c = make_circle(e2, r);
    CHECK(total_positive_curvature(c) == doctest::Approx(total_curvature(c)).epsilon(1e-12));
  }
}

TEST_CASE("convexity detection on built-ins") {
  SpaceForm e2(2, 0.0), h2(2, -1.0);
  CHECK(min_principal_curvature(make_circle(e2, 1.0)) >= -1e-8);
  CHECK(min_principal_curvature(make_ellipse(e2, 2.0, 1.0)) >= -1e-8);
  CHECK(min_principal_curvature(make_circle(h2, 2.0)) >= -1e-8);
  CHECK(min_principal_curvature(make_hellipse(h2, 0.6, 0.3)) >= -1e-8);
  CHECK(min_principal_curvature(make_stadium(h2, 1.0, 0.5)) >= -1e-8);
  CHECK(min_principal_curvature(make_stadium(e2, 1.0, 0.5)) >= -1e-8);
}

TEST_CASE("stadium pieces agree with closed forms") {
  SpaceForm h2(2, -1.0);
  auto st = make_stadium(h2, 1.0, 0.5);
  // caps are geodesic circles of radius r: kappa = coth(0.5)
  const auto cap = curvature_data(st, 0.1);  // inside first piece
  CHECK(cap.gk == doctest::Approx(1.0 / std::tanh(0.5)).epsilon(1e-10));
  // sides are equidistants of a geodesic: kappa = tanh(0.5)
  const auto side = curvature_data(st, 0.35);
  CHECK(side.gk == doctest::Approx(std::tanh(0.5)).epsilon(1e-10));
  // closed-form signed distance vanishes on the curve
  for (double s : {0.05, 0.3, 0.62, 0.9}) {
    double ls;
    const CurvePiece& pc = locate_piece(st, s, ls);
    CHECK(std::abs(st.sdist_exact(project(h2, pc.pos(ls)))) < 1e-12);
  }
}

TEST_CASE("Gauss-Bonnet at n=2 in H^2: total curvature = 2 pi + area") {
  SpaceForm h2(2, -1.0);
  struct Case {
    ParametricHypersurface G;
    double area_closed;  // negative: use polar quadrature
  };
  std::vector<Case> cases;
  cases.push_back({make_circle(h2, 1.0), 2.0 * M_PI * (std::cosh(1.0) - 1.0)});
  cases.push_back({make_hellipse(h2, 0.5, 0.25), -1.0});
  cases.push_back({make_limacon(h2, 1.0, 0.2), -1.0});  // convex for small dimple
  for (auto& c : cases) {
    const double tot = total_curvature(c.G, 4096);
    const double area = c.area_closed > 0 ? c.area_closed : polar_area(c.G);
    CHECK(std::abs(tot - (2.0 * M_PI + area)) < 1e-5);
  }
}

TEST_CASE("embedding regularity invariants") {
  SpaceForm h2(2, -1.0);
  auto G = make_hellipse(h2, 0.6, 0.35);
  // finite-difference second derivative of the embedding stays bounded and
  // matches the analytic d2 (C^2 parameterization)
  double ls;
  for (double s : {0.1, 0.45, 0.83}) {
    const CurvePiece& pc = locate_piece(G, s, ls);
    const double h = 1e-5;
    const Vec fd2 = (pc.pos(ls + h) - 2.0 * pc.pos(ls) + pc.pos(ls - h)) / (h * h);
    CHECK((fd2 - pc.d2(ls)).norm() < 1e-4 * (1.0 + pc.d2(ls).norm()));
    // unit normal
    const auto cs = curvature_data(G, s);
    CHECK(std::abs(metric_norm(h2, cs.normal.vec) - 1.0) < 1e-10);
    CHECK(std::abs(lorentz_dot(cs.normal.vec, cs.point.coords)) < 1e-10);
  }
}

TEST_CASE("convex hull in the Klein model") {
  SpaceForm e2(2, 0.0), h2(2, -1.0);

  // convex curve: hull returns the curve (Hausdorff distance below resolution)
  {
    auto c = make_ellipse(e2, 2.0, 1.0);
    auto H = convex_hull_2d(c, 512);
    for (auto t : H.tags) CHECK(t == PieceTag::HullArc);
    // vertices lie on the curve
    double worst = 0.0;
    for (int i = 0; i < 64; ++i) {
      double ls;
      const CurvePiece& pc = locate_piece(H.hull, (i + 0.5) / 64, ls);
      const Vec p = pc.pos(ls);
      const double d = std::abs(std::pow(p[0] / 2.0, 2) + p[1] * p[1] - 1.0);
      worst = std::max(worst, d);
    }
    CHECK(worst < 1e-3);
    CHECK(total_curvature(H.hull) == doctest::Approx(2.0 * M_PI).epsilon(1e-9));
  }

  // non-convex limacon in R^2: hull boundary total curvature exactly 2 pi
  {
    auto lim = make_limacon(e2, 1.5, 1.0);
    auto H = convex_hull_2d(lim, 2048);
    CHECK(total_curvature(H.hull) == doctest::Approx(2.0 * M_PI).epsilon(1e-10));
    bool has_bridge = false;
    for (auto t : H.tags) has_bridge |= (t == PieceTag::HullBridge);
    CHECK(has_bridge);
    // hull inequality with margin
    CHECK(total_positive_curvature(lim, 8192) >= total_curvature(H.hull) - 1e-9);
  }

  // star-shaped non-convex curve in H^2: G_+(Gamma) >= G(hull boundary)
  {
    auto star = make_limacon(h2, 1.7, 1.05);
    CHECK(min_principal_curvature(star) < 0.0);
    auto H = convex_hull_2d(star, 2048);
    const double gp = total_positive_curvature(star, 8192);
    const double gh = total_curvature(H.hull);
    CHECK(gp >= gh - 1e-9);
    // hull curvature lives only in the corner atoms (geodesic edges)
    const double smooth_part = integrate_samples(
        H.hull, 1024, [](const CurvatureSample& cs) { return cs.gk; });
    CHECK(std::abs(smooth_part) < 1e-12);
    CHECK(gh > 2.0 * M_PI);  // Gauss-Bonnet: 2 pi + enclosed area
  }

  // idempotence: hull of hull = hull (vertex sets agree to resolution)
  {
    auto lim = make_limacon(e2, 1.5, 1.0);
    auto H1 = convex_hull_2d(lim, 1024);
    auto H2 = convex_hull_2d(H1.hull, 1024);
    CHECK(std::abs(total_curvature(H2.hull) - total_curvature(H1.hull)) < 1e-9);
    const double a1 = polar_area(H1.hull), a2 = polar_area(H2.hull);
    CHECK(a1 == doctest::Approx(a2).epsilon(1e-4));
  }

  // degenerate input
  {
    ParametricHypersurface seg;
    seg.space = e2;
    seg.kind = ShapeKind::Curve;
    seg.pieces.push_back(detail::geodesic_piece(e2, Point{(Vec(2) << 0, 0).finished()},
                                                Point{(Vec(2) << 1, 0).finished()},
                                                PieceTag::Smooth));
    seg.corner_angles.assign(1, 0.0);
    CHECK_THROWS_AS((void)convex_hull_2d(seg, 64), std::runtime_error);
  }
}

TEST_CASE("registry round trip") {
  SpaceForm e2(2, 0.0), h2(2, -1.0), e3(3, 0.0);
  CHECK(make_shape(e2, "circle:1").spec == "circle:1");
  CHECK(make_shape(h2, "hellipse:0.6,0.3").pieces.size() == 1);
  CHECK(make_shape(e2, "stadium:1,0.5").pieces.size() == 4);
  CHECK(make_shape(e3, "sphere:2").kind == ShapeKind::GeodesicSphere);
  CHECK(make_shape(e3, "torus:2,0.5").kind == ShapeKind::Rotational);
  CHECK_THROWS_AS((void)make_shape(e2, "blob:1"), std::invalid_argument);
  CHECK_THROWS_AS((void)make_shape(h2, "ellipse:2,1"), std::invalid_argument);
  CHECK_THROWS_AS((void)make_shape(e2, "limacon:1,2"), std::invalid_argument);

  // inside tests through the chart polyline
  auto lim = make_shape(e2, "limacon:1.5,1");
  CHECK(contains(lim, Point{(Vec(2) << 0.5, 0.0).finished()}));
  CHECK(!contains(lim, Point{(Vec(2) << 3.0, 0.0).finished()}));
  auto hel = make_shape(h2, "hellipse:0.6,0.3");
  CHECK(contains(hel, origin(h2)));
  CHECK(!contains(hel, from_chart(h2, {0.8, 0.0})));
}

TEST_CASE("profile CSV") {
  SpaceForm e3(3, 0.0);
  // write a torus profile and check the spline reproduces its curvature
  const std::string path = "/tmp/chlab_test_profile.csv";
  {
    std::ofstream out(path);
    out.precision(17);
    out << "rho,z\n";
    const int N = 256;
    for (int i = 0; i < N; ++i) {
      const double t = 2.0 * M_PI * i / N;
      out << 2.0 + 0.5 * std::cos(t) << "," << 0.5 * std::sin(t) << "\n";
    }
  }
  auto G = make_shape(e3, "profile:" + path);
  const auto cs = curvature_data(G, 0.1251231);
  const double t = 2.0 * M_PI * 0.1251231;
  const double km = 2.0, kp = std::cos(t) / (2.0 + 0.5 * std::cos(t));
  CHECK(cs.gk == doctest::Approx(km * kp).epsilon(1e-3));
  CHECK(std::abs(total_curvature(G, 2048)) < 1e-4);
}
