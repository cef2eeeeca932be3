#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "chlab/distance_field.hpp"
#include "chlab/moreau.hpp"

using namespace chlab;

namespace {
std::mt19937_64 rng(5);

double huber(double rho, double t) {
  return rho <= t ? rho * rho / (2.0 * t) : rho - 0.5 * t;
}
}  // namespace

TEST_CASE("prox basics") {
  SpaceForm e2(2, 0.0), h2(2, -1.0);

  // x a minimum point of u: x* = x
  {
    auto u = make_radial2(e2, origin(e2));
    const auto pr = prox(u, 0.7, origin(e2));
    CHECK(distance(e2, pr.x_star, origin(e2)) < 1e-10);
    CHECK(pr.converged);
  }

  // u = rho in R^n, rho(x) > t: x* on the segment x0 x at distance t from x
  {
    auto u = make_point_distance(e2, origin(e2));
    for (double rho : {1.0, 2.5}) {
      const double t = 0.5;
      Point x{(Vec(2) << rho, 0.0).finished()};
      const auto pr = prox(u, t, x);
      CHECK(distance(e2, x, pr.x_star) == doctest::Approx(t).epsilon(1e-9));
      CHECK(pr.x_star.coords[0] == doctest::Approx(rho - t).epsilon(1e-9));
      CHECK(std::abs(pr.x_star.coords[1]) < 1e-9);
    }
  }

  // d-convex field in H^2: prox agrees with a 1D radial golden-section oracle
  {
    auto G = std::make_shared<ParametricHypersurface>(make_shape(h2, "circle:1"));
    auto u = make_sdist_field(G);
    CHECK(u.convex_hint);
    const double t = 0.4;
    const Mat E = tangent_basis(h2, origin(h2));
    for (double rho : {0.3, 0.9, 1.7, 2.4}) {
      Point x = exp_map(h2, origin(h2), {origin(h2).coords, rho * E.col(0)});
      const auto pr = prox(u, t, x);
      // radial 1D oracle: minimize (s - 1) + d(rho, s)^2/(2 t) over s >= 0
      auto fr = [&](double s) { return (s - 1.0) + (rho - s) * (rho - s) / (2.0 * t); };
      double a = 0.0, b = rho + 1.0;
      for (int it = 0; it < 200; ++it) {
        const double c1 = b - 0.618033988749895 * (b - a);
        const double c2 = a + 0.618033988749895 * (b - a);
        (fr(c1) < fr(c2) ? b : a) = (fr(c1) < fr(c2) ? c2 : c1);
      }
      const double sstar = 0.5 * (a + b);
      CHECK(distance(h2, pr.x_star, origin(h2)) == doctest::Approx(sstar).epsilon(1e-7));
      CHECK(pr.value == doctest::Approx(fr(sstar)).epsilon(1e-9));
    }
  }

  // non-convex field refused without force
  {
    auto G = std::make_shared<ParametricHypersurface>(make_shape(e2, "limacon:1.5,1"));
    auto u = make_sdist_field(G);
    CHECK(!u.convex_hint);
    CHECK_THROWS_AS((void)prox(u, 0.3, origin(e2)), std::invalid_argument);
    const auto pr = prox(u, 0.3, origin(e2), /*force=*/true);
    CHECK(pr.value <= u.eval(origin(e2)) + 1e-12);
  }
}

TEST_CASE("envelope: Huber closed form") {
  SpaceForm e1like(2, 0.0);  // R^2 restricted to an axis reproduces the 1D case
  auto u = make_point_distance(e1like, origin(e1like));
  const double t = 1.0;
  CHECK(envelope(u, t, Point{(Vec(2) << 0.5, 0.0).finished()}) ==
        doctest::Approx(0.125).epsilon(1e-12));
  CHECK(envelope(u, t, Point{(Vec(2) << 2.0, 0.0).finished()}) ==
        doctest::Approx(1.5).epsilon(1e-12));

  // max error over a radial sweep, both regimes
  for (double tt : {0.3, 1.0}) {
    double worst = 0.0;
    for (double rho = 0.05; rho < 2.5; rho += 0.1) {
      Point x{(Vec(2) << rho * 0.6, rho * 0.8).finished()};
      worst = std::max(worst, std::abs(envelope(u, tt, x) - huber(rho, tt)));
    }
    CHECK(worst < 1e-9);
  }

  // hyperbolic point distance has the same Huber envelope (radial reduction)
  SpaceForm h2(2, -1.0);
  auto uh = make_point_distance(h2, origin(h2));
  const Mat E = tangent_basis(h2, origin(h2));
  for (double rho : {0.2, 0.8, 1.9}) {
    Point x = exp_map(h2, origin(h2), {origin(h2).coords, rho * E.col(1)});
    CHECK(envelope(uh, 0.5, x) == doctest::Approx(huber(rho, 0.5)).epsilon(1e-9));
  }
}

TEST_CASE("semigroup and scaling identities") {
  SpaceForm h2(2, -1.0);
  auto G = std::make_shared<ParametricHypersurface>(make_shape(h2, "circle:1"));
  auto u = make_sdist_field(G);
  const double t = 0.3, s = 0.2;
  const ScalarField ut = make_moreau_field(u, t);

  for (int i = 0; i < 12; ++i) {
    const Point x = sample_ball(h2, rng, 2.0);
    // semigroup: (u~t)~s = u~(t+s)
    const double lhs = envelope(ut, s, x);
    const double rhs = envelope(u, t + s, x);
    CHECK(std::abs(lhs - rhs) < 1e-7);
  }

  // scaling: (lambda u)~t = lambda u~(lambda t)
  const double lam = 1.7;
  ScalarField lu = u;
  auto base_eval = u.eval;
  lu.eval = [base_eval, lam](const Point& p) { return lam * base_eval(p); };
  auto base_grad = u.grad_exact;
  lu.grad_exact = [base_grad, lam](const Point& p) { return Vec(lam * base_grad(p)); };
  lu.lipschitz = lam;
  for (int i = 0; i < 12; ++i) {
    const Point x = sample_ball(h2, rng, 2.0);
    const double lhs = envelope(lu, t, x);
    const double rhs = lam * envelope(u, lam * t, x);
    CHECK(std::abs(lhs - rhs) < 1e-8);
  }
}

TEST_CASE("envelope identities for distance fields") {
  SpaceForm h2(2, -1.0);
  auto G = std::make_shared<ParametricHypersurface>(make_shape(h2, "circle:1"));
  auto u = make_sdist_field(G);
  const double t = 0.4;
  const Mat E = tangent_basis(h2, origin(h2));

  // u~t = u - t/2 at points farther than t from the cut locus (the center)
  for (double rho : {0.5, 1.2, 2.0}) {
    Point x = exp_map(h2, origin(h2), {origin(h2).coords, rho * E.col(0)});
    CHECK(std::abs(envelope(u, t, x) - (u.eval(x) - 0.5 * t)) < 1e-8);
  }
  // inside the collar the identity fails (quadratic regime)
  {
    Point x = exp_map(h2, origin(h2), {origin(h2).coords, 0.1 * E.col(0)});
    CHECK(std::abs(envelope(u, t, x) - (u.eval(x) - 0.5 * t)) > 1e-3);
  }

  // monotonicity in t, pointwise below u, infima equal
  {
    Point x = exp_map(h2, origin(h2), {origin(h2).coords, 1.3 * E.col(0)});
    double prev = u.eval(x);
    for (double tt : {0.1, 0.2, 0.4, 0.8}) {
      const double e = envelope(u, tt, x);
      CHECK(e <= prev + 1e-12);
      prev = e;
    }
    // the minimum value -1 (at the center) is preserved
    CHECK(envelope(u, 0.5, origin(h2)) == doctest::Approx(-1.0).epsilon(1e-9));
  }

  // envelope convexity: second differences along random geodesics >= -1e-7
  {
    const ScalarField m = make_moreau_field(u, t);
    double worst = 0.0;
    for (int i = 0; i < 200; ++i) {
      const Point p = sample_ball(h2, rng, 1.6);
      const Point q = sample_ball(h2, rng, 1.6);
      if (distance(h2, p, q) < 0.2) continue;
      const Tangent l = log_map(h2, p, q);
      double vals[5];
      for (int k = 0; k < 5; ++k)
        vals[k] = m.eval(exp_map(h2, p, {p.coords, (0.2 + 0.15 * k) * l.vec}));
      for (int k = 1; k < 4; ++k)
        worst = std::min(worst, vals[k + 1] - 2.0 * vals[k] + vals[k - 1]);
    }
    CHECK(worst > -1e-7);
  }
}

TEST_CASE("envelope report battery") {
  SpaceForm e2(2, 0.0), h2(2, -1.0);

  // u = rho in R^2, t = 0.5: all checks clean against the Huber oracle
  {
    auto u = make_point_distance(e2, origin(e2));
    const auto rep = envelope_report(u, 0.5, 1000, 2.0, 23);
    CHECK(rep.ball_violations == 0);
    CHECK(rep.nonexp_violations == 0);
    CHECK(rep.grad_violations == 0);
    CHECK(rep.lip_violations == 0);
    CHECK(rep.hessian_violations == 0);
    CHECK(rep.semiconcavity_C == doctest::Approx(1.0));  // Euclidean limit
    CHECK(rep.max_grad_norm <= 1.0 + 1e-6);
    CHECK(rep.grad_checked > 500);
  }

  // d-convex field in H^2: |grad u~| <= 1 + 1e-6 and C/t Hessian bound
  {
    auto G = std::make_shared<ParametricHypersurface>(make_shape(h2, "circle:1"));
    auto u = make_sdist_field(G);
    const auto rep = envelope_report(u, 0.4, 400, 2.0, 29);
    CHECK(rep.ball_violations == 0);
    CHECK(rep.nonexp_violations == 0);
    CHECK(rep.lip_violations == 0);
    CHECK(rep.max_grad_norm <= 1.0 + 1e-6);
    CHECK(rep.hessian_violations == 0);
    CHECK(rep.worst_hessian <= rep.semiconcavity_C / 0.4 * 1.05);
  }
}
