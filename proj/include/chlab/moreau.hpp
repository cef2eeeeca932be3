#pragma once

#include <memory>
#include <random>

#include "chlab/scalar_field.hpp"

namespace chlab {

struct ProxResult {
  Point x_star;
  double value = 0.0;  // F(x*) = u(x*) + d^2(x, x*)/(2t)
  int iterations = 0;
  bool converged = false;
};

namespace detail {

inline double prox_objective(const ScalarField& u, double t, const Point& x, const Point& y) {
  const double d = distance(u.space, x, y);
  return u.eval(y) + d * d / (2.0 * t);
}

// exhaustive polar-grid fallback over the ball B(x, tL), n = 2 only
inline Point prox_polar_scan(const ScalarField& u, double t, const Point& x, double radius) {
  const Mat E = tangent_basis(u.space, x);
  Point best = x;
  double fbest = prox_objective(u, t, x, x);
  for (int ir = 1; ir <= 48; ++ir)
    for (int ia = 0; ia < 96; ++ia) {
      const double r = radius * ir / 48.0, ph = 2.0 * M_PI * ia / 96.0;
      const Vec v = r * (std::cos(ph) * E.col(0) + std::sin(ph) * E.col(1));
      const Point y = exp_map(u.space, x, {x.coords, v});
      const double f = prox_objective(u, t, x, y);
      if (f < fbest) {
        fbest = f;
        best = y;
      }
    }
  return best;
}

}  // namespace detail

// Proximal point of u at x: geodesic gradient descent with Armijo
// backtracking on F(y) = u(y) + d^2(x,y)/2t, restricted to B(x, tL).
// F is strongly convex with modulus >= 1/t, so |grad F| <= eps implies the
// minimizer is within t*eps.
inline ProxResult prox(const ScalarField& u, double t, const Point& x, bool force = false,
                       int max_iter = 300) {
  if (t <= 0.0) throw std::invalid_argument("prox: t > 0 required");
  if (!u.convex_hint && !force)
    throw std::invalid_argument("prox: field not known convex (pass force to override)");
  const SpaceForm& sf = u.space;
  const double ball = t * u.lipschitz;

  Point y = x;
  double fy = detail::prox_objective(u, t, x, y);
  int it = 0;
  bool stalled = false;
  const double gtol = 1e-12 * (1.0 + 1.0 / t);
  for (; it < max_iter; ++it) {
    Vec g;
    try {
      g = gradient(u, y).vec;
    } catch (const std::domain_error&) {
      stalled = true;  // kink (medial point): descent direction unavailable
      break;
    }
    if (distance(sf, x, y) > 1e-12) g -= log_map(sf, y, x).vec / t;
    const double gn = metric_norm(sf, g);
    if (gn <= gtol) break;
    double alpha = t;
    bool moved = false;
    for (int bt = 0; bt < 60; ++bt, alpha *= 0.5) {
      Point cand = exp_map(sf, y, {y.coords, -alpha * g});
      // keep within the prox ball
      const double dc = distance(sf, x, cand);
      if (dc > ball)
        cand = exp_map(sf, x, {x.coords, (ball / dc) * log_map(sf, x, cand).vec});
      const double fc = detail::prox_objective(u, t, x, cand);
      if (fc <= fy - 1e-4 * alpha * gn * gn) {
        y = cand;
        fy = fc;
        moved = true;
        break;
      }
    }
    if (!moved) {
      stalled = gn > 1e-7 * (1.0 + 1.0 / t);
      break;
    }
  }
  if (stalled && sf.dim == 2) {
    y = detail::prox_polar_scan(u, t, x, ball);
    fy = detail::prox_objective(u, t, x, y);
    // polish with a few more descent steps
    for (int k = 0; k < 60; ++k) {
      Vec g;
      try {
        g = gradient(u, y).vec;
      } catch (const std::domain_error&) {
        break;
      }
      if (distance(sf, x, y) > 1e-12) g -= log_map(sf, y, x).vec / t;
      if (metric_norm(sf, g) <= gtol) break;
      double alpha = t;
      for (int bt = 0; bt < 50; ++bt, alpha *= 0.5) {
        Point cand = exp_map(sf, y, {y.coords, -alpha * g});
        const double fc = detail::prox_objective(u, t, x, cand);
        if (fc < fy) {
          y = cand;
          fy = fc;
          break;
        }
      }
    }
    stalled = false;
  }
  ProxResult res;
  res.x_star = y;
  res.value = fy;
  res.iterations = it;
  res.converged = !stalled && it < max_iter;
  return res;
}

inline double envelope(const ScalarField& u, double t, const Point& x, bool force = false) {
  return prox(u, t, x, force).value;
}

// Moreau envelope as a ScalarField; the gradient uses the prox identity
// grad u~(x) = -log_x(x*)/t, exact given the solved proximal point.
inline ScalarField make_moreau_field(const ScalarField& base, double t, bool force = false) {
  ScalarField m;
  m.space = base.space;
  m.lipschitz = base.lipschitz;  // envelope of L-Lipschitz stays L-Lipschitz
  m.convex_hint = base.convex_hint;
  m.spec = "moreau:" + base.spec + "," + std::to_string(t);
  auto b = std::make_shared<ScalarField>(base);
  m.eval = [b, t, force](const Point& x) { return envelope(*b, t, x, force); };
  m.grad_exact = [b, t, force](const Point& x) {
    const auto pr = prox(*b, t, x, force);
    const double d = distance(b->space, x, pr.x_star);
    if (d < 1e-10) return Vec(Vec::Zero(b->space.ambient_dim()));
    return Vec(-log_map(b->space, x, pr.x_star).vec / t);
  };
  return m;
}

// ---- Appendix-A verification battery ----------------------------------------

struct EnvelopeReport {
  int n_samples = 0;
  // (a) prox ball bound d(x,x*) <= tL
  int ball_violations = 0;
  double worst_ball_margin = 0.0;  // max d(x,x*) - tL
  // (b) nonexpansiveness of prox on sample pairs
  int nonexp_violations = 0;
  double worst_nonexp = 0.0;  // max d(x1*,x2*) - d(x1,x2)
  // (c) gradient link: |grad u(x*)| = |grad u~(x)|, both tangent to x* x
  int grad_checked = 0;
  int grad_violations = 0;
  double worst_angle = 0.0;
  double worst_norm_gap = 0.0;
  // (d) |grad u~| <= 1 for signed distance fields of d-convex shapes
  int lip_violations = 0;
  double max_grad_norm = 0.0;
  // (e) FD Hessian bound C/t
  double semiconcavity_C = 0.0;
  double worst_hessian = 0.0;
  int hessian_violations = 0;
  std::vector<Vec> violation_points;
};

// Batch checks (a)-(e) of the envelope; (f)-type closed-form identities live
// in the tests where the oracles are.
inline EnvelopeReport envelope_report(const ScalarField& u, double t, int n_samples,
                                      double domain_radius, unsigned seed = 17,
                                      double tol = 1e-6) {
  const SpaceForm& sf = u.space;
  std::mt19937_64 rng(seed);
  EnvelopeReport rep;
  rep.n_samples = n_samples;
  const double L = u.lipschitz;
  // semiconcavity constant: C = sqrt(-K0) 3 t L coth(sqrt(-K0) 3 t L)
  rep.semiconcavity_C = xcoth(std::sqrt(sf.a()) * 3.0 * t * L);

  const ScalarField menv = make_moreau_field(u, t);
  Point prev_x = origin(sf);
  Point prev_star = prev_x;
  bool have_prev = false;

  for (int i = 0; i < n_samples; ++i) {
    const Point x = sample_ball(sf, rng, domain_radius);
    const auto pr = prox(u, t, x);
    const double dxs = distance(sf, x, pr.x_star);

    // (a)
    rep.worst_ball_margin = std::max(rep.worst_ball_margin, dxs - t * L);
    if (dxs > t * L + tol) {
      ++rep.ball_violations;
      rep.violation_points.push_back(x.coords);
    }

    // (b) against the previous sample
    if (have_prev) {
      const double gap = distance(sf, pr.x_star, prev_star) - distance(sf, x, prev_x);
      rep.worst_nonexp = std::max(rep.worst_nonexp, gap);
      if (gap > tol) ++rep.nonexp_violations;
    }
    prev_x = x;
    prev_star = pr.x_star;
    have_prev = true;

    // (c) gradient relations at FD-regular points
    if (dxs > 1e-4) {
      try {
        const Vec gu = gradient(u, pr.x_star).vec;
        const Vec gm = menv.grad_exact(x);
        const double ngu = metric_norm(sf, gu), ngm = metric_norm(sf, gm);
        rep.worst_norm_gap = std::max(rep.worst_norm_gap, std::abs(ngu - ngm));
        // tangency to the connecting geodesic
        const Vec dir_star = log_map(sf, pr.x_star, x).vec / dxs;  // toward x
        const Vec dir_x = -log_map(sf, x, pr.x_star).vec / dxs;
        double a1 = 1.0, a2 = 1.0;
        if (ngu > 1e-9) a1 = metric_dot(sf, gu / ngu, dir_star);
        if (ngm > 1e-9) a2 = metric_dot(sf, gm / ngm, dir_x);
        const double ang = std::max(std::acos(std::clamp(a1, -1.0, 1.0)),
                                    std::acos(std::clamp(a2, -1.0, 1.0)));
        ++rep.grad_checked;
        rep.worst_angle = std::max(rep.worst_angle, ang);
        if (ang > 1e-4 || std::abs(ngu - ngm) > 1e-5) ++rep.grad_violations;
      } catch (const std::domain_error&) {
        // x* at a kink: skip
      }
    }

    // (d)
    const double gn = metric_norm(sf, menv.grad_exact(x));
    rep.max_grad_norm = std::max(rep.max_grad_norm, gn);
    if (u.lipschitz <= 1.0 && gn > 1.0 + tol) ++rep.lip_violations;

    // (e) second differences along a random geodesic, h tuned against noise
    if (i % 8 == 0) {
      const Mat E = tangent_basis(sf, x);
      Vec d = Vec::Zero(sf.dim);
      std::normal_distribution<double> gsn(0.0, 1.0);
      for (int k = 0; k < sf.dim; ++k) d[k] = gsn(rng);
      d.normalize();
      const Vec v = E * d;
      const double h = 1e-3;
      const double f0 = menv.eval(x);
      const double fp = menv.eval(exp_map(sf, x, {x.coords, h * v}));
      const double fm = menv.eval(exp_map(sf, x, {x.coords, -h * v}));
      const double sd = (fp + fm - 2.0 * f0) / (h * h);
      rep.worst_hessian = std::max(rep.worst_hessian, sd);
      if (sd > rep.semiconcavity_C / t * 1.05) ++rep.hessian_violations;
    }
  }
  return rep;
}

}  // namespace chlab
