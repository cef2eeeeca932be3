#pragma once

#include <algorithm>
#include <fstream>
#include <functional>
#include <numeric>
#include <sstream>
#include <memory>
#include <string>
#include <vector>

#include "chlab/space_form.hpp"

namespace chlab {

enum class ShapeKind { Curve, GeodesicSphere, Rotational };
enum class PieceTag { Smooth, HullArc, HullBridge };

// One smooth piece of a closed curve, parameterized on [0,1], with analytic
// parameter derivatives (curvature needs d2 at full precision).
struct CurvePiece {
  std::function<Vec(double)> pos;
  std::function<Vec(double)> d1;
  std::function<Vec(double)> d2;
  bool geodesic = false;
  PieceTag tag = PieceTag::Smooth;
};

struct ParametricHypersurface {
  SpaceForm space;
  ShapeKind kind = ShapeKind::Curve;
  std::string spec;

  // Curve (n = 2): pieces in cyclic CCW order; corner_angles[i] is the
  // exterior angle at the junction from pieces[i] to pieces[i+1] (hull output
  // keeps corners as curvature atoms, never smoothed).
  std::vector<CurvePiece> pieces;
  std::vector<double> corner_angles;

  // GeodesicSphere (any n): umbilic, centered at the origin.
  double radius = 0.0;

  // Rotational (R^3): closed CCW profile (rho(s), z(s)) in the rho>0 half
  // plane, interior of the profile on the left.
  std::function<Eigen::Vector2d(double)> prof, prof_d1, prof_d2;

  // Closed-form signed distance when the shape admits one (circle, sphere,
  // stadium); null otherwise.
  std::function<double(const Point&)> sdist_exact;

  // chart polyline (Klein coords for hyperbolic) for inside tests / bounds
  std::vector<Eigen::Vector2d> chart_poly;
  // dense ambient samples on the same lattice, accelerates footprint scans
  std::shared_ptr<std::vector<Point>> dense_pts;
  double dense_max_step = 0.0;  // max arclength between adjacent lattice samples

  int n() const { return space.dim; }
};

struct CurvatureSample {
  Point point;
  Tangent normal;              // outward unit normal
  Vec principal_curvatures;    // ascending
  double gk = 0.0;             // prod kappa_i
  double mean = 0.0;           // sigma_1/(n-1)
  Vec sigmas;                  // sigma_0..sigma_{n-1}
  double area_weight = 0.0;    // d(sigma)/ds at this sample, s the piece parameter
};

inline Vec elementary_symmetric(const Vec& k) {
  const int m = static_cast<int>(k.size());
  Vec e = Vec::Zero(m + 1);
  e[0] = 1.0;
  for (int i = 0; i < m; ++i)
    for (int r = std::min(i + 1, m); r >= 1; --r) e[r] += k[i] * e[r - 1];
  return e;
}

// Chart used for convexity / inside tests: identity for K0 = 0, Klein disk
// (geodesics are straight chords) for K0 < 0.
inline Eigen::Vector2d to_chart(const SpaceForm& sf, const Point& p) {
  if (!sf.hyperbolic()) return {p.coords[0], p.coords[1]};
  const double R = sf.R();
  return {R * p.coords[0] / p.coords[2], R * p.coords[1] / p.coords[2]};
}

inline Point from_chart(const SpaceForm& sf, const Eigen::Vector2d& y) {
  if (!sf.hyperbolic()) return {(Vec(2) << y[0], y[1]).finished()};
  const double R = sf.R();
  const double g = std::sqrt(std::max(1e-300, R * R - y.squaredNorm()));
  Vec x(3);
  x << R * y[0] / g, R * y[1] / g, R * R / g;
  return project(sf, x);
}

// Outward unit normal of a CCW-oriented curve with unit tangent T at p.
inline Vec curve_outward_normal(const SpaceForm& sf, const Point& p, const Vec& T) {
  if (!sf.hyperbolic()) return (Vec(2) << T[1], -T[0]).finished();
  const Vec& x = p.coords;
  Vec n(3);  // Minkowski cross T x_L p
  n << T[1] * x[2] - T[2] * x[1], T[2] * x[0] - T[0] * x[2], -(T[0] * x[1] - T[1] * x[0]);
  n /= sf.R();
  return n / metric_norm(sf, n);
}

namespace detail {

inline CurvePiece polar_curve(const SpaceForm& sf, std::function<double(double)> rfun,
                              std::function<double(double)> rfun1,
                              std::function<double(double)> rfun2) {
  CurvePiece c;
  if (!sf.hyperbolic()) {
    c.pos = [rfun](double s) {
      const double t = 2.0 * M_PI * s, r = rfun(t);
      return (Vec(2) << r * std::cos(t), r * std::sin(t)).finished();
    };
    c.d1 = [rfun, rfun1](double s) {
      const double t = 2.0 * M_PI * s, r = rfun(t), r1 = rfun1(t);
      Vec v(2);
      v << r1 * std::cos(t) - r * std::sin(t), r1 * std::sin(t) + r * std::cos(t);
      return Vec(2.0 * M_PI * v);
    };
    c.d2 = [rfun, rfun1, rfun2](double s) {
      const double t = 2.0 * M_PI * s, r = rfun(t), r1 = rfun1(t), r2 = rfun2(t);
      Vec v(2);
      v << (r2 - r) * std::cos(t) - 2.0 * r1 * std::sin(t),
          (r2 - r) * std::sin(t) + 2.0 * r1 * std::cos(t);
      return Vec(4.0 * M_PI * M_PI * v);
    };
    return c;
  }
  const double R = sf.R();
  // geodesic polar: pos = R(sinh w cos t, sinh w sin t, cosh w), w = r(t)/R
  c.pos = [R, rfun](double s) {
    const double t = 2.0 * M_PI * s, w = rfun(t) / R;
    return (Vec(3) << R * std::sinh(w) * std::cos(t), R * std::sinh(w) * std::sin(t),
            R * std::cosh(w))
        .finished();
  };
  c.d1 = [R, rfun, rfun1](double s) {
    const double t = 2.0 * M_PI * s, w = rfun(t) / R, w1 = rfun1(t) / R;
    const double sh = std::sinh(w), ch = std::cosh(w);
    Vec v(3);
    v << R * (w1 * ch * std::cos(t) - sh * std::sin(t)),
        R * (w1 * ch * std::sin(t) + sh * std::cos(t)), R * w1 * sh;
    return Vec(2.0 * M_PI * v);
  };
  c.d2 = [R, rfun, rfun1, rfun2](double s) {
    const double t = 2.0 * M_PI * s, w = rfun(t) / R, w1 = rfun1(t) / R, w2 = rfun2(t) / R;
    const double sh = std::sinh(w), ch = std::cosh(w);
    const double A = w2 * ch + w1 * w1 * sh;
    Vec v(3);
    v << R * ((A - sh) * std::cos(t) - 2.0 * w1 * ch * std::sin(t)),
        R * ((A - sh) * std::sin(t) + 2.0 * w1 * ch * std::cos(t)),
        R * (w2 * sh + w1 * w1 * ch);
    return Vec(4.0 * M_PI * M_PI * v);
  };
  return c;
}

// geodesic segment piece from p to q, [0,1] affine in arclength
inline CurvePiece geodesic_piece(const SpaceForm& sf, const Point& p, const Point& q,
                                 PieceTag tag) {
  CurvePiece c;
  c.geodesic = true;
  c.tag = tag;
  const Tangent l = log_map(sf, p, q);
  const double d = metric_norm(sf, l.vec);
  if (!sf.hyperbolic()) {
    const Vec a = p.coords, v = l.vec;
    c.pos = [a, v](double s) { return Vec(a + s * v); };
    c.d1 = [v](double) { return v; };
    c.d2 = [v](double) { return Vec(Vec::Zero(v.size())); };
    return c;
  }
  const double a = sf.a();
  const Vec P = p.coords;
  const Vec U = d > 0 ? Vec(l.vec / d) : Vec(Vec::Zero(P.size()));
  c.pos = [P, U, d, a](double s) {
    return Vec(sf_cs(a, s * d) * P + sf_sn(a, s * d) * U);
  };
  c.d1 = [P, U, d, a](double s) {
    return Vec(d * (a * sf_sn(a, s * d) * P + sf_cs(a, s * d) * U));
  };
  c.d2 = [P, U, d, a](double s) {
    return Vec(d * d * a * (sf_cs(a, s * d) * P + sf_sn(a, s * d) * U));
  };
  return c;
}

}  // namespace detail

// ---- curvature at a parameter ------------------------------------------

// s is a global parameter in [0,1); pieces split it evenly.
inline const CurvePiece& locate_piece(const ParametricHypersurface& G, double s, double& local) {
  const int np = static_cast<int>(G.pieces.size());
  double t = s - std::floor(s);
  const int i = std::min(np - 1, static_cast<int>(t * np));
  local = t * np - i;
  return G.pieces[i];
}

inline CurvatureSample curvature_data(const ParametricHypersurface& G, double s);

namespace detail {

inline CurvatureSample curve_sample(const ParametricHypersurface& G, double s) {
  const SpaceForm& sf = G.space;
  double ls = 0.0;
  const CurvePiece& pc = locate_piece(G, s, ls);
  const Vec x = pc.pos(ls), v = pc.d1(ls), acc = pc.d2(ls);
  const Point p = sf.hyperbolic() ? project(sf, x) : Point{x};
  const double speed = metric_norm(sf, v);
  if (speed < 1e-12) throw std::runtime_error("curvature_data: parameterization singularity");
  const Vec T = v / speed;
  const Vec N = curve_outward_normal(sf, p, T);
  double kappa = 0.0;
  if (!pc.geodesic) {
    const Vec accT = tangent_project(sf, p, acc);
    // shape operator S(V) = nabla_V nu:  kappa = -<nabla_T T, N> w.r.t. outward N
    kappa = -metric_dot(sf, accT, N) / (speed * speed);
  }
  CurvatureSample cs;
  cs.point = p;
  cs.normal = {p.coords, N};
  cs.principal_curvatures = (Vec(1) << kappa).finished();
  cs.gk = kappa;
  cs.mean = kappa;
  cs.sigmas = elementary_symmetric(cs.principal_curvatures);
  cs.area_weight = speed * G.pieces.size();  // d(arclength)/d(global s)
  return cs;
}

inline CurvatureSample sphere_sample(const ParametricHypersurface& G, double s) {
  const SpaceForm& sf = G.space;
  const int n = sf.dim;
  const double a = sf.a();
  // sample direction: for n=2 the circle angle; for n>=3 a meridian direction
  Vec dir = Vec::Zero(n);
  const double t = 2.0 * M_PI * s;
  dir[0] = std::cos(t);
  dir[1] = std::sin(t);
  const Point o = origin(sf);
  const Mat E = tangent_basis(sf, o);
  const Point p = exp_map(sf, o, {o.coords, (E * dir) * G.radius});
  const double k = sf_ct(a, G.radius);
  CurvatureSample cs;
  cs.point = p;
  const Vec out = -log_map(sf, p, o).vec / G.radius;
  cs.normal = {p.coords, out};
  cs.principal_curvatures = Vec::Constant(n - 1, k);
  cs.gk = std::pow(k, n - 1);
  cs.mean = k;
  cs.sigmas = elementary_symmetric(cs.principal_curvatures);
  // weight: total area / parameter length 1
  cs.area_weight = ball_perimeter(sf, G.radius);
  return cs;
}

inline CurvatureSample rotational_sample(const ParametricHypersurface& G, double s) {
  const Eigen::Vector2d P = G.prof(s), D1 = G.prof_d1(s), D2 = G.prof_d2(s);
  const double rho = P[0], z = P[1];
  (void)z;
  const double sp2 = D1.squaredNorm();
  if (sp2 < 1e-18 || rho <= 0)
    throw std::runtime_error("curvature_data: degenerate rotational profile");
  const double sp = std::sqrt(sp2);
  // CCW profile, interior left: outward profile normal = (T_z, -T_rho)
  const Eigen::Vector2d Tn(D1[1] / sp, -D1[0] / sp);
  const double km = -(Tn[0] * D2[0] + Tn[1] * D2[1]) / sp2;
  const double kp = Tn[0] / rho;
  CurvatureSample cs;
  Vec x(3);
  x << rho, 0.0, P[1];
  cs.point = {x};
  Vec N(3);
  N << Tn[0], 0.0, Tn[1];
  cs.normal = {x, N};
  Vec k(2);
  k << std::min(km, kp), std::max(km, kp);
  cs.principal_curvatures = k;
  cs.gk = km * kp;
  cs.mean = 0.5 * (km + kp);
  cs.sigmas = elementary_symmetric(k);
  cs.area_weight = 2.0 * M_PI * rho * sp;
  return cs;
}

}  // namespace detail

inline CurvatureSample curvature_data(const ParametricHypersurface& G, double s) {
  switch (G.kind) {
    case ShapeKind::Curve:
      return detail::curve_sample(G, s);
    case ShapeKind::GeodesicSphere:
      return detail::sphere_sample(G, s);
    case ShapeKind::Rotational:
      return detail::rotational_sample(G, s);
  }
  throw std::logic_error("curvature_data: bad kind");
}

// ---- integrals over the hypersurface ------------------------------------

// midpoint rule per piece; integrand sees the full sample
inline double integrate_samples(const ParametricHypersurface& G, int nsamples,
                                const std::function<double(const CurvatureSample&)>& f) {
  if (!std::isfinite(static_cast<double>(nsamples)) || nsamples <= 0)
    throw std::invalid_argument("integrate_samples: bad sample count");
  if (G.kind == ShapeKind::GeodesicSphere) {
    // umbilic: any sample is representative; weight is the closed-form area
    const CurvatureSample cs = curvature_data(G, 0.0);
    return f(cs) * cs.area_weight;
  }
  const int np = G.kind == ShapeKind::Curve ? static_cast<int>(G.pieces.size()) : 1;
  const int per = std::max(1, nsamples / np);
  double acc = 0.0;
  for (int ip = 0; ip < np; ++ip) {
    for (int j = 0; j < per; ++j) {
      const double s = (ip + (j + 0.5) / per) / np;
      const CurvatureSample cs = curvature_data(G, s);
      acc += f(cs) * cs.area_weight / (per * np);
    }
  }
  return acc;
}

inline double corner_total(const ParametricHypersurface& G, bool positive_only) {
  double s = 0.0;
  for (double a : G.corner_angles) s += positive_only ? std::max(a, 0.0) : a;
  return s;
}

inline double surface_area(const ParametricHypersurface& G, int nsamples = 2048) {
  return integrate_samples(G, nsamples, [](const CurvatureSample&) { return 1.0; });
}

// total Gauss-Kronecker curvature; at n=2 corner atoms contribute their
// exterior angles exactly
inline double total_curvature(const ParametricHypersurface& G, int nsamples = 2048) {
  const double smooth = integrate_samples(G, nsamples, [](const CurvatureSample& c) {
    if (!std::isfinite(c.gk)) throw std::runtime_error("total_curvature: non-finite sample");
    return c.gk;
  });
  return smooth + corner_total(G, false);
}

inline double total_positive_curvature(const ParametricHypersurface& G, int nsamples = 2048) {
  const double smooth = integrate_samples(
      G, nsamples, [](const CurvatureSample& c) { return std::max(c.gk, 0.0); });
  return smooth + corner_total(G, true);
}

inline double quermassintegral(const ParametricHypersurface& G, int r, int nsamples = 2048) {
  if (r < 0 || r > G.n() - 1) throw std::invalid_argument("quermassintegral: r out of range");
  double atoms = 0.0;
  if (r == G.n() - 1) atoms = corner_total(G, false);
  return integrate_samples(G, nsamples,
                           [r](const CurvatureSample& c) { return c.sigmas[r]; }) +
         atoms;
}

inline double min_principal_curvature(const ParametricHypersurface& G, int nsamples = 1024) {
  double m = std::numeric_limits<double>::infinity();
  for (int i = 0; i < nsamples; ++i) {
    const auto cs = curvature_data(G, (i + 0.5) / nsamples);
    m = std::min(m, cs.principal_curvatures.minCoeff());
  }
  for (double a : G.corner_angles)
    if (a < -1e-12) m = std::min(m, -1.0);  // reflex corner: concave
  return m;
}

inline bool is_convex(const ParametricHypersurface& G, double tol = 1e-8) {
  return min_principal_curvature(G) >= -tol;
}

// ---- builders ------------------------------------------------------------

inline ParametricHypersurface make_circle(const SpaceForm& sf, double r) {
  if (sf.dim != 2) throw std::invalid_argument("circle: needs n=2");
  ParametricHypersurface G;
  G.space = sf;
  G.kind = ShapeKind::Curve;
  G.spec = "circle:" + std::to_string(r);
  G.radius = r;
  G.pieces.push_back(detail::polar_curve(
      sf, [r](double) { return r; }, [](double) { return 0.0; }, [](double) { return 0.0; }));
  G.corner_angles.assign(1, 0.0);
  const SpaceForm s = sf;
  const Point c = origin(sf);
  G.sdist_exact = [s, c, r](const Point& x) { return distance(s, c, x) - r; };
  return G;
}

inline ParametricHypersurface make_sphere(const SpaceForm& sf, double r) {
  if (sf.dim == 2) return make_circle(sf, r);
  ParametricHypersurface G;
  G.space = sf;
  G.kind = ShapeKind::GeodesicSphere;
  G.radius = r;
  const SpaceForm s = sf;
  const Point c = origin(sf);
  G.sdist_exact = [s, c, r](const Point& x) { return distance(s, c, x) - r; };
  return G;
}

inline ParametricHypersurface make_ellipse(const SpaceForm& sf, double a, double b) {
  if (sf.dim != 2 || sf.hyperbolic())
    throw std::invalid_argument("ellipse: Euclidean n=2 only (use hellipse in H^2)");
  ParametricHypersurface G;
  G.space = sf;
  G.kind = ShapeKind::Curve;
  CurvePiece c;
  c.pos = [a, b](double s) {
    const double t = 2.0 * M_PI * s;
    return (Vec(2) << a * std::cos(t), b * std::sin(t)).finished();
  };
  c.d1 = [a, b](double s) {
    const double t = 2.0 * M_PI * s;
    return (Vec(2) << -2.0 * M_PI * a * std::sin(t), 2.0 * M_PI * b * std::cos(t)).finished();
  };
  c.d2 = [a, b](double s) {
    const double t = 2.0 * M_PI * s;
    const double w = 4.0 * M_PI * M_PI;
    return (Vec(2) << -w * a * std::cos(t), -w * b * std::sin(t)).finished();
  };
  G.pieces.push_back(std::move(c));
  G.corner_angles.assign(1, 0.0);
  return G;
}

inline ParametricHypersurface make_limacon(const SpaceForm& sf, double a, double b) {
  if (sf.dim != 2) throw std::invalid_argument("limacon: needs n=2");
  if (a <= std::abs(b)) throw std::invalid_argument("limacon: need a > |b| (embedded)");
  ParametricHypersurface G;
  G.space = sf;
  G.kind = ShapeKind::Curve;
  G.pieces.push_back(detail::polar_curve(
      sf, [a, b](double t) { return a + b * std::cos(t); },
      [b](double t) { return -b * std::sin(t); }, [b](double t) { return -b * std::cos(t); }));
  G.corner_angles.assign(1, 0.0);
  return G;
}

// Hyperbolic convex oval: Euclidean ellipse in the Klein disk lifted to the
// hyperboloid (chords are geodesics there, so Klein-convexity is d-geodesic
// convexity).
inline ParametricHypersurface make_hellipse(const SpaceForm& sf, double a, double b) {
  if (sf.dim != 2 || !sf.hyperbolic())
    throw std::invalid_argument("hellipse: hyperbolic n=2 only");
  const double R = sf.R();
  if (a >= R || b >= R) throw std::invalid_argument("hellipse: axes must be < 1/sqrt(-K0)");
  ParametricHypersurface G;
  G.space = sf;
  G.kind = ShapeKind::Curve;
  CurvePiece c;
  auto kfun = [a, b](double t) { return Eigen::Vector2d(a * std::cos(t), b * std::sin(t)); };
  auto kfun1 = [a, b](double t) { return Eigen::Vector2d(-a * std::sin(t), b * std::cos(t)); };
  c.pos = [R, kfun](double s) {
    const double t = 2.0 * M_PI * s;
    const Eigen::Vector2d k = kfun(t);
    const double m = 1.0 / std::sqrt(R * R - k.squaredNorm());
    return (Vec(3) << R * k[0] * m, R * k[1] * m, R * R * m).finished();
  };
  c.d1 = [R, kfun, kfun1](double s) {
    const double t = 2.0 * M_PI * s;
    const Eigen::Vector2d k = kfun(t), k1 = kfun1(t);
    const double m = 1.0 / std::sqrt(R * R - k.squaredNorm());
    const double h = k.dot(k1);
    const double m1 = h * m * m * m;
    Vec v(3);
    v << R * (k1[0] * m + k[0] * m1), R * (k1[1] * m + k[1] * m1), R * R * m1;
    return Vec(2.0 * M_PI * v);
  };
  c.d2 = [R, kfun, kfun1](double s) {
    const double t = 2.0 * M_PI * s;
    const Eigen::Vector2d k = kfun(t), k1 = kfun1(t), k2 = -k;
    const double m = 1.0 / std::sqrt(R * R - k.squaredNorm());
    const double h = k.dot(k1);
    const double h1 = k1.squaredNorm() + k.dot(k2);
    const double m1 = h * m * m * m;
    const double m2 = h1 * m * m * m + 3.0 * h * m * m * m1;
    Vec v(3);
    v << R * (k2[0] * m + 2.0 * k1[0] * m1 + k[0] * m2),
        R * (k2[1] * m + 2.0 * k1[1] * m1 + k[1] * m2), R * R * m2;
    return Vec(4.0 * M_PI * M_PI * v);
  };
  G.pieces.push_back(std::move(c));
  G.corner_angles.assign(1, 0.0);
  return G;
}

// Tube of radius r about the geodesic segment [-L, L] along the first axis:
// two equidistant pieces and two cap arcs, C^{1,1} at the junctions. This is
// the d-convex tubular neighborhood used for cut-locus and convexity checks.
inline ParametricHypersurface make_stadium(const SpaceForm& sf, double L, double r) {
  if (sf.dim != 2) throw std::invalid_argument("stadium: needs n=2");
  ParametricHypersurface G;
  G.space = sf;
  G.kind = ShapeKind::Curve;

  auto axis_point = [&sf](double t) {
    if (!sf.hyperbolic()) return Point{(Vec(2) << t, 0.0).finished()};
    const double R = sf.R();
    return Point{(Vec(3) << R * std::sinh(t / R), 0.0, R * std::cosh(t / R)).finished()};
  };
  auto axis_dir = [&sf](const Point& c) {
    if (!sf.hyperbolic()) return (Vec(2) << 1.0, 0.0).finished();
    const double R = sf.R();
    return (Vec(3) << std::cosh(std::asinh(c.coords[0] / R)), 0.0,
            c.coords[0] / R)
        .finished();
  };

  // cap arc around center c, from angle a0 to a1 (angles in the frame
  // {axis direction, e2})
  auto make_cap = [&](const Point& c, double a0, double a1) {
    CurvePiece pc;
    const SpaceForm s = sf;
    const Vec E1 = axis_dir(c);
    Vec E2 = Vec::Zero(sf.ambient_dim());
    E2[1] = 1.0;
    const Vec C = c.coords;
    const double a = sf.a();
    pc.pos = [s, C, E1, E2, r, a0, a1, a](double t) {
      const double ph = a0 + (a1 - a0) * t;
      Vec dir = std::cos(ph) * E1 + std::sin(ph) * E2;
      if (!s.hyperbolic()) return Vec(C + r * dir);
      return Vec(sf_cs(a, r) * C + sf_sn(a, r) * dir);
    };
    pc.d1 = [s, C, E1, E2, r, a0, a1, a](double t) {
      const double ph = a0 + (a1 - a0) * t, w = a1 - a0;
      Vec ddir = w * (-std::sin(ph) * E1 + std::cos(ph) * E2);
      if (!s.hyperbolic()) return Vec(r * ddir);
      return Vec(sf_sn(a, r) * ddir);
    };
    pc.d2 = [s, C, E1, E2, r, a0, a1, a](double t) {
      const double ph = a0 + (a1 - a0) * t, w = a1 - a0;
      Vec dddir = w * w * (-std::cos(ph) * E1 - std::sin(ph) * E2);
      if (!s.hyperbolic()) return Vec(r * dddir);
      return Vec(sf_sn(a, r) * dddir);
    };
    return pc;
  };

  // equidistant piece at signed offset y0 = +r (top) or -r (bottom),
  // axis parameter running t0 -> t1
  auto make_side = [&](double y0, double t0, double t1) {
    CurvePiece pc;
    const SpaceForm s = sf;
    const double a = sf.a();
    pc.pos = [s, y0, t0, t1, a](double u) {
      const double t = t0 + (t1 - t0) * u;
      if (!s.hyperbolic()) return (Vec(2) << t, y0).finished();
      const double R = s.R();
      return (Vec(3) << sf_cs(a, y0) * R * std::sinh(t / R), sf_sn(a, std::abs(y0)) * (y0 > 0 ? 1 : -1),
              sf_cs(a, y0) * R * std::cosh(t / R))
          .finished();
    };
    pc.d1 = [s, y0, t0, t1, a](double u) {
      const double t = t0 + (t1 - t0) * u, w = t1 - t0;
      if (!s.hyperbolic()) return (Vec(2) << w, 0.0).finished();
      const double R = s.R();
      return (Vec(3) << w * sf_cs(a, y0) * std::cosh(t / R), 0.0,
              w * sf_cs(a, y0) * std::sinh(t / R))
          .finished();
    };
    pc.d2 = [s, y0, t0, t1, a](double u) {
      const double t = t0 + (t1 - t0) * u, w = t1 - t0;
      if (!s.hyperbolic()) return (Vec(2) << 0.0, 0.0).finished();
      const double R = s.R();
      return (Vec(3) << w * w / R * sf_cs(a, y0) * std::sinh(t / R), 0.0,
              w * w / R * sf_cs(a, y0) * std::cosh(t / R))
          .finished();
    };
    return pc;
  };

  const Point cR = axis_point(L), cL = axis_point(-L);
  G.pieces.push_back(make_cap(cR, -M_PI / 2.0, M_PI / 2.0));  // right cap, CCW
  G.pieces.push_back(make_side(r, L, -L));                    // top, right to left
  G.pieces.push_back(make_cap(cL, M_PI / 2.0, 3.0 * M_PI / 2.0));
  G.pieces.push_back(make_side(-r, -L, L));
  G.corner_angles.assign(4, 0.0);

  const SpaceForm s = sf;
  G.sdist_exact = [s, L, r, axis_point](const Point& x) {
    // distance to the core segment, closed form
    double dseg;
    if (!s.hyperbolic()) {
      const double t = std::clamp(x.coords[0], -L, L);
      dseg = std::hypot(x.coords[0] - t, x.coords[1]);
    } else {
      const double R = s.R();
      double tf = R * std::atanh(std::clamp(x.coords[0] / x.coords[2], -0.999999999999, 0.999999999999));
      tf = std::clamp(tf, -L, L);
      dseg = distance(s, axis_point(tf), x);
    }
    return dseg - r;
  };
  return G;
}

inline ParametricHypersurface make_torus(const SpaceForm& sf, double Rmaj, double rtube) {
  if (sf.dim != 3 || sf.hyperbolic())
    throw std::invalid_argument("torus profile: Euclidean n=3 only");
  if (rtube >= Rmaj) throw std::invalid_argument("torus: need rtube < Rmaj (embedded)");
  ParametricHypersurface G;
  G.space = sf;
  G.kind = ShapeKind::Rotational;
  G.prof = [Rmaj, rtube](double s) {
    const double t = 2.0 * M_PI * s;
    return Eigen::Vector2d(Rmaj + rtube * std::cos(t), rtube * std::sin(t));
  };
  G.prof_d1 = [rtube](double s) {
    const double t = 2.0 * M_PI * s;
    return Eigen::Vector2d(-2.0 * M_PI * rtube * std::sin(t), 2.0 * M_PI * rtube * std::cos(t));
  };
  G.prof_d2 = [rtube](double s) {
    const double t = 2.0 * M_PI * s;
    const double w = 4.0 * M_PI * M_PI;
    return Eigen::Vector2d(-w * rtube * std::cos(t), -w * rtube * std::sin(t));
  };
  const SpaceForm s = sf;
  G.sdist_exact = [Rmaj, rtube](const Point& x) {
    const double rr = std::hypot(x.coords[0], x.coords[1]);
    return std::hypot(rr - Rmaj, x.coords[2]) - rtube;
  };
  return G;
}

// Closed CCW profile through the given (rho,z) samples, periodic cubic spline.
ParametricHypersurface make_profile(const SpaceForm& sf, const std::vector<Eigen::Vector2d>& pts);

// ---- chart polyline / inside test ---------------------------------------

inline void build_chart_poly(ParametricHypersurface& G, int nsamples = 4096) {
  if (G.kind == ShapeKind::Curve) {
    G.chart_poly.resize(nsamples);
    G.dense_pts = std::make_shared<std::vector<Point>>(nsamples);
    for (int i = 0; i < nsamples; ++i) {
      double ls;
      const CurvePiece& pc = locate_piece(G, static_cast<double>(i) / nsamples, ls);
      Point p = G.space.hyperbolic() ? project(G.space, pc.pos(ls)) : Point{pc.pos(ls)};
      G.chart_poly[i] = to_chart(G.space, p);
      (*G.dense_pts)[i] = p;
    }
    G.dense_max_step = 0.0;
    for (int i = 0; i < nsamples; ++i)
      G.dense_max_step = std::max(
          G.dense_max_step,
          distance(G.space, (*G.dense_pts)[i], (*G.dense_pts)[(i + 1) % nsamples]));
  } else if (G.kind == ShapeKind::Rotational) {
    G.chart_poly.resize(nsamples);
    for (int i = 0; i < nsamples; ++i) {
      Eigen::Vector2d q = G.prof(static_cast<double>(i) / nsamples);
      G.chart_poly[i] = q;  // (rho, z) half-plane
    }
  }
}

// crossing parity in chart coordinates (Klein chart for H^2)
inline bool chart_poly_contains(const std::vector<Eigen::Vector2d>& poly,
                                const Eigen::Vector2d& q) {
  bool in = false;
  const int n = static_cast<int>(poly.size());
  for (int i = 0, j = n - 1; i < n; j = i++) {
    const auto& a = poly[i];
    const auto& b = poly[j];
    if ((a[1] > q[1]) != (b[1] > q[1])) {
      const double xint = (b[0] - a[0]) * (q[1] - a[1]) / (b[1] - a[1]) + a[0];
      if (q[0] < xint) in = !in;
    }
  }
  return in;
}

inline bool contains(const ParametricHypersurface& G, const Point& x) {
  if (G.kind == ShapeKind::GeodesicSphere)
    return distance(G.space, origin(G.space), x) < G.radius;
  if (G.sdist_exact) return G.sdist_exact(x) < 0.0;
  if (G.kind == ShapeKind::Rotational) {
    const double rr = std::hypot(x.coords[0], x.coords[1]);
    return chart_poly_contains(G.chart_poly, {rr, x.coords[2]});
  }
  return chart_poly_contains(G.chart_poly, to_chart(G.space, x));
}

// ---- registry -------------------------------------------------------------

std::vector<double> parse_numbers(const std::string& s);
ParametricHypersurface make_shape(const SpaceForm& sf, const std::string& spec);

inline std::vector<double> parse_numbers(const std::string& s) {
  std::vector<double> out;
  std::stringstream ss(s);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    if (!tok.empty()) out.push_back(std::stod(tok));
  }
  return out;
}

inline ParametricHypersurface make_profile(const SpaceForm& sf,
                                           const std::vector<Eigen::Vector2d>& pts) {
  if (sf.dim != 3 || sf.hyperbolic())
    throw std::invalid_argument("profile: Euclidean n=3 only");
  const int n = static_cast<int>(pts.size());
  if (n < 4) throw std::invalid_argument("profile: need at least 4 samples");
  // periodic natural cubic spline per component (standard cyclic tridiagonal)
  Mat A = Mat::Zero(n, n);
  Mat rhs = Mat::Zero(n, 2);
  const double h = 1.0 / n;
  for (int i = 0; i < n; ++i) {
    const int im = (i + n - 1) % n, ip = (i + 1) % n;
    A(i, im) = h;
    A(i, i) = 4.0 * h;
    A(i, ip) = h;
    for (int c = 0; c < 2; ++c)
      rhs(i, c) = 6.0 / h * (pts[ip][c] - 2.0 * pts[i][c] + pts[im][c]);
  }
  Mat M = A.partialPivLu().solve(rhs);  // second derivatives at knots
  auto coef = std::make_shared<std::pair<std::vector<Eigen::Vector2d>, Mat>>(
      std::vector<Eigen::Vector2d>(pts), M);
  auto evalk = [coef, n, h](double s, int deriv) {
    double t = s - std::floor(s);
    int i = std::min(n - 1, static_cast<int>(t * n));
    const int ip = (i + 1) % n;
    const double u = t - i * h;  // in [0,h]
    Eigen::Vector2d out;
    for (int c = 0; c < 2; ++c) {
      const double yi = coef->first[i][c], yip = coef->first[ip][c];
      const double mi = coef->second(i, c), mip = coef->second(ip, c);
      const double b = (yip - yi) / h - h / 6.0 * (mip + 2.0 * mi);
      if (deriv == 0)
        out[c] = yi + b * u + 0.5 * mi * u * u + (mip - mi) / (6.0 * h) * u * u * u;
      else if (deriv == 1)
        out[c] = b + mi * u + (mip - mi) / (2.0 * h) * u * u;
      else
        out[c] = mi + (mip - mi) / h * u;
    }
    return out;
  };
  ParametricHypersurface G;
  G.space = sf;
  G.kind = ShapeKind::Rotational;
  G.prof = [evalk](double s) { return evalk(s, 0); };
  G.prof_d1 = [evalk](double s) { return evalk(s, 1); };
  G.prof_d2 = [evalk](double s) { return evalk(s, 2); };
  return G;
}

inline ParametricHypersurface make_shape(const SpaceForm& sf, const std::string& spec) {
  const auto colon = spec.find(':');
  const std::string name = spec.substr(0, colon);
  const std::string args = colon == std::string::npos ? "" : spec.substr(colon + 1);
  ParametricHypersurface G;
  if (name == "circle") {
    const auto v = parse_numbers(args);
    if (v.size() != 1) throw std::invalid_argument("circle:<r>");
    G = make_circle(sf, v[0]);
  } else if (name == "sphere") {
    const auto v = parse_numbers(args);
    if (v.size() != 1) throw std::invalid_argument("sphere:<r>");
    G = make_sphere(sf, v[0]);
  } else if (name == "ellipse") {
    const auto v = parse_numbers(args);
    if (v.size() != 2) throw std::invalid_argument("ellipse:<a>,<b>");
    G = make_ellipse(sf, v[0], v[1]);
  } else if (name == "limacon") {
    const auto v = parse_numbers(args);
    if (v.size() != 2) throw std::invalid_argument("limacon:<a>,<b>");
    G = make_limacon(sf, v[0], v[1]);
  } else if (name == "hellipse") {
    const auto v = parse_numbers(args);
    if (v.size() != 2) throw std::invalid_argument("hellipse:<a>,<b>");
    G = make_hellipse(sf, v[0], v[1]);
  } else if (name == "stadium") {
    const auto v = parse_numbers(args);
    if (v.size() != 2) throw std::invalid_argument("stadium:<L>,<r>");
    G = make_stadium(sf, v[0], v[1]);
  } else if (name == "torus") {
    const auto v = parse_numbers(args);
    if (v.size() != 2) throw std::invalid_argument("torus:<R>,<r>");
    G = make_torus(sf, v[0], v[1]);
  } else if (name == "profile") {
    std::ifstream in(args);
    if (!in) throw std::invalid_argument("profile: cannot open " + args);
    std::vector<Eigen::Vector2d> pts;
    std::string line;
    while (std::getline(in, line)) {
      if (line.empty() || line[0] == '#' || std::isalpha(line[0])) continue;
      const auto v = parse_numbers(line);
      if (v.size() >= 2) pts.emplace_back(v[0], v[1]);
    }
    G = make_profile(sf, pts);
  } else {
    throw std::invalid_argument("unknown shape spec: " + spec);
  }
  G.spec = spec;
  build_chart_poly(G);
  return G;
}

// ---- convex hull (n = 2, Klein model) -------------------------------------

struct HullResult {
  ParametricHypersurface hull;        // geodesic polygon with corner atoms
  std::vector<int> vertex_samples;    // indices into the sampled curve
  std::vector<PieceTag> tags;         // per piece
};

inline HullResult convex_hull_2d(const ParametricHypersurface& G, int nsamples = 2048) {
  if (G.n() != 2) throw std::invalid_argument("convex_hull_2d: n=2 only");
  const SpaceForm& sf = G.space;
  std::vector<Point> pts(nsamples);
  std::vector<Eigen::Vector2d> ch(nsamples);
  for (int i = 0; i < nsamples; ++i) {
    double ls;
    const CurvePiece& pc = locate_piece(G, static_cast<double>(i) / nsamples, ls);
    pts[i] = sf.hyperbolic() ? project(sf, pc.pos(ls)) : Point{pc.pos(ls)};
    ch[i] = to_chart(sf, pts[i]);
  }
  // Andrew monotone chain on chart coords
  std::vector<int> idx(nsamples);
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(), [&](int a, int b) {
    return ch[a][0] < ch[b][0] || (ch[a][0] == ch[b][0] && ch[a][1] < ch[b][1]);
  });
  auto cross = [&](int o, int a, int b) {
    return (ch[a][0] - ch[o][0]) * (ch[b][1] - ch[o][1]) -
           (ch[a][1] - ch[o][1]) * (ch[b][0] - ch[o][0]);
  };
  std::vector<int> hull;
  for (int i : idx) {  // lower hull
    while (hull.size() >= 2 && cross(hull[hull.size() - 2], hull.back(), i) <= 0)
      hull.pop_back();
    hull.push_back(i);
  }
  const size_t lower = hull.size() + 1;
  for (size_t ii = idx.size() - 1; ii-- > 0;) {  // upper hull
    const int i = idx[ii];
    while (hull.size() >= lower && cross(hull[hull.size() - 2], hull.back(), i) <= 0)
      hull.pop_back();
    hull.push_back(i);
  }
  hull.pop_back();
  if (hull.size() < 3) throw std::runtime_error("convex_hull_2d: degenerate hull");

  HullResult res;
  res.vertex_samples = hull;
  ParametricHypersurface H;
  H.space = sf;
  H.kind = ShapeKind::Curve;
  const int m = static_cast<int>(hull.size());
  for (int i = 0; i < m; ++i) {
    const Point &p = pts[hull[i]], &q = pts[hull[(i + 1) % m]];
    const int gap = std::abs(hull[(i + 1) % m] - hull[i]);
    const bool adjacent = gap == 1 || gap == nsamples - 1;
    const PieceTag tag = adjacent ? PieceTag::HullArc : PieceTag::HullBridge;
    H.pieces.push_back(detail::geodesic_piece(sf, p, q, tag));
    res.tags.push_back(tag);
  }
  // exterior angles at the vertices: corner atoms of the total curvature
  H.corner_angles.assign(m, 0.0);
  for (int i = 0; i < m; ++i) {
    const Point& v = pts[hull[(i + 1) % m]];
    const Point& prev = pts[hull[i]];
    const Point& next = pts[hull[(i + 2) % m]];
    Vec tin = -log_map(sf, v, prev).vec;
    Vec tout = log_map(sf, v, next).vec;
    const double c = metric_dot(sf, tin, tout) /
                     (metric_norm(sf, tin) * metric_norm(sf, tout));
    H.corner_angles[i] = std::acos(std::clamp(c, -1.0, 1.0));
  }
  H.spec = "hull(" + G.spec + ")";
  build_chart_poly(H);
  res.hull = std::move(H);
  return res;
}

}  // namespace chlab
