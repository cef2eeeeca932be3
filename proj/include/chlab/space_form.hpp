#pragma once

#include <cmath>
#include <random>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

#include "chlab/quadrature.hpp"

namespace chlab {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

// Generalized trig for curvature -a <= 0, continuous through a = 0.
// sn(a,r) = sinh(sqrt(a) r)/sqrt(a),  cs(a,r) = cosh(sqrt(a) r),
// ct(a,r) = sqrt(a) coth(sqrt(a) r).
// Series branch below |sqrt(a) r| < 1e-4 avoids 0/0 at the Euclidean limit.
inline double sf_sn(double a, double r) {
  const double x = std::sqrt(a) * r;
  if (std::abs(x) < 1e-4) {
    const double x2 = x * x;
    return r * (1.0 + x2 / 6.0 * (1.0 + x2 / 20.0));
  }
  return std::sinh(x) / std::sqrt(a);
}

inline double sf_cs(double a, double r) {
  const double x = std::sqrt(a) * r;
  if (std::abs(x) < 1e-4) {
    const double x2 = x * x;
    return 1.0 + x2 / 2.0 * (1.0 + x2 / 12.0);
  }
  return std::cosh(x);
}

inline double sf_ct(double a, double r) { return sf_cs(a, r) / sf_sn(a, r); }

// x*coth(x), stable near 0; used for semiconcavity constants.
inline double xcoth(double x) {
  if (std::abs(x) < 1e-4) return 1.0 + x * x / 3.0;
  return x / std::tanh(x);
}

struct SpaceForm {
  int dim = 2;      // n >= 2
  double K0 = 0.0;  // sectional curvature, <= 0

  SpaceForm() = default;
  SpaceForm(int n, double k0) : dim(n), K0(k0) {
    if (n < 2) throw std::invalid_argument("SpaceForm: dim must be >= 2");
    if (k0 > 0) throw std::invalid_argument("SpaceForm: curvature must be <= 0");
  }

  double a() const { return -K0; }
  bool hyperbolic() const { return K0 < 0.0; }
  // Hyperboloid "radius": <x,x>_L = -R^2, R = 1/sqrt(a).
  double R() const { return 1.0 / std::sqrt(a()); }
  int ambient_dim() const { return hyperbolic() ? dim + 1 : dim; }
};

struct Point {
  Vec coords;
};

struct Tangent {
  Vec base;  // coords of the base point
  Vec vec;
};

// Compensated Minkowski product (Ogita-Rump-Oishi dot2). Hyperboloid coordinates
// grow like cosh(r), so the naive form loses ~2r digits to cancellation.
inline double lorentz_dot(const Vec& x, const Vec& y) {
  const int m = static_cast<int>(x.size());
  double s = 0.0, c = 0.0;
  for (int i = 0; i < m; ++i) {
    const double a = (i == m - 1) ? -x[i] : x[i];
    const double p = a * y[i];
    const double e = std::fma(a, y[i], -p);
    const double t = s + p;
    const double z = t - s;
    c += (s - (t - z)) + (p - z) + e;
    s = t;
  }
  return s + c;
}

inline double metric_dot(const SpaceForm& sf, const Vec& u, const Vec& v) {
  return sf.hyperbolic() ? lorentz_dot(u, v) : u.dot(v);
}

inline double metric_norm(const SpaceForm& sf, const Vec& u) {
  return std::sqrt(std::max(0.0, metric_dot(sf, u, u)));
}

inline Point origin(const SpaceForm& sf) {
  Vec x = Vec::Zero(sf.ambient_dim());
  if (sf.hyperbolic()) x[sf.dim] = sf.R();
  return {x};
}

// Re-projection to the hyperboloid sheet; bounds constraint drift in long flows.
// Newton steps along the Euclidean constraint normal: a central rescale would
// amplify normal drift by the boost factor at far points.
inline Point project(const SpaceForm& sf, Vec x) {
  if (sf.hyperbolic()) {
    const int m = static_cast<int>(x.size());
    const double R2 = sf.R() * sf.R();
    if (-lorentz_dot(x, x) <= 0.0)
      throw std::runtime_error("project: point left the hyperboloid cone");
    if (x[m - 1] < 0) x = -x;
    for (int it = 0; it < 3; ++it) {
      const double g = lorentz_dot(x, x) + R2;
      Vec grad = 2.0 * x;
      grad[m - 1] = -grad[m - 1];
      x -= (g / grad.squaredNorm()) * grad;
    }
  }
  return {std::move(x)};
}

inline Vec tangent_project(const SpaceForm& sf, const Point& p, const Vec& w) {
  if (!sf.hyperbolic()) return w;
  // T_p = {w : <w,p>_L = 0}; <p,p>_L = -R^2.
  return w + (lorentz_dot(w, p.coords) / (sf.R() * sf.R())) * p.coords;
}

inline double tangency_defect(const SpaceForm& sf, const Tangent& t) {
  if (!sf.hyperbolic()) return 0.0;
  return std::abs(lorentz_dot(t.base, t.vec));
}

inline double distance(const SpaceForm& sf, const Point& p, const Point& q) {
  if (!sf.hyperbolic()) return (p.coords - q.coords).norm();
  // chord form: |q-p|_L = 2R sinh(d/2R); stable for coincident and far pairs alike
  const double R = sf.R();
  const Vec diff = q.coords - p.coords;
  const double c2 = std::max(0.0, lorentz_dot(diff, diff));
  return 2.0 * R * std::asinh(std::sqrt(c2) / (2.0 * R));
}

inline Point exp_map(const SpaceForm& sf, const Point& p, const Tangent& v,
                     double tol = 1e-9) {
  if (tangency_defect(sf, v) > tol * (1.0 + v.vec.norm()))
    throw std::invalid_argument("exp_map: tangency violation");
  if (!sf.hyperbolic()) return {p.coords + v.vec};
  const double a = sf.a();
  const double L = metric_norm(sf, v.vec);
  if (L == 0.0) return p;
  Vec q = sf_cs(a, L) * p.coords + (sf_sn(a, L) / L) * v.vec;
  return project(sf, std::move(q));
}

inline Tangent log_map(const SpaceForm& sf, const Point& p, const Point& q) {
  if (!sf.hyperbolic()) return {p.coords, q.coords - p.coords};
  const double d = distance(sf, p, q);
  if (d < 1e-300) return {p.coords, Vec::Zero(sf.ambient_dim())};
  const double sa = std::sqrt(sf.a());
  const double csm1 = 2.0 * std::pow(std::sinh(0.5 * sa * d), 2);  // cosh(sa d) - 1
  // re-tangentialize: cancellation leaves a radial residue that exp would amplify
  Vec u = tangent_project(sf, p, (q.coords - p.coords) - csm1 * p.coords);
  const double nu = metric_norm(sf, u);
  if (nu < 1e-300) return {p.coords, Vec::Zero(sf.ambient_dim())};
  return {p.coords, (d / nu) * u};
}

// Transport of w in T_p along the geodesic from p to q.
inline Vec parallel_transport(const SpaceForm& sf, const Point& p, const Point& q, const Vec& w) {
  if (!sf.hyperbolic()) return w;
  const double d = distance(sf, p, q);
  if (d < 1e-15) return w;
  const Tangent lp = log_map(sf, p, q);
  const Vec u = lp.vec / d;                     // unit velocity at p
  const Vec uq = -log_map(sf, q, p).vec / d;    // unit velocity at q
  const double al = lorentz_dot(w, u);
  return w + al * (uq - u);
}

// Orthonormal tangent basis at p, columns of an ambient_dim x dim matrix.
inline Mat tangent_basis(const SpaceForm& sf, const Point& p) {
  const int n = sf.dim, m = sf.ambient_dim();
  Mat E(m, n);
  if (!sf.hyperbolic()) {
    E.setIdentity();
    return E;
  }
  int col = 0;
  for (int i = 0; i < m && col < n; ++i) {
    Vec e = Vec::Zero(m);
    e[i] = 1.0;
    Vec v = tangent_project(sf, p, e);
    for (int j = 0; j < col; ++j) v -= lorentz_dot(v, E.col(j)) * E.col(j);
    const double nv = metric_norm(sf, v);
    if (nv > 1e-8) E.col(col++) = v / nv;
  }
  if (col != n) throw std::runtime_error("tangent_basis: degenerate frame");
  return E;
}

// R(X,Y,Z,W) = K0 (<X,Z><Y,W> - <X,W><Y,Z>); all four vectors at a common base.
inline double curvature_tensor(const SpaceForm& sf, const Tangent& X, const Tangent& Y,
                               const Tangent& Z, const Tangent& W) {
  if ((X.base - Y.base).norm() > 1e-12 || (X.base - Z.base).norm() > 1e-12 ||
      (X.base - W.base).norm() > 1e-12)
    throw std::invalid_argument("curvature_tensor: mismatched base points");
  const double xz = metric_dot(sf, X.vec, Z.vec), yw = metric_dot(sf, Y.vec, W.vec);
  const double xw = metric_dot(sf, X.vec, W.vec), yz = metric_dot(sf, Y.vec, Z.vec);
  return sf.K0 * (xz * yw - xw * yz);
}

struct SphereConstants {
  int n = 0;
  double omega_n = 0.0;      // vol(B^n)
  double sphere_area = 0.0;  // vol(S^{n-1}) = n omega_n
  double alpha_n = 0.0;      // vol(S^n)/vol(S^{n-1})
};

inline double unit_ball_volume(int n) {
  return std::pow(M_PI, 0.5 * n) / std::tgamma(0.5 * n + 1.0);
}

// Wallis route: alpha_n = int_{-pi/2}^{pi/2} cos^{n-1}(theta) dtheta.
inline double alpha_n_wallis(int n) {
  return integrate_adaptive([n](double t) { return std::pow(std::cos(t), n - 1); },
                            -M_PI / 2.0, M_PI / 2.0, 1e-14);
}

inline SphereConstants sphere_constants(int n) {
  if (n < 1) throw std::invalid_argument("sphere_constants: n >= 1");
  SphereConstants c;
  c.n = n;
  c.omega_n = unit_ball_volume(n);
  c.sphere_area = n * c.omega_n;
  c.alpha_n = (n + 1) * unit_ball_volume(n + 1) / c.sphere_area;
  return c;
}

struct BallGeometry {
  double vol = 0.0;
  double per = 0.0;
  double mean_curv = 0.0;   // sqrt(a) coth(sqrt(a) rho)
  double gk_boundary = 0.0; // mean_curv^{n-1}
};

inline double ball_perimeter(const SpaceForm& sf, double rho) {
  const auto c = sphere_constants(sf.dim);
  return c.sphere_area * std::pow(sf_sn(sf.a(), rho), sf.dim - 1);
}

inline BallGeometry ball_geometry(const SpaceForm& sf, double rho) {
  if (rho <= 0.0) throw std::invalid_argument("ball_geometry: rho > 0 required");
  BallGeometry g;
  g.per = ball_perimeter(sf, rho);
  g.vol = integrate_adaptive([&sf](double r) { return ball_perimeter(sf, r); }, 0.0, rho, 1e-13);
  g.mean_curv = sf_ct(sf.a(), rho);
  g.gk_boundary = std::pow(g.mean_curv, sf.dim - 1);
  return g;
}

// Busemann function of the ray from the origin with unit direction xi,
// normalized to vanish at the origin.
inline double busemann(const SpaceForm& sf, const Tangent& xi, const Point& x) {
  const double nx = metric_norm(sf, xi.vec);
  if (std::abs(nx - 1.0) > 1e-8) throw std::invalid_argument("busemann: direction must be unit");
  const Point o = origin(sf);
  if ((xi.base - o.coords).norm() > 1e-10)
    throw std::invalid_argument("busemann: direction must be based at the origin");
  if (!sf.hyperbolic()) return -x.coords.dot(xi.vec);
  const double R = sf.R();
  const Vec null_dir = o.coords + R * xi.vec;
  return R * std::log(-lorentz_dot(x.coords, null_dir) / (R * R));
}

// Offset transport in a space form along the outward normal:
// a principal direction with curvature k0 carries Jacobian factor
//   A(t) = cs(a,t) + k0 sn(a,t),
// curvature A'(t)/A(t), with A'(t) = a sn(a,t) + k0 cs(a,t).
inline double offset_jacobian_factor(double a, double k0, double t) {
  return sf_cs(a, t) + k0 * sf_sn(a, t);
}
inline double offset_jacobian_factor_d(double a, double k0, double t) {
  return a * sf_sn(a, t) + k0 * sf_cs(a, t);
}
inline double offset_curvature(double a, double k0, double t) {
  return offset_jacobian_factor_d(a, k0, t) / offset_jacobian_factor(a, k0, t);
}

inline Point sample_ball(const SpaceForm& sf, std::mt19937_64& rng, double radius,
                         const Point& center) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  const Mat E = tangent_basis(sf, center);
  Vec dir(sf.dim);
  for (int i = 0; i < sf.dim; ++i) dir[i] = gauss(rng);
  dir.normalize();
  const double r = radius * std::pow(unif(rng), 1.0 / sf.dim);
  return exp_map(sf, center, {center.coords, (E * dir) * r});
}

inline Point sample_ball(const SpaceForm& sf, std::mt19937_64& rng, double radius) {
  return sample_ball(sf, rng, radius, origin(sf));
}

}  // namespace chlab
