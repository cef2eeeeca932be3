#pragma once

#include <functional>
#include <optional>
#include <string>

#include "chlab/shapes.hpp"
#include "chlab/space_form.hpp"

namespace chlab {

// Scalar function on a model space. Derivatives come from closed forms when
// supplied, otherwise from central differences along geodesics exp_p(s E_i)
// (which is exactly the covariant Hessian, no Christoffel bookkeeping).
struct ScalarField {
  SpaceForm space;
  std::function<double(const Point&)> eval;
  std::function<Vec(const Point&)> grad_exact;  // ambient tangent vector
  // bilinear form Hess(V,W) at p
  std::function<double(const Point&, const Vec&, const Vec&)> hess_exact;
  double fd_step = 1e-4;
  double kink_tol = 0.05;   // FD non-smoothness detector threshold
  double lipschitz = 1.0;
  bool convex_hint = false;  // structural convexity knowledge (prox consumes it)
  std::string spec;
};

inline double fd_kink_residual(const ScalarField& u, const Point& p, const Mat& E) {
  const double h = u.fd_step;
  double worst = 0.0;
  for (int i = 0; i < E.cols(); ++i) {
    const Tangent t{p.coords, E.col(i) * h};
    const double fp = u.eval(exp_map(u.space, p, t));
    const double fm = u.eval(exp_map(u.space, p, {p.coords, -t.vec}));
    worst = std::max(worst, std::abs(fp + fm - 2.0 * u.eval(p)) / (2.0 * h));
  }
  return worst;
}

inline Tangent gradient(const ScalarField& u, const Point& p) {
  if (u.grad_exact) return {p.coords, u.grad_exact(p)};
  const Mat E = tangent_basis(u.space, p);
  const double h = u.fd_step;
  Vec g = Vec::Zero(u.space.ambient_dim());
  for (int i = 0; i < E.cols(); ++i) {
    const double fp = u.eval(exp_map(u.space, p, {p.coords, E.col(i) * h}));
    const double fm = u.eval(exp_map(u.space, p, {p.coords, -E.col(i) * h}));
    g += ((fp - fm) / (2.0 * h)) * E.col(i);
  }
  if (fd_kink_residual(u, p, E) > u.kink_tol)
    throw std::domain_error("gradient: FD residual exceeds tolerance (singular point?)");
  return {p.coords, g};
}

// second derivative of u along the geodesic through p with velocity v
inline double second_difference(const ScalarField& u, const Point& p, const Vec& v,
                                double h) {
  const double fp = u.eval(exp_map(u.space, p, {p.coords, h * v}));
  const double fm = u.eval(exp_map(u.space, p, {p.coords, -h * v}));
  return (fp + fm - 2.0 * u.eval(p)) / (h * h);
}

// covariant Hessian as a matrix in the orthonormal frame E (columns)
inline Mat hessian(const ScalarField& u, const Point& p, const Mat& E) {
  const int n = static_cast<int>(E.cols());
  Mat H(n, n);
  if (u.hess_exact) {
    for (int i = 0; i < n; ++i)
      for (int j = i; j < n; ++j) H(i, j) = H(j, i) = u.hess_exact(p, E.col(i), E.col(j));
    return H;
  }
  const double h = u.fd_step;
  Vec diag(n);
  for (int i = 0; i < n; ++i) {
    diag[i] = second_difference(u, p, E.col(i), h);
    H(i, i) = diag[i];
  }
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      const Vec w = (E.col(i) + E.col(j)) / std::sqrt(2.0);
      const double dij = second_difference(u, p, w, h);
      H(i, j) = H(j, i) = dij - 0.5 * (diag[i] + diag[j]);
    }
  return H;
}

inline Mat hessian(const ScalarField& u, const Point& p) {
  return hessian(u, p, tangent_basis(u.space, p));
}

// ---- cofactor machinery ---------------------------------------------------

struct CofactorMatrix {
  Mat entries;
};

inline CofactorMatrix cofactor(const Mat& A) {
  const int n = static_cast<int>(A.rows());
  Mat C(n, n);
  if (n == 1) {
    C(0, 0) = 1.0;
    return {C};
  }
  Mat sub(n - 1, n - 1);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      for (int r = 0, rr = 0; r < n; ++r) {
        if (r == i) continue;
        for (int c = 0, cc = 0; c < n; ++c) {
          if (c == j) continue;
          sub(rr, cc++) = A(r, c);
        }
        ++rr;
      }
      C(i, j) = ((i + j) % 2 ? -1.0 : 1.0) * sub.determinant();
    }
  return {C};
}

// Arrow matrices: diagonal (n-1)x(n-1) leading block b, last column/row a_i,
// corner a. Closed forms for the cofactor and determinant.
inline Mat arrow_matrix(const Vec& b, const Vec& av, double a) {
  const int m = static_cast<int>(b.size());
  Mat A = Mat::Zero(m + 1, m + 1);
  for (int i = 0; i < m; ++i) {
    A(i, i) = b[i];
    A(i, m) = A(m, i) = av[i];
  }
  A(m, m) = a;
  return A;
}

inline double arrow_det(const Vec& b, const Vec& av, double a) {
  const int m = static_cast<int>(b.size());
  double prod = a;
  for (int i = 0; i < m; ++i) prod *= b[i];
  double sum = 0.0;
  for (int k = 0; k < m; ++k) {
    double t = av[k] * av[k];
    for (int l = 0; l < m; ++l)
      if (l != k) t *= b[l];
    sum += t;
  }
  return prod - sum;
}

inline Mat arrow_cofactor(const Vec& b, const Vec& av, double a) {
  const int m = static_cast<int>(b.size());
  Mat C(m + 1, m + 1);
  auto prod_except = [&](int skip1, int skip2) {
    double t = 1.0;
    for (int l = 0; l < m; ++l)
      if (l != skip1 && l != skip2) t *= b[l];
    return t;
  };
  for (int i = 0; i < m; ++i) {
    C(i, m) = C(m, i) = -av[i] * prod_except(i, -1);
    for (int j = 0; j < m; ++j) {
      if (i == j) continue;
      C(i, j) = av[i] * av[j] * prod_except(i, j);
    }
    double diag = a * prod_except(i, -1);
    for (int k = 0; k < m; ++k)
      if (k != i) diag -= av[k] * av[k] * prod_except(k, i);
    C(i, i) = diag;
  }
  C(m, m) = prod_except(-1, -1);
  return C;
}

// ---- principal frames and level-set curvature ------------------------------

struct PrincipalFrame {
  Point base;
  Mat E;       // columns E_1..E_n, with E_n = -grad u/|grad u|
  Vec kappas;  // principal curvatures of the level set, ascending
};

struct LevelSetCurvature {
  CurvatureSample sample;
  double gk_cofactor = 0.0;
  double gk_product = 0.0;
  double discrepancy = 0.0;
  PrincipalFrame frame;
  Mat hess;        // in the principal frame
  double grad_norm = 0.0;
};

// orthonormal frame with prescribed unit last column
inline Mat frame_with_last(const SpaceForm& sf, const Point& p, const Vec& last) {
  const int n = sf.dim;
  const Mat B = tangent_basis(sf, p);
  Mat E(B.rows(), n);
  E.col(n - 1) = last;
  int col = 0;
  for (int i = 0; i < n && col < n - 1; ++i) {
    Vec v = B.col(i);
    v -= metric_dot(sf, v, last) * last;
    for (int j = 0; j < col; ++j) v -= metric_dot(sf, v, E.col(j)) * E.col(j);
    const double nv = metric_norm(sf, v);
    if (nv > 1e-6) E.col(col++) = v / nv;
  }
  if (col != n - 1) throw std::runtime_error("frame_with_last: degenerate completion");
  return E;
}

inline LevelSetCurvature levelset_curvatures(const ScalarField& u, const Point& p,
                                             double grad_threshold = 1e-8) {
  const SpaceForm& sf = u.space;
  const int n = sf.dim;
  const Tangent g = gradient(u, p);
  const double gn = metric_norm(sf, g.vec);
  if (gn <= grad_threshold)
    throw std::domain_error("levelset_curvatures: |grad u| below regularity threshold");
  const Vec nu = g.vec / gn;  // level-set normal, curvature signs taken w.r.t. +nu
  const Mat E = frame_with_last(sf, p, -nu);
  const Mat H = hessian(u, p, E);

  LevelSetCurvature out;
  out.grad_norm = gn;
  out.hess = H;

  // kappa_l = u_ll / |grad u| in a frame diagonalizing the tangential block
  const Mat T = H.topLeftCorner(n - 1, n - 1);
  Eigen::SelfAdjointEigenSolver<Mat> es(T);
  out.frame.base = p;
  out.frame.E = E;
  out.frame.E.leftCols(n - 1) = E.leftCols(n - 1) * es.eigenvectors();
  out.frame.kappas = es.eigenvalues() / gn;

  // cofactor route: GK = <T^u(grad), grad>/|grad|^{n+1}
  Vec gcomp(n);
  for (int i = 0; i < n; ++i) gcomp[i] = metric_dot(sf, g.vec, E.col(i));
  const Mat C = cofactor(H).entries;
  out.gk_cofactor = gcomp.dot(C * gcomp) / std::pow(gn, n + 1);
  out.gk_product = out.frame.kappas.prod();
  out.discrepancy = std::abs(out.gk_cofactor - out.gk_product);

  CurvatureSample cs;
  cs.point = p;
  cs.normal = {p.coords, nu};
  cs.principal_curvatures = out.frame.kappas;
  cs.gk = out.gk_product;
  cs.sigmas = elementary_symmetric(cs.principal_curvatures);
  cs.mean = cs.sigmas[1] / (n - 1);
  cs.area_weight = 0.0;
  out.sample = cs;
  return out;
}

// ---- closed-form library fields -------------------------------------------

inline ScalarField make_point_distance(const SpaceForm& sf, const Point& x0) {
  ScalarField u;
  u.space = sf;
  u.lipschitz = 1.0;
  u.convex_hint = true;  // point distance is convex on Cartan-Hadamard spaces
  const Point c = x0;
  const SpaceForm s = sf;
  u.eval = [s, c](const Point& p) { return distance(s, c, p); };
  u.grad_exact = [s, c](const Point& p) {
    const double d = distance(s, c, p);
    if (d < 1e-14) throw std::domain_error("distance gradient at the center");
    return Vec(-log_map(s, p, c).vec / d);
  };
  u.hess_exact = [s, c](const Point& p, const Vec& V, const Vec& W) {
    const double d = distance(s, c, p);
    if (d < 1e-14) throw std::domain_error("distance Hessian at the center");
    const Vec rhat = -log_map(s, p, c).vec / d;
    const double vw = metric_dot(s, V, W);
    const double vr = metric_dot(s, V, rhat), wr = metric_dot(s, W, rhat);
    return sf_ct(s.a(), d) * (vw - vr * wr);
  };
  u.spec = "dist:point";
  return u;
}

inline ScalarField make_radial2(const SpaceForm& sf, const Point& x0) {
  ScalarField u;
  u.space = sf;
  const Point c = x0;
  const SpaceForm s = sf;
  u.eval = [s, c](const Point& p) {
    const double d = distance(s, c, p);
    return 0.5 * d * d;
  };
  u.grad_exact = [s, c](const Point& p) { return Vec(-log_map(s, p, c).vec); };
  u.hess_exact = [s, c](const Point& p, const Vec& V, const Vec& W) {
    const double d = distance(s, c, p);
    const double vw = metric_dot(s, V, W);
    if (d < 1e-12) return vw;
    const Vec rhat = -log_map(s, p, c).vec / d;
    const double vr = metric_dot(s, V, rhat), wr = metric_dot(s, W, rhat);
    return vr * wr + d * sf_ct(s.a(), d) * (vw - vr * wr);
  };
  u.spec = "radial2";
  u.lipschitz = 10.0;  // caller should bound the domain; refined on use
  u.convex_hint = true;
  return u;
}

inline ScalarField make_busemann_field(const SpaceForm& sf, const Tangent& xi) {
  ScalarField u;
  u.space = sf;
  u.lipschitz = 1.0;
  u.convex_hint = true;  // Busemann functions are convex
  const SpaceForm s = sf;
  const Tangent dir = xi;
  u.eval = [s, dir](const Point& p) { return busemann(s, dir, p); };
  if (!sf.hyperbolic()) {
    const Vec x = xi.vec;
    u.grad_exact = [x](const Point&) { return Vec(-x); };
    u.hess_exact = [](const Point&, const Vec&, const Vec&) { return 0.0; };
  } else {
    const double R = sf.R();
    const Vec q = origin(sf).coords + R * xi.vec;  // null direction
    u.grad_exact = [s, q, R](const Point& p) {
      const double c = -lorentz_dot(p.coords, q);
      Vec w = -(R / c) * q;
      return tangent_project(s, p, w);
    };
    const double sa = std::sqrt(sf.a());
    u.hess_exact = [s, q, R, sa](const Point& p, const Vec& V, const Vec& W) {
      // horospheres are umbilic with curvature sqrt(a)
      const double c = -lorentz_dot(p.coords, q);
      const Vec g = tangent_project(s, p, Vec(-(R / c) * q));
      const double vw = metric_dot(s, V, W);
      return sa * (vw - metric_dot(s, V, g) * metric_dot(s, W, g));
    };
  }
  u.spec = "busemann";
  return u;
}

}  // namespace chlab
