#pragma once

#include <vector>

#include "chlab/quadrature.hpp"
#include "chlab/shapes.hpp"

namespace chlab {

// Sign conventions, fixed once for the whole module (the literature flips
// signs between sources; everything here is written for the shape operator
// S(V) = nabla_V nu with outward nu, so convex hypersurfaces have kappa >= 0):
//
//   inward offset lambda > 0:   kappa' = kappa^2 + K0
//                               J'     = -sigma_1(kappa) J
//                               GK'    = sigma_1(kappa) GK + K0 sigma_{n-2}(kappa)
//   outward offset t = -lambda integrates the sign-flipped system.
//
// In a space form R_{l n l n} = K0 for every tangent direction, so the matrix
// Riccati equation diagonalizes in the transported principal frame and the
// scalar system above is exact. The GK equation is the derivative of
// GK = prod kappa_i under the kappa ODE; the sum of R_{l n l n} prod_{i != l}
// kappa_i collapses to K0 sigma_{n-2}.

struct FlowSampleState {
  Point base;       // moved point at the current offset
  Tangent normal;   // outward normal transported along the flow geodesic
  Vec kappas;
  double jacobian = 1.0;  // ODE-transported area factor, J(0) = 1
  double gk = 0.0;        // ODE-transported Gauss-Kronecker curvature
  double mean = 0.0;
  double area_weight = 0.0;  // start measure d sigma
};

struct FlowState {
  double lambda = 0.0;  // inward offset reached
  double ric = 0.0;     // Ricci curvature in the normal direction, (n-1) K0
  std::vector<FlowSampleState> samples;
  bool focal = false;
  double focal_lo = 0.0, focal_hi = 0.0;  // bracket when focal was hit
  double gk_ode_vs_product = 0.0;         // worst transport consistency gap
  double step_halving_error = 0.0;        // RK4 error estimate on kappa
};

struct FlowTraceRow {
  double lambda = 0.0;
  int sample_id = 0;
  Vec kappas;
  double jacobian = 1.0, gk = 0.0, mean = 0.0;
};

inline std::vector<CurvatureSample> sample_shape(const ParametricHypersurface& G, int n) {
  std::vector<CurvatureSample> out;
  if (G.kind == ShapeKind::GeodesicSphere) {
    out.push_back(curvature_data(G, 0.0));
    return out;
  }
  const int np = G.kind == ShapeKind::Curve ? static_cast<int>(G.pieces.size()) : 1;
  const int per = std::max(1, n / np);
  for (int ip = 0; ip < np; ++ip)
    for (int j = 0; j < per; ++j) {
      auto cs = curvature_data(G, (ip + (j + 0.5) / per) / np);
      cs.area_weight /= per * np;  // quadrature weight of this sample
      out.push_back(std::move(cs));
    }
  return out;
}

namespace detail {

struct RiccatiODE {
  double K0;
  int m;  // number of principal curvatures

  // state: kappas[0..m-1], J, GK
  void rhs(const Vec& y, Vec& dy) const {
    double s1 = 0.0;
    for (int i = 0; i < m; ++i) s1 += y[i];
    for (int i = 0; i < m; ++i) dy[i] = y[i] * y[i] + K0;
    dy[m] = -s1 * y[m];
    // sum_r R_{rnrn} prod_{i != r} kappa_i = K0 sigma_{n-2} in a space form
    double s = 0.0;
    for (int r = 0; r < m; ++r) {
      double p = 1.0;
      for (int i = 0; i < m; ++i)
        if (i != r) p *= y[i];
      s += p;
    }
    dy[m + 1] = s1 * y[m + 1] + K0 * s;
  }
};

inline bool rk4_step(const RiccatiODE& ode, Vec& y, double h, double cap) {
  const int dim = static_cast<int>(y.size());
  Vec k1(dim), k2(dim), k3(dim), k4(dim), t(dim);
  ode.rhs(y, k1);
  t = y + 0.5 * h * k1;
  ode.rhs(t, k2);
  t = y + 0.5 * h * k2;
  ode.rhs(t, k3);
  t = y + h * k3;
  ode.rhs(t, k4);
  y += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  if (!y.allFinite()) return false;
  for (int i = 0; i < ode.m; ++i)  // magnitude cap applies to the curvatures
    if (std::abs(y[i]) > cap) return false;
  return true;
}

}  // namespace detail

// RK4 integration of the coupled curvature/Jacobian/GK system in the inward
// convention; negative lambda_end flows outward. Focal events abort with the
// focal time bracketed between the last two steps.
// first focal time of a principal curvature k0 along the inward flow:
// root of A(k0, -lambda) = cs(a,lambda) - k0 sn(a,lambda)
inline double focal_time_inward(double a, double k0) {
  if (a == 0.0) return k0 > 0.0 ? 1.0 / k0 : std::numeric_limits<double>::infinity();
  const double sa = std::sqrt(a);
  if (k0 <= sa) return std::numeric_limits<double>::infinity();
  return std::atanh(sa / k0) / sa;
}

inline FlowState riccati_evolve(const SpaceForm& sf, const std::vector<CurvatureSample>& start,
                                double lambda_end, double step,
                                std::vector<FlowTraceRow>* trace = nullptr,
                                int trace_every = 16) {
  if (step <= 0.0) throw std::invalid_argument("riccati_evolve: step > 0 required");
  const int m = sf.dim - 1;
  const double cap = 1e3 / step;
  detail::RiccatiODE ode{sf.K0, m};

  const int nsteps = static_cast<int>(std::ceil(std::abs(lambda_end) / step));
  const double h = lambda_end / std::max(1, nsteps);

  // closed-form focal predictor (flat: sign change of 1 - lambda kappa0);
  // the magnitude cap below stays as a safety net
  double focal_pred = std::numeric_limits<double>::infinity();
  const double dir = lambda_end >= 0 ? 1.0 : -1.0;
  for (const auto& cs : start)
    for (int i = 0; i < cs.principal_curvatures.size(); ++i)
      focal_pred = std::min(
          focal_pred, focal_time_inward(sf.a(), dir * cs.principal_curvatures[i]));

  FlowState st;
  st.ric = (sf.dim - 1) * sf.K0;
  std::vector<Vec> ys;
  for (const auto& cs : start) {
    if (!cs.principal_curvatures.allFinite())
      throw std::invalid_argument("riccati_evolve: non-finite start curvature");
    Vec y(m + 2);
    y.head(m) = cs.principal_curvatures;
    y[m] = 1.0;
    y[m + 1] = cs.gk;
    ys.push_back(std::move(y));
  }

  auto emit_trace = [&](double lam) {
    if (!trace) return;
    for (size_t i = 0; i < ys.size(); ++i) {
      FlowTraceRow row;
      row.lambda = lam;
      row.sample_id = static_cast<int>(i);
      row.kappas = ys[i].head(m);
      row.jacobian = ys[i][m];
      row.gk = ys[i][m + 1];
      row.mean = ys[i].head(m).sum() / m;
      trace->push_back(std::move(row));
    }
  };
  emit_trace(0.0);

  double lam = 0.0;
  for (int k = 0; k < nsteps; ++k) {
    if (std::abs(lam + h) >= focal_pred) {
      st.focal = true;
      st.focal_lo = std::abs(lam);
      st.focal_hi = std::abs(lam + h);
      st.lambda = lam;
      break;
    }
    bool ok = true;
    for (auto& y : ys) ok &= detail::rk4_step(ode, y, h, cap);
    if (!ok) {
      st.focal = true;
      st.focal_lo = std::abs(lam);
      st.focal_hi = std::abs(lam + h);
      st.lambda = lam;
      break;
    }
    lam += h;
    if (trace && ((k + 1) % trace_every == 0 || k + 1 == nsteps)) emit_trace(lam);
  }
  if (!st.focal) st.lambda = lam;

  // step-halving error estimate on the first sample's curvature
  if (!start.empty() && !st.focal) {
    Vec y2(m + 2);
    y2.head(m) = start[0].principal_curvatures;
    y2[m] = 1.0;
    y2[m + 1] = start[0].gk;
    bool ok = true;
    for (int k = 0; k < 2 * nsteps && ok; ++k) ok = detail::rk4_step(ode, y2, 0.5 * h, cap);
    if (ok) st.step_halving_error = (y2.head(m) - ys[0].head(m)).cwiseAbs().maxCoeff();
  }

  // assemble samples; transport base point and normal along the flow geodesic
  for (size_t i = 0; i < ys.size(); ++i) {
    FlowSampleState s;
    const auto& cs = start[i];
    const double t = -st.lambda;  // ambient offset along the outward normal
    s.base = exp_map(sf, cs.point, {cs.point.coords, t * cs.normal.vec});
    Vec tn = parallel_transport(sf, cs.point, s.base, cs.normal.vec);
    s.normal = {s.base.coords, tn};
    s.kappas = ys[i].head(m);
    s.jacobian = ys[i][m];
    s.gk = ys[i][m + 1];
    s.mean = s.kappas.sum() / m;
    s.area_weight = cs.area_weight;
    st.gk_ode_vs_product =
        std::max(st.gk_ode_vs_product, std::abs(s.gk - s.kappas.prod()));
    st.samples.push_back(std::move(s));
  }
  return st;
}

// ---- closed-form parallel transport of curvature -----------------------------

// focal check for an outward offset t (t < 0 = inward): the Jacobian factor
// A(kappa, t) = cs(a,t) + kappa sn(a,t) must stay positive on [0, t]
inline bool offset_regular(double a, double kappa, double t) {
  return offset_jacobian_factor(a, kappa, t) > 1e-12 &&
         (t >= 0.0 || offset_jacobian_factor(a, kappa, t) > 0.0);
}

// total curvature of the parallel hypersurface at signed outward offset t,
// area transported by the Jacobian product; corner atoms (hull boundaries)
// spread into geodesic arcs whose contribution scales with cs(a, t)
inline double parallel_total_curvature(const ParametricHypersurface& G, double t,
                                       int nsamples = 2048) {
  const double a = G.space.a();
  const double smooth = integrate_samples(G, nsamples, [&](const CurvatureSample& cs) {
    double gk = 1.0, J = 1.0;
    for (int i = 0; i < cs.principal_curvatures.size(); ++i) {
      const double k0 = cs.principal_curvatures[i];
      if (!offset_regular(a, k0, t))
        throw std::domain_error("parallel_total_curvature: focal event inside [0, t]");
      gk *= offset_curvature(a, k0, t);
      J *= offset_jacobian_factor(a, k0, t);
    }
    return gk * J;
  });
  double atoms = 0.0;
  for (double ang : G.corner_angles) atoms += ang * sf_cs(a, t);
  return smooth + atoms;
}

// ---- half-tube in M x R -----------------------------------------------------

// Total curvature of tube^+_eps(Gamma) in M^2 x R for a closed curve Gamma.
// With f(s,theta) = exp_p(eps nu_p(theta)) the product structure gives
// principal curvatures 1/eps and cos(theta) A'(rho)/A(rho) at rho = eps cos
// theta, and area element A eps ds dtheta, so GK dA = cos(theta) A'(s, eps
// cos theta) ds dtheta exactly. Euclidean case: A' = kappa(s), exact for
// every eps below the focal offset.
inline double tube_total_curvature(const ParametricHypersurface& G, double eps,
                                   int nsamples = 2048, int ntheta = 64) {
  if (G.n() != 2) throw std::invalid_argument("tube_total_curvature: base curve in M^2");
  if (eps <= 0.0) throw std::invalid_argument("tube_total_curvature: eps > 0");
  if (!G.corner_angles.empty())
    for (double ang : G.corner_angles)
      if (std::abs(ang) > 1e-12)
        throw std::invalid_argument("tube_total_curvature: smooth curves only");
  const double a = G.space.a();
  Eigen::VectorXd th, wt;
  gauss_legendre(ntheta, th, wt);
  return integrate_samples(G, nsamples, [&](const CurvatureSample& cs) {
    const double k = cs.principal_curvatures[0];
    if (!offset_regular(a, k, eps))
      throw std::domain_error("tube_total_curvature: eps exceeds the focal offset");
    double acc = 0.0;
    for (int i = 0; i < ntheta; ++i) {
      const double theta = 0.5 * M_PI * th[i];
      const double rho = eps * std::cos(theta);
      acc += wt[i] * std::cos(theta) * offset_jacobian_factor_d(a, k, rho);
    }
    return 0.5 * M_PI * acc;
  });
}

// ---- small-ball defect -------------------------------------------------------

// |G(boundary of B_r) - n omega_n| from the ball closed forms
inline double small_ball_defect(const SpaceForm& sf, double r) {
  if (r <= 0.0) throw std::invalid_argument("small_ball_defect: r > 0");
  const auto g = ball_geometry(sf, r);
  const double nwn = sphere_constants(sf.dim).sphere_area;
  return std::abs(g.gk_boundary * g.per - nwn);
}

// Total curvature of a geodesic sphere via the Riccati route. The outward
// curvature ODE kappa' = -kappa^2 + a blows up at the center, so integrate
// the reciprocal y = 1/kappa (y' = 1 - a y^2, y(0) = 0, regular) and couple
// the area ODE (log per)' = (n-1)/y from a small seed radius.
inline double sphere_total_curvature_ode(const SpaceForm& sf, double rho, double step) {
  const int m = sf.dim - 1;
  const double a = sf.a();
  auto fy = [a](double y) { return 1.0 - a * y * y; };
  const double r0 = std::max(4.0 * step, 1e-3);
  if (rho <= r0) throw std::invalid_argument("sphere_total_curvature_ode: rho too small");

  double y = 0.0, eps = 0.0;
  auto step_y = [&](double h) {
    const double k1 = fy(y), k2 = fy(y + 0.5 * h * k1), k3 = fy(y + 0.5 * h * k2),
                 k4 = fy(y + h * k3);
    y += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    eps += h;
  };
  int n0 = static_cast<int>(std::ceil(r0 / step));
  for (int k = 0; k < n0; ++k) step_y(r0 / n0);

  // Euclidean seed for the perimeter at r0, relative error O(a r0^2)
  double logP = std::log(sphere_constants(sf.dim).sphere_area) + m * std::log(r0);
  const int nsteps = static_cast<int>(std::ceil((rho - r0) / step));
  const double h = (rho - r0) / nsteps;
  for (int k = 0; k < nsteps; ++k) {
    // coupled RK4 in (y, logP)
    const double y0 = y;
    const double k1y = fy(y0), k1p = m / y0;
    const double y2 = y0 + 0.5 * h * k1y;
    const double k2y = fy(y2), k2p = m / y2;
    const double y3 = y0 + 0.5 * h * k2y;
    const double k3y = fy(y3), k3p = m / y3;
    const double y4 = y0 + h * k3y;
    const double k4y = fy(y4), k4p = m / y4;
    y = y0 + h / 6.0 * (k1y + 2.0 * k2y + 2.0 * k3y + k4y);
    logP += h / 6.0 * (k1p + 2.0 * k2p + 2.0 * k3p + k4p);
    if (y <= 0.0) throw std::runtime_error("sphere_total_curvature_ode: focal event");
  }
  return std::pow(1.0 / y, m) * std::exp(logP);
}

}  // namespace chlab
