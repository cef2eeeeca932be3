#pragma once

#include <map>
#include <memory>
#include <random>

#include "chlab/scalar_field.hpp"
#include "chlab/shapes.hpp"

namespace chlab {

inline Point curve_point(const ParametricHypersurface& G, double s) {
  if (G.kind == ShapeKind::GeodesicSphere) return curvature_data(G, s).point;
  if (G.kind == ShapeKind::Rotational) {
    const Eigen::Vector2d q = G.prof(s - std::floor(s));
    return {(Vec(3) << q[0], 0.0, q[1]).finished()};
  }
  double ls;
  const CurvePiece& pc = locate_piece(G, s, ls);
  return G.space.hyperbolic() ? project(G.space, pc.pos(ls)) : Point{pc.pos(ls)};
}

// distance from x to the shape point at parameter s; rotational shapes reduce
// to the profile half-plane (exact by symmetry)
inline double param_distance(const ParametricHypersurface& G, const Point& x, double s) {
  if (G.kind == ShapeKind::Rotational) {
    const Eigen::Vector2d q = G.prof(s - std::floor(s));
    const double rx = std::hypot(x.coords[0], x.coords[1]);
    return std::hypot(rx - q[0], x.coords[2] - q[1]);
  }
  return distance(G.space, x, curve_point(G, s));
}

struct FootprintResult {
  std::vector<std::pair<double, Point>> minimizers;  // (parameter, point)
  int multiplicity = 0;
  bool continuum = false;
  double distance = 0.0;
};

namespace detail {

// golden-section refinement of a bracketed minimum of s -> param_distance
inline std::pair<double, double> golden_min(const std::function<double(double)>& f, double a,
                                            double b, int iters = 32) {
  const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
  double c = b - gr * (b - a), d = a + gr * (b - a);
  double fc = f(c), fd = f(d);
  for (int i = 0; i < iters && (b - a) > 1e-13; ++i) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - gr * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + gr * (b - a);
      fd = f(d);
    }
  }
  const double s = 0.5 * (a + b);
  return {s, f(s)};
}

inline double cyclic_dist(double a, double b) {
  double d = std::abs(a - b);
  d -= std::floor(d);
  return std::min(d, 1.0 - d);
}

}  // namespace detail

// All global minimizers of the distance to the shape, clustered; tol is the
// value window for "equally near".
inline FootprintResult footprints(const ParametricHypersurface& G, const Point& x, double tol,
                                  int coarse = 128) {
  if (G.kind == ShapeKind::GeodesicSphere) {
    // symmetric closed form: the footprint is along the radial geodesic
    FootprintResult out;
    const Point o = origin(G.space);
    const double d = distance(G.space, o, x);
    if (d < 1e-12) {
      out.continuum = true;
      out.multiplicity = 1 << 20;
      out.distance = G.radius;
      out.minimizers.emplace_back(0.0, curve_point(G, 0.0));
      return out;
    }
    const Vec dir = log_map(G.space, o, x).vec / d;
    out.minimizers.emplace_back(0.0, exp_map(G.space, o, {o.coords, G.radius * dir}));
    out.multiplicity = 1;
    out.distance = std::abs(d - G.radius);
    return out;
  }
  auto f = [&](double s) { return param_distance(G, x, s); };
  std::vector<double> fs(coarse);
  // dense-lattice fast path: scan on the squared chord (monotone in the true
  // distance, naive arithmetic), convert candidates only
  const bool lattice = G.dense_pts && (static_cast<int>(G.dense_pts->size()) % coarse == 0);
  if (lattice) {
    const auto& dp = *G.dense_pts;
    const int stride = static_cast<int>(dp.size()) / coarse;
    const int m = static_cast<int>(x.coords.size());
    const bool hyp = G.space.hyperbolic();
    // squared chord is monotone in the distance; convert lazily below
    for (int i = 0; i < coarse; ++i) {
      const Vec& q = dp[i * stride].coords;
      double c2 = 0.0;
      for (int k = 0; k < m; ++k) {
        const double d = x.coords[k] - q[k];
        c2 += (hyp && k == m - 1) ? -d * d : d * d;
      }
      fs[i] = c2;
    }
    const double R = hyp ? G.space.R() : 0.0;
    auto to_dist = [hyp, R](double c2) {
      const double c = std::sqrt(std::max(0.0, c2));
      return hyp ? 2.0 * R * std::asinh(c / (2.0 * R)) : c;
    };
    // monotone transform preserves local minima and the arg-extrema
    std::vector<double> c2s = fs;
    for (int i = 0; i < coarse; ++i) fs[i] = 0.0;
    double c2min = c2s[0], c2max = c2s[0];
    for (double v : c2s) {
      c2min = std::min(c2min, v);
      c2max = std::max(c2max, v);
    }
    const double fmin = to_dist(c2min), fmax = to_dist(c2max);
    FootprintResult out;
    if (fmax - fmin < tol) {
      out.continuum = true;
      out.multiplicity = 1 << 20;
      out.distance = fmin;
      out.minimizers.emplace_back(0.0, curve_point(G, 0.0));
      return out;
    }
    const double max_speed = G.dense_max_step * (G.dense_pts->size() / coarse);
    const double slack = 2.0 * max_speed + tol;
    std::vector<std::pair<double, double>> mins;
    for (int i = 0; i < coarse; ++i) {
      const double fprev = c2s[(i + coarse - 1) % coarse], fnext = c2s[(i + 1) % coarse];
      if (c2s[i] <= fprev && c2s[i] <= fnext && to_dist(c2s[i]) <= fmin + slack) {
        const double a = (i - 1.0) / coarse, b = (i + 1.0) / coarse;
        mins.push_back(detail::golden_min(f, a, b));
      }
    }
    if (mins.empty()) throw std::runtime_error("footprints: failed to bracket a minimum");
    double best = mins[0].second;
    for (auto& m2 : mins) best = std::min(best, m2.second);
    std::vector<std::pair<double, double>> keep;
    for (auto& m2 : mins)
      if (m2.second <= best + tol) keep.push_back(m2);
    std::sort(keep.begin(), keep.end());
    const double param_tol = 1e-3;
    for (auto& m2 : keep) {
      bool merged = false;
      for (auto& k : out.minimizers)
        if (detail::cyclic_dist(k.first, m2.first) < param_tol) merged = true;
      if (!merged)
        out.minimizers.emplace_back(m2.first - std::floor(m2.first), curve_point(G, m2.first));
    }
    out.multiplicity = static_cast<int>(out.minimizers.size());
    out.distance = best;
    return out;
  }
  for (int i = 0; i < coarse; ++i) fs[i] = f(static_cast<double>(i) / coarse);
  const double fmin = *std::min_element(fs.begin(), fs.end());
  const double fmax = *std::max_element(fs.begin(), fs.end());

  FootprintResult out;
  if (fmax - fmin < tol) {  // e.g. center of a circle
    out.continuum = true;
    out.multiplicity = 1 << 20;
    out.distance = fmin;
    out.minimizers.emplace_back(0.0, curve_point(G, 0.0));
    return out;
  }
  // no lattice bound available: refine every coarse local minimum
  const double slack = 1e300;
  std::vector<std::pair<double, double>> mins;  // (param, value)
  for (int i = 0; i < coarse; ++i) {
    const double fprev = fs[(i + coarse - 1) % coarse], fnext = fs[(i + 1) % coarse];
    if (fs[i] <= fprev && fs[i] <= fnext && fs[i] <= fmin + slack) {
      const double a = (i - 1.0) / coarse, b = (i + 1.0) / coarse;
      mins.push_back(detail::golden_min(f, a, b));
    }
  }
  if (mins.empty()) throw std::runtime_error("footprints: failed to bracket a minimum");
  double best = mins[0].second;
  for (auto& m : mins) best = std::min(best, m.second);
  // keep the global ones, cluster by parameter
  std::vector<std::pair<double, double>> keep;
  for (auto& m : mins)
    if (m.second <= best + tol) keep.push_back(m);
  std::sort(keep.begin(), keep.end());
  const double param_tol = 1e-3;
  for (auto& m : keep) {
    bool merged = false;
    for (auto& k : out.minimizers)
      if (detail::cyclic_dist(k.first, m.first) < param_tol) merged = true;
    if (!merged) out.minimizers.emplace_back(m.first - std::floor(m.first),
                                             curve_point(G, m.first));
  }
  out.multiplicity = static_cast<int>(out.minimizers.size());
  out.distance = best;
  return out;
}

inline double signed_distance(const ParametricHypersurface& G, const Point& x,
                              int coarse = 128) {
  if (G.sdist_exact) return G.sdist_exact(x);
  const auto fp = footprints(G, x, 1e-9, coarse);
  return contains(G, x) ? -fp.distance : fp.distance;
}

// signed distance as a ScalarField; gradient comes from the footprint
// geodesic (Lemma: grad d is tangent to it with unit norm)
inline ScalarField make_sdist_field(std::shared_ptr<const ParametricHypersurface> G) {
  ScalarField u;
  u.space = G->space;
  u.lipschitz = 1.0;
  u.spec = "sdist:" + G->spec;
  // structural d-convexity: Euclidean convex shapes always; hyperbolic ones
  // exactly when the shape is a distance level of a convex set (circle,
  // stadium carry closed-form distances for that reason)
  if (G->kind == ShapeKind::Curve || G->kind == ShapeKind::GeodesicSphere)
    u.convex_hint = G->space.hyperbolic() ? static_cast<bool>(G->sdist_exact)
                                          : is_convex(*G);
  u.eval = [G](const Point& x) { return signed_distance(*G, x); };
  u.grad_exact = [G](const Point& x) {
    const auto fp = footprints(*G, x, 1e-9);
    if (fp.multiplicity != 1)
      throw std::domain_error("sdist gradient: multiple footprints (medial point)");
    const double sd = contains(*G, x) ? -fp.distance : fp.distance;
    if (std::abs(sd) > 1e-6) {
      if (G->kind == ShapeKind::Rotational) {
        // gradient in the profile half-plane, lifted by symmetry
        const Eigen::Vector2d q = G->prof(fp.minimizers[0].first);
        const double rx = std::hypot(x.coords[0], x.coords[1]);
        const Eigen::Vector2d gp(rx - q[0], x.coords[2] - q[1]);
        const Eigen::Vector2d gn = gp / gp.norm() * (sd > 0 ? 1.0 : 1.0);
        Vec g(3);
        const double c = x.coords[0] / std::max(rx, 1e-300),
                     s = x.coords[1] / std::max(rx, 1e-300);
        g << gn[0] * c, gn[0] * s, gn[1];
        return Vec(contains(*G, x) ? -g : g);
      }
      return Vec(-log_map(G->space, x, fp.minimizers[0].second).vec / sd);
    }
    // on/near the hypersurface: use the outward normal at the footprint
    const double s = fp.minimizers[0].first;
    const auto cs = curvature_data(*G, s);
    return parallel_transport(G->space, cs.point, x, cs.normal.vec);
  };
  return u;
}

inline ScalarField make_dist_field(std::shared_ptr<const ParametricHypersurface> G) {
  ScalarField u = make_sdist_field(G);
  auto inner = u.eval;
  u.eval = [inner](const Point& x) { return std::abs(inner(x)); };
  u.grad_exact = nullptr;  // not differentiable on Gamma
  u.spec = "dist:" + G->spec;
  return u;
}

// ---- cut locus -------------------------------------------------------------

struct CutLocusApprox {
  std::vector<Point> points;
  std::vector<int> multiplicity;
  std::vector<double> dist_to_gamma;
  double reach_estimate = 0.0;
  double hausdorff_resolution = 0.0;
};

namespace detail {

struct CutSweep {
  const ParametricHypersurface* G;
  double jump_point_dist;  // footprint separation that flags a cut crossing
  std::map<std::pair<long long, long long>, double> cache;  // finest-grid key -> foot param
  double x0, y0, hfin;

  double foot_param_nocache(const Eigen::Vector2d& c) const {
    const Point p = from_chart(G->space, c);
    return footprints(*G, p, 1e-10).minimizers[0].first;
  }

  double foot_param(const Eigen::Vector2d& c) {
    const auto key = std::make_pair(llround((c[0] - x0) / hfin), llround((c[1] - y0) / hfin));
    auto it = cache.find(key);
    if (it != cache.end()) return it->second;
    const double s = foot_param_nocache(c);
    cache.emplace(key, s);
    return s;
  }

  bool jump(double s1, double s2) const {
    if (cyclic_dist(s1, s2) < 1e-6) return false;
    return distance(G->space, curve_point(*G, s1), curve_point(*G, s2)) > jump_point_dist;
  }
};

}  // namespace detail

// Grid sweep with footprint-parameter jump detection: quadtree refinement of
// flagged cells down to `res`, then bisection along flagged edges. Points
// carry footprint multiplicity >= 2 by construction of the jump test.
inline CutLocusApprox cut_locus(const ParametricHypersurface& G, double res) {
  const SpaceForm& sf = G.space;
  if (G.kind == ShapeKind::GeodesicSphere || (G.kind == ShapeKind::Curve && G.spec.rfind("circle", 0) == 0)) {
    CutLocusApprox out;
    out.points.push_back(origin(sf));
    out.multiplicity.push_back(1 << 20);
    out.dist_to_gamma.push_back(G.radius > 0 ? G.radius
                                             : std::abs(signed_distance(G, origin(sf))));
    out.reach_estimate = out.dist_to_gamma[0];
    out.hausdorff_resolution = res;
    return out;
  }
  if (G.n() != 2) throw std::invalid_argument("cut_locus: n=2 grid sweep only");

  // chart bounding box
  Eigen::Vector2d lo = G.chart_poly[0], hi = G.chart_poly[0];
  for (const auto& q : G.chart_poly) {
    lo = lo.cwiseMin(q);
    hi = hi.cwiseMax(q);
  }
  const double diam = (hi - lo).norm();
  const double h0 = diam / 48.0;
  int levels = 0;
  while (h0 / (1 << levels) > res && levels < 24) ++levels;
  const double hfin = h0 / (1 << levels);

  detail::CutSweep sweep;
  sweep.G = &G;
  sweep.jump_point_dist = std::max(6.0 * res, 0.004 * diam);
  sweep.x0 = lo[0];
  sweep.y0 = lo[1];
  sweep.hfin = hfin;

  // subsampled polygon: inside tests only classify grid nodes, boundary
  // cells are skipped anyway
  std::vector<Eigen::Vector2d> poly_coarse;
  for (size_t i = 0; i < G.chart_poly.size(); i += 8) poly_coarse.push_back(G.chart_poly[i]);
  auto inside = [&](const Eigen::Vector2d& c) {
    return chart_poly_contains(poly_coarse, c);
  };

  CutLocusApprox out;
  out.hausdorff_resolution = res;

  // bisect a flagged edge to res; emit only if the crossing point genuinely
  // has footprint multiplicity >= 2 (a rapidly migrating unique footprint
  // near a cusp also trips the separation test, but is not cut locus)
  auto bisect_edge = [&](Eigen::Vector2d a, Eigen::Vector2d b, double sa) {
    for (int it = 0; it < 60 && (b - a).norm() > 0.5 * res; ++it) {
      const Eigen::Vector2d m = 0.5 * (a + b);
      const double sm = sweep.foot_param_nocache(m);
      if (sweep.jump(sa, sm)) {
        b = m;
      } else {
        a = m;
        sa = sm;
      }
    }
    const Eigen::Vector2d m = 0.5 * (a + b);
    const Point p = from_chart(sf, m);
    const auto fp = footprints(G, p, 2.0 * res + 1e-9, 2048);
    if (fp.multiplicity < 2 && !fp.continuum) return;
    out.points.push_back(p);
    out.multiplicity.push_back(fp.continuum ? (1 << 20) : fp.multiplicity);
    out.dist_to_gamma.push_back(std::abs(signed_distance(G, p)));
  };

  // recursive cell processing; cells touching the boundary are skipped (the
  // medial axis stays a reach-distance inside, and reach >> h0 for the
  // supported shapes)
  std::function<void(Eigen::Vector2d, double)> process = [&](Eigen::Vector2d c, double h) {
    const Eigen::Vector2d pts[4] = {c, c + Eigen::Vector2d(h, 0), c + Eigen::Vector2d(h, h),
                                    c + Eigen::Vector2d(0, h)};
    for (const auto& q : pts)
      if (!inside(q)) return;
    double s[4];
    for (int i = 0; i < 4; ++i) s[i] = sweep.foot_param(pts[i]);
    bool flagged = false;
    for (int i = 0; i < 4; ++i) flagged |= sweep.jump(s[i], s[(i + 1) % 4]);
    if (!flagged) return;
    if (h > hfin * 1.5) {
      const double h2 = 0.5 * h;
      process(c, h2);
      process(c + Eigen::Vector2d(h2, 0), h2);
      process(c + Eigen::Vector2d(0, h2), h2);
      process(c + Eigen::Vector2d(h2, h2), h2);
      return;
    }
    for (int i = 0; i < 4; ++i)
      if (sweep.jump(s[i], s[(i + 1) % 4])) bisect_edge(pts[i], pts[(i + 1) % 4], s[i]);
  };

  const int nx = static_cast<int>(std::ceil((hi[0] - lo[0]) / h0));
  const int ny = static_cast<int>(std::ceil((hi[1] - lo[1]) / h0));
  for (int i = 0; i < nx; ++i)
    for (int j = 0; j < ny; ++j)
      process(lo + Eigen::Vector2d(i * h0, j * h0), h0);

  if (out.points.empty())
    throw std::runtime_error("cut_locus: resolution too coarse to find multiplicity-2 points");
  {  // dedup points emitted twice from shared cell edges
    std::map<std::pair<long long, long long>, int> seen;
    CutLocusApprox ded;
    ded.hausdorff_resolution = out.hausdorff_resolution;
    for (size_t i = 0; i < out.points.size(); ++i) {
      const Eigen::Vector2d c = to_chart(sf, out.points[i]);
      const auto key = std::make_pair(llround(c[0] / (0.5 * res)), llround(c[1] / (0.5 * res)));
      if (seen.emplace(key, 1).second) {
        ded.points.push_back(out.points[i]);
        ded.multiplicity.push_back(out.multiplicity[i]);
        ded.dist_to_gamma.push_back(out.dist_to_gamma[i]);
      }
    }
    out = std::move(ded);
  }
  out.reach_estimate = *std::min_element(out.dist_to_gamma.begin(), out.dist_to_gamma.end());
  return out;
}

// ---- convexity / monotonicity reports --------------------------------------

// worst second difference of the field along the geodesic from p to q
inline double worst_second_difference(const ScalarField& u, const Point& p, const Point& q,
                                      int npts = 33) {
  const Tangent l = log_map(u.space, p, q);
  std::vector<double> vals(npts);
  for (int i = 0; i < npts; ++i) {
    const double t = static_cast<double>(i) / (npts - 1);
    vals[i] = u.eval(exp_map(u.space, p, {p.coords, t * l.vec}));
  }
  double worst = 0.0;
  for (int i = 1; i + 1 < npts; ++i)
    worst = std::min(worst, vals[i + 1] - 2.0 * vals[i] + vals[i - 1]);
  return worst;
}

struct DConvexityReport {
  int n_chords = 0;
  double worst = 0.0;  // most negative second difference observed
  bool passed = false;
};

inline DConvexityReport dconvexity_check(const ParametricHypersurface& G, int n_geodesics,
                                         unsigned seed = 1, double tol = 1e-9) {
  if (!is_convex(G)) throw std::invalid_argument("dconvexity_check: shape is not convex");
  auto Gp = std::make_shared<ParametricHypersurface>(G);
  const ScalarField u = make_sdist_field(Gp);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  DConvexityReport rep;
  rep.n_chords = n_geodesics;
  for (int i = 0; i < n_geodesics; ++i) {
    const Point p = curve_point(G, unif(rng));
    const Point q = curve_point(G, unif(rng));
    rep.worst = std::min(rep.worst, worst_second_difference(u, p, q));
  }
  rep.passed = rep.worst > -tol - 1e-12;
  return rep;
}

struct MonotonicityReport {
  int n_samples = 0;
  int footprint_violations = 0;
  double worst_margin = 0.0;     // min of d(x°,Γ) - d(x,Γ) over samples
  int gradient_samples = 0;
  int gradient_violations = 0;
  double worst_alignment = 1.0;  // min <grad u, grad rhat>
  double tol_geom = 0.0;
  std::vector<Vec> violation_points;
};

// Appendix-B checks: footprints on the cut locus do not decrease the distance
// to Gamma, and grad d_Gamma aligns with grad d_cut almost everywhere.
inline MonotonicityReport projection_monotonicity_check(const ParametricHypersurface& G,
                                                        const CutLocusApprox& cut,
                                                        int n_samples, unsigned seed = 7,
                                                        double align_tol = 1e-6) {
  const SpaceForm& sf = G.space;
  auto Gp = std::make_shared<ParametricHypersurface>(G);
  const ScalarField u = make_sdist_field(Gp);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);

  // chart bounding box for rejection sampling
  Eigen::Vector2d lo = G.chart_poly[0], hi = G.chart_poly[0];
  for (const auto& q : G.chart_poly) {
    lo = lo.cwiseMin(q);
    hi = hi.cwiseMax(q);
  }

  MonotonicityReport rep;
  rep.tol_geom = 2.0 * cut.hausdorff_resolution;
  int produced = 0;
  while (produced < n_samples) {
    Eigen::Vector2d c(lo[0] + unif(rng) * (hi[0] - lo[0]), lo[1] + unif(rng) * (hi[1] - lo[1]));
    if (!chart_poly_contains(G.chart_poly, c)) continue;
    const Point x = from_chart(sf, c);
    ++produced;
    ++rep.n_samples;

    // nearest cut sample and runner-up
    int best = -1, second = -1;
    double bd = 1e300, sd = 1e300;
    for (size_t i = 0; i < cut.points.size(); ++i) {
      const double d = distance(sf, x, cut.points[i]);
      if (d < bd) {
        second = best;
        sd = bd;
        best = static_cast<int>(i);
        bd = d;
      } else if (d < sd) {
        second = static_cast<int>(i);
        sd = d;
      }
    }
    const double dx = std::abs(signed_distance(G, x));
    const double margin = cut.dist_to_gamma[best] - dx;
    rep.worst_margin = std::min(rep.worst_margin, margin);
    if (margin < -rep.tol_geom) {
      ++rep.footprint_violations;
      rep.violation_points.push_back(x.coords);
    }

    // gradient alignment at FD-regular points
    if (bd < 20.0 * cut.hausdorff_resolution) continue;  // rhat direction noise
    if (second >= 0 && std::abs(sd - bd) < cut.hausdorff_resolution &&
        distance(sf, cut.points[best], cut.points[second]) > 6.0 * cut.hausdorff_resolution)
      continue;  // ambiguous nearest cut point: rhat kink
    Vec grad_rhat;
    try {
      grad_rhat = -log_map(sf, x, cut.points[best]).vec / bd;
      const Tangent gu = gradient(u, x);
      ++rep.gradient_samples;
      const double align = metric_dot(sf, gu.vec, grad_rhat);
      rep.worst_alignment = std::min(rep.worst_alignment, align);
      if (align < -align_tol) ++rep.gradient_violations;
    } catch (const std::domain_error&) {
      continue;  // medial point: not FD-regular
    }
  }
  return rep;
}

// ---- field registry ---------------------------------------------------------

inline ScalarField make_field(const SpaceForm& sf, const std::string& spec) {
  const auto colon = spec.find(':');
  const std::string name = spec.substr(0, colon);
  const std::string rest = colon == std::string::npos ? "" : spec.substr(colon + 1);
  if (name == "dist" || name == "sdist") {
    auto G = std::make_shared<ParametricHypersurface>(make_shape(sf, rest));
    return name == "dist" ? make_dist_field(G) : make_sdist_field(G);
  }
  if (name == "busemann") {
    const auto v = parse_numbers(rest);
    if (static_cast<int>(v.size()) != sf.dim)
      throw std::invalid_argument("busemann:<direction components>");
    const Point o = origin(sf);
    const Mat E = tangent_basis(sf, o);
    Vec d = Eigen::Map<const Vec>(v.data(), v.size());
    Vec xi = E * d;
    xi /= metric_norm(sf, xi);
    return make_busemann_field(sf, {o.coords, xi});
  }
  if (name == "radial2") {
    Point c = origin(sf);
    if (!rest.empty()) {
      const auto v = parse_numbers(rest);
      if (static_cast<int>(v.size()) != 2 || sf.dim != 2)
        throw std::invalid_argument("radial2:<chart coords> needs n=2");
      c = from_chart(sf, {v[0], v[1]});
    }
    return make_radial2(sf, c);
  }
  throw std::invalid_argument("unknown field spec: " + spec);
}

}  // namespace chlab
