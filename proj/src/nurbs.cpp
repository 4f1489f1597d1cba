#include "splinegrad/nurbs.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "splinegrad/errors.hpp"
#include "splinegrad/parallel.hpp"

namespace splinegrad {

bool KnotVector::is_clamped() const {
  const std::size_t d = static_cast<std::size_t>(degree);
  for (std::size_t i = 1; i <= d; ++i) {
    if (knots[i] != knots[0]) return false;
    if (knots[knots.size() - 1 - i] != knots.back()) return false;
  }
  return true;
}

void KnotVector::validate() const {
  if (degree < 0) throw ConfigError("knot vector degree must be non-negative");
  if (knots.size() < static_cast<std::size_t>(degree) + 2) {
    throw ConfigError("knot vector too short for degree " + std::to_string(degree));
  }
  for (std::size_t i = 1; i < knots.size(); ++i) {
    if (knots[i] < knots[i - 1]) throw DomainError("knot vector must be non-decreasing");
  }
  if (!(min_param() < max_param())) {
    throw DomainError("knot vector has an empty parametric range");
  }
}

KnotVector KnotVector::uniform_clamped(int degree, std::size_t ctrl_count) {
  if (ctrl_count < static_cast<std::size_t>(degree) + 1) {
    throw ConfigError("clamped knot vector needs at least degree+1 control points");
  }
  KnotVector kv;
  kv.degree = degree;
  const std::size_t interior = ctrl_count - degree - 1;
  kv.knots.assign(degree + 1, 0.0);
  for (std::size_t j = 1; j <= interior; ++j) {
    kv.knots.push_back(static_cast<double>(j) / static_cast<double>(interior + 1));
  }
  kv.knots.insert(kv.knots.end(), degree + 1, 1.0);
  return kv;
}

int find_span(const KnotVector& kv, double u) {
  const int d = kv.degree;
  const int last = static_cast<int>(kv.ctrl_count());  // index of the range's right end
  if (u < kv.knots[d] || u > kv.knots[last]) {
    throw DomainError("parameter " + std::to_string(u) + " outside the knot range [" +
                      std::to_string(kv.knots[d]) + ", " + std::to_string(kv.knots[last]) + "]");
  }
  if (u >= kv.knots[last]) {
    // Right endpoint: last non-degenerate span.
    int i = last - 1;
    while (i > d && kv.knots[i] == kv.knots[i + 1]) --i;
    return i;
  }
  int lo = d, hi = last;
  while (hi - lo > 1) {
    const int mid = (lo + hi) / 2;
    if (u < kv.knots[mid]) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  return lo;
}

std::vector<double> basis_funs(const KnotVector& kv, int span, double u) {
  const int d = kv.degree;
  std::vector<double> n(d + 1, 0.0), left(d + 1, 0.0), right(d + 1, 0.0);
  n[0] = 1.0;
  for (int j = 1; j <= d; ++j) {
    left[j] = u - kv.knots[span + 1 - j];
    right[j] = kv.knots[span + j] - u;
    double saved = 0.0;
    for (int r = 0; r < j; ++r) {
      const double den = right[r + 1] + left[j - r];
      const double temp = den != 0.0 ? n[r] / den : 0.0;
      n[r] = saved + right[r + 1] * temp;
      saved = left[j - r] * temp;
    }
    n[j] = saved;
  }
  return n;
}

std::vector<double> basis_funs_du(const KnotVector& kv, int span, double u) {
  const int d = kv.degree;
  std::vector<double> dn(d + 1, 0.0);
  if (d == 0) return dn;
  // Degree d-1 nonzero values N_{span-d+1 .. span}.
  std::vector<double> lower(d, 0.0), left(d, 0.0), right(d, 0.0);
  lower[0] = 1.0;
  for (int j = 1; j <= d - 1; ++j) {
    left[j] = u - kv.knots[span + 1 - j];
    right[j] = kv.knots[span + j] - u;
    double saved = 0.0;
    for (int r = 0; r < j; ++r) {
      const double den = right[r + 1] + left[j - r];
      const double temp = den != 0.0 ? lower[r] / den : 0.0;
      lower[r] = saved + right[r + 1] * temp;
      saved = left[j - r] * temp;
    }
    lower[j] = saved;
  }
  for (int h = 0; h <= d; ++h) {
    const int i = span - d + h;
    double acc = 0.0;
    if (h >= 1) {
      const double den = kv.knots[i + d] - kv.knots[i];
      if (den != 0.0) acc += lower[h - 1] / den;
    }
    if (h <= d - 1) {
      const double den = kv.knots[i + d + 1] - kv.knots[i + 1];
      if (den != 0.0) acc -= lower[h] / den;
    }
    dn[h] = d * acc;
  }
  return dn;
}

void NurbsCurve::validate() const {
  knots.validate();
  if (ctrl.size() != weights.size()) {
    throw DimensionError("curve control point and weight counts differ");
  }
  if (ctrl.size() != knots.ctrl_count()) {
    throw DimensionError("curve knot count inconsistent with control point count");
  }
  for (double w : weights) {
    if (!(w > 0.0)) throw DomainError("curve weights must be positive");
  }
}

Vec3 eval_curve(const NurbsCurve& curve, double u) {
  const int d = curve.knots.degree;
  const int span = find_span(curve.knots, u);
  const std::vector<double> n = basis_funs(curve.knots, span, u);
  Vec3 num = {0.0, 0.0, 0.0};
  double den = 0.0;
  for (int h = 0; h <= d; ++h) {
    const int i = span - d + h;
    const double nw = n[h] * curve.weights[i];
    num += nw * curve.ctrl[i];
    den += nw;
  }
  return (1.0 / den) * num;
}

void NurbsSurface::validate() const {
  knots_u.validate();
  knots_v.validate();
  if (ctrl.empty() || ctrl[0].empty()) throw DimensionError("surface control grid is empty");
  if (weights.size() != ctrl.size()) throw DimensionError("surface weight grid shape mismatch");
  for (std::size_t i = 0; i < ctrl.size(); ++i) {
    if (ctrl[i].size() != ctrl[0].size() || weights[i].size() != ctrl[0].size()) {
      throw DimensionError("surface control/weight grid is ragged");
    }
    for (double w : weights[i]) {
      if (!(w > 0.0)) throw DomainError("surface weights must be positive");
    }
  }
  if (ctrl_count_u() != knots_u.ctrl_count() || ctrl_count_v() != knots_v.ctrl_count()) {
    throw DimensionError("surface knot vectors inconsistent with control grid shape");
  }
}

namespace {

std::vector<double> uniform_params(const KnotVector& kv, std::size_t count) {
  std::vector<double> p(count);
  const double lo = kv.min_param(), hi = kv.max_param();
  for (std::size_t i = 0; i < count; ++i) {
    p[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(count - 1);
  }
  p.back() = hi;
  return p;
}

void eval_point(const NurbsSurface& s, double u, double v, SurfacePointCache& pc) {
  const int p = s.knots_u.degree, q = s.knots_v.degree;
  pc.u_span = find_span(s.knots_u, u);
  pc.v_span = find_span(s.knots_v, v);
  pc.basis_u = basis_funs(s.knots_u, pc.u_span, u);
  pc.basis_v = basis_funs(s.knots_v, pc.v_span, v);
  // Homogeneous accumulation over the active (p+1)(q+1) window.
  double acc[4] = {0.0, 0.0, 0.0, 0.0};
  for (int a = 0; a <= p; ++a) {
    const int i = pc.u_span - p + a;
    for (int b = 0; b <= q; ++b) {
      const int j = pc.v_span - q + b;
      const double nw = pc.basis_u[a] * pc.basis_v[b] * s.weights[i][j];
      const Vec3& cp = s.ctrl[i][j];
      acc[0] += nw * cp[0];
      acc[1] += nw * cp[1];
      acc[2] += nw * cp[2];
      acc[3] += nw;
    }
  }
  pc.denom = acc[3];
  pc.point = {acc[0] / acc[3], acc[1] / acc[3], acc[2] / acc[3]};
}

}  // namespace

PointGrid eval_surface_grid(const NurbsSurface& surface, std::size_t n_grid, std::size_t m_grid,
                            EvalCache* cache) {
  surface.validate();
  if (n_grid < 2 || m_grid < 2) throw ConfigError("surface grid needs at least 2x2 points");
  EvalCache local;
  EvalCache& ec = cache ? *cache : local;
  ec.rows = n_grid;
  ec.cols = m_grid;
  ec.us = uniform_params(surface.knots_u, n_grid);
  ec.vs = uniform_params(surface.knots_v, m_grid);
  ec.pts.assign(n_grid * m_grid, SurfacePointCache{});

  PointGrid out(n_grid, m_grid);
  parallel_chunks(out.size(), [&](int, std::size_t lo, std::size_t hi) {
    for (std::size_t idx = lo; idx < hi; ++idx) {
      const std::size_t r = idx / m_grid, c = idx % m_grid;
      eval_point(surface, ec.us[r], ec.vs[c], ec.pts[idx]);
      out.data[idx] = ec.pts[idx].point;
    }
  });
  return out;
}

CtrlWindow grad_wrt_ctrl(const NurbsSurface& surface, const EvalCache& cache,
                         std::size_t point_index) {
  const SurfacePointCache& pc = cache.at(point_index);
  const int p = surface.knots_u.degree, q = surface.knots_v.degree;
  CtrlWindow w;
  w.i0 = pc.u_span - p;
  w.j0 = pc.v_span - q;
  w.nu = p + 1;
  w.nv = q + 1;
  w.factors.resize(w.nu * w.nv);
  for (int a = 0; a <= p; ++a) {
    for (int b = 0; b <= q; ++b) {
      w.factors[a * w.nv + b] =
          pc.basis_u[a] * pc.basis_v[b] * surface.weights[w.i0 + a][w.j0 + b] / pc.denom;
    }
  }
  return w;
}

WeightWindow grad_wrt_weights(const NurbsSurface& surface, const EvalCache& cache,
                              std::size_t point_index) {
  const SurfacePointCache& pc = cache.at(point_index);
  const int p = surface.knots_u.degree, q = surface.knots_v.degree;
  WeightWindow w;
  w.i0 = pc.u_span - p;
  w.j0 = pc.v_span - q;
  w.nu = p + 1;
  w.nv = q + 1;
  w.grads.resize(w.nu * w.nv);
  for (int a = 0; a <= p; ++a) {
    for (int b = 0; b <= q; ++b) {
      // (N_a N_b P w - NR N_a N_b) / w^2 with NR = S*w reduces to
      // N_a N_b (P - S) / w.
      const double nn = pc.basis_u[a] * pc.basis_v[b] / pc.denom;
      w.grads[a * w.nv + b] = nn * (surface.ctrl[w.i0 + a][w.j0 + b] - pc.point);
    }
  }
  return w;
}

void accumulate_knot_gradient(const KnotVector& kv, int span, const std::vector<double>& basis,
                              double u, double scale, KnotGradMode mode, double sigma,
                              std::vector<double>& dknots) {
  if (!(sigma > 0.0)) throw ConfigError("knot gradient bandwidth sigma must be positive");
  if (dknots.size() != kv.knots.size()) {
    throw DimensionError("knot gradient buffer does not match knot vector length");
  }
  for (int h = 0; h <= kv.degree; ++h) {
    const std::size_t slot = static_cast<std::size_t>(span) + h;
    const double knot = kv.knots[slot];
    const double surrogate =
        mode == KnotGradMode::BasisTimesKnot ? basis[h] * knot : basis[h] * (u - knot) / (sigma * sigma);
    dknots[slot] += scale * surrogate;
  }
}

void grad_wrt_knots(const NurbsSurface& surface, const EvalCache& cache, const PointGrid& upstream,
                    double sigma, KnotGradMode mode, std::vector<double>& dknots_u,
                    std::vector<double>& dknots_v) {
  if (upstream.rows != cache.rows || upstream.cols != cache.cols) {
    throw DimensionError("upstream grid shape does not match the evaluation cache");
  }
  dknots_u.assign(surface.knots_u.knots.size(), 0.0);
  dknots_v.assign(surface.knots_v.knots.size(), 0.0);
  for (std::size_t idx = 0; idx < cache.pts.size(); ++idx) {
    const SurfacePointCache& pc = cache.pts[idx];
    const Vec3& g = upstream.data[idx];
    const double scale = g[0] + g[1] + g[2];
    if (scale == 0.0) continue;
    accumulate_knot_gradient(surface.knots_u, pc.u_span, pc.basis_u, cache.us[idx / cache.cols],
                             scale, mode, sigma, dknots_u);
    accumulate_knot_gradient(surface.knots_v, pc.v_span, pc.basis_v, cache.vs[idx % cache.cols],
                             scale, mode, sigma, dknots_v);
  }
}

NurbsGradients backward_surface(const NurbsSurface& surface, const EvalCache& cache,
                                const PointGrid& upstream, double sigma, KnotGradMode mode) {
  if (upstream.rows != cache.rows || upstream.cols != cache.cols) {
    throw DimensionError("upstream grid shape does not match the evaluation cache");
  }
  if (!(sigma > 0.0)) throw ConfigError("knot gradient bandwidth sigma must be positive");
  const std::size_t nu = surface.ctrl_count_u(), nv = surface.ctrl_count_v();
  const int p = surface.knots_u.degree, q = surface.knots_v.degree;

  auto zero_grads = [&] {
    NurbsGradients g;
    g.d_ctrl.assign(nu, std::vector<Vec3>(nv, Vec3{0.0, 0.0, 0.0}));
    g.d_weights.assign(nu, std::vector<double>(nv, 0.0));
    g.d_knots_u.assign(surface.knots_u.knots.size(), 0.0);
    g.d_knots_v.assign(surface.knots_v.knots.size(), 0.0);
    return g;
  };

  const int workers = std::min<std::size_t>(num_threads(), std::max<std::size_t>(cache.pts.size(), 1));
  std::vector<NurbsGradients> partial(workers, zero_grads());
  parallel_chunks(cache.pts.size(), [&](int chunk, std::size_t lo, std::size_t hi) {
    NurbsGradients& g = partial[chunk];
    for (std::size_t idx = lo; idx < hi; ++idx) {
      const SurfacePointCache& pc = cache.pts[idx];
      const Vec3& up = upstream.data[idx];
      const int i0 = pc.u_span - p, j0 = pc.v_span - q;
      for (int a = 0; a <= p; ++a) {
        for (int b = 0; b <= q; ++b) {
          const double nn = pc.basis_u[a] * pc.basis_v[b] / pc.denom;
          g.d_ctrl[i0 + a][j0 + b] += (nn * surface.weights[i0 + a][j0 + b]) * up;
          g.d_weights[i0 + a][j0 + b] += nn * dot(surface.ctrl[i0 + a][j0 + b] - pc.point, up);
        }
      }
      const double scale = up[0] + up[1] + up[2];
      if (scale != 0.0) {
        accumulate_knot_gradient(surface.knots_u, pc.u_span, pc.basis_u, cache.us[idx / cache.cols],
                                 scale, mode, sigma, g.d_knots_u);
        accumulate_knot_gradient(surface.knots_v, pc.v_span, pc.basis_v, cache.vs[idx % cache.cols],
                                 scale, mode, sigma, g.d_knots_v);
      }
    }
  });

  NurbsGradients total = std::move(partial[0]);
  for (int c = 1; c < workers; ++c) {
    const NurbsGradients& g = partial[c];
    for (std::size_t i = 0; i < nu; ++i) {
      for (std::size_t j = 0; j < nv; ++j) {
        total.d_ctrl[i][j] += g.d_ctrl[i][j];
        total.d_weights[i][j] += g.d_weights[i][j];
      }
    }
    for (std::size_t i = 0; i < total.d_knots_u.size(); ++i) total.d_knots_u[i] += g.d_knots_u[i];
    for (std::size_t i = 0; i < total.d_knots_v.size(); ++i) total.d_knots_v[i] += g.d_knots_v[i];
  }
  return total;
}

CurveCtrlGrads grad_wrt_ctrl(const NurbsCurve& curve, double u) {
  const int d = curve.knots.degree;
  const int span = find_span(curve.knots, u);
  const std::vector<double> n = basis_funs(curve.knots, span, u);
  CurveCtrlGrads g;
  g.i0 = span - d;
  double den = 0.0;
  for (int h = 0; h <= d; ++h) den += n[h] * curve.weights[g.i0 + h];
  g.factors.resize(d + 1);
  for (int h = 0; h <= d; ++h) g.factors[h] = n[h] * curve.weights[g.i0 + h] / den;
  return g;
}

CurveWeightGrads grad_wrt_weights(const NurbsCurve& curve, double u) {
  const int d = curve.knots.degree;
  const int span = find_span(curve.knots, u);
  const std::vector<double> n = basis_funs(curve.knots, span, u);
  const Vec3 point = eval_curve(curve, u);
  CurveWeightGrads g;
  g.i0 = span - d;
  double den = 0.0;
  for (int h = 0; h <= d; ++h) den += n[h] * curve.weights[g.i0 + h];
  g.grads.resize(d + 1);
  for (int h = 0; h <= d; ++h) {
    g.grads[h] = (n[h] / den) * (curve.ctrl[g.i0 + h] - point);
  }
  return g;
}

}  // namespace splinegrad
