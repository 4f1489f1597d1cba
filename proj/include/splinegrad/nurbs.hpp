#pragma once

#include <cstddef>
#include <vector>

#include "splinegrad/grid.hpp"

namespace splinegrad {

/// Non-decreasing knot sequence with its degree. A curve with t+1 control
/// points over degree d stores the full sequence of t + d + 2 knots; the
/// evaluable parameter range is [knots[d], knots[ctrl_count()]].
struct KnotVector {
  int degree = 0;
  std::vector<double> knots;

  std::size_t ctrl_count() const { return knots.size() - degree - 1; }
  double min_param() const { return knots[degree]; }
  double max_param() const { return knots[ctrl_count()]; }
  bool is_clamped() const;
  void validate() const;

  /// Clamped knots over [0, 1] with equally spaced interior knots.
  static KnotVector uniform_clamped(int degree, std::size_t ctrl_count);
};

/// Index i of the span [u_i, u_{i+1}) containing u. The right endpoint maps
/// to the last non-degenerate span so the closed range is evaluable.
int find_span(const KnotVector& kv, double u);

/// The d+1 basis values N_{span-d..span}^d(u) by the Cox-de Boor recursion;
/// 0/0 terms evaluate to 0.
std::vector<double> basis_funs(const KnotVector& kv, int span, double u);

/// Parameter derivatives of the d+1 nonzero basis functions.
std::vector<double> basis_funs_du(const KnotVector& kv, int span, double u);

struct NurbsCurve {
  std::vector<Vec3> ctrl;
  std::vector<double> weights;
  KnotVector knots;

  void validate() const;
};

/// Rational curve point: sum N_i w_i P_i / sum N_i w_i, evaluated through
/// homogeneous (weighted) control points.
Vec3 eval_curve(const NurbsCurve& curve, double u);

/// Tensor-product NURBS surface; ctrl[i][j] with i along the u direction.
struct NurbsSurface {
  std::vector<std::vector<Vec3>> ctrl;
  std::vector<std::vector<double>> weights;
  KnotVector knots_u;
  KnotVector knots_v;

  std::size_t ctrl_count_u() const { return ctrl.size(); }
  std::size_t ctrl_count_v() const { return ctrl.empty() ? 0 : ctrl[0].size(); }
  void validate() const;
};

/// Per-point forward data kept for the backward pass: spans, the nonzero
/// basis values, the homogeneous denominator and the evaluated point.
struct SurfacePointCache {
  int u_span = 0;
  int v_span = 0;
  std::vector<double> basis_u;
  std::vector<double> basis_v;
  double denom = 0.0;
  Vec3 point = {0.0, 0.0, 0.0};
};

struct EvalCache {
  std::size_t rows = 0;  // grid points along u
  std::size_t cols = 0;  // grid points along v
  std::vector<double> us;
  std::vector<double> vs;
  std::vector<SurfacePointCache> pts;  // row-major

  const SurfacePointCache& at(std::size_t index) const { return pts[index]; }
};

/// Evaluates S on the uniform parametric grid over the valid range, touching
/// only the (p+1)(q+1) active basis products per point. Grid points are
/// independent, so evaluation is chunk-parallel.
PointGrid eval_surface_grid(const NurbsSurface& surface, std::size_t n_grid, std::size_t m_grid,
                            EvalCache* cache = nullptr);

/// dS/dP over the active control window; factor(a,b) applies to
/// ctrl[i0+a][j0+b] and equals N_a N_b w / w(u,v).
struct CtrlWindow {
  int i0 = 0;
  int j0 = 0;
  std::size_t nu = 0;
  std::size_t nv = 0;
  std::vector<double> factors;  // row-major nu x nv

  double factor(std::size_t a, std::size_t b) const { return factors[a * nv + b]; }
};
CtrlWindow grad_wrt_ctrl(const NurbsSurface& surface, const EvalCache& cache,
                         std::size_t point_index);

/// dS/dw over the active window: N_a N_b (P - S) / w(u,v).
struct WeightWindow {
  int i0 = 0;
  int j0 = 0;
  std::size_t nu = 0;
  std::size_t nv = 0;
  std::vector<Vec3> grads;

  const Vec3& grad(std::size_t a, std::size_t b) const { return grads[a * nv + b]; }
};
WeightWindow grad_wrt_weights(const NurbsSurface& surface, const EvalCache& cache,
                              std::size_t point_index);

/// Surrogate used for the (weakly defined) knot derivative. BasisTimesKnot
/// accumulates N_h(u) * u_{span+h}; GaussianFactor accumulates
/// N_h(u) * (u - u_{span+h}) / sigma^2, the smoothed-delta factor.
enum class KnotGradMode { BasisTimesKnot, GaussianFactor };

/// Adds scale * surrogate into dknots[span + h] for h = 0..d; slots outside
/// the active spans are untouched. sigma must be positive.
void accumulate_knot_gradient(const KnotVector& kv, int span, const std::vector<double>& basis,
                              double u, double scale, KnotGradMode mode, double sigma,
                              std::vector<double>& dknots);

/// Knot gradients for every evaluated point; upstream holds one 3D gradient
/// per grid point and is contracted with the surrogate via its component sum.
void grad_wrt_knots(const NurbsSurface& surface, const EvalCache& cache,
                    const PointGrid& upstream, double sigma, KnotGradMode mode,
                    std::vector<double>& dknots_u, std::vector<double>& dknots_v);

struct NurbsGradients {
  std::vector<std::vector<Vec3>> d_ctrl;
  std::vector<std::vector<double>> d_weights;
  std::vector<double> d_knots_u;
  std::vector<double> d_knots_v;
};

/// Accumulates the VJPs of all grid points into control-point, weight and
/// knot gradients using only the active windows. Per-chunk partial sums are
/// merged in chunk order, so a fixed thread count gives stable results.
NurbsGradients backward_surface(const NurbsSurface& surface, const EvalCache& cache,
                                const PointGrid& upstream, double sigma = 1e-2,
                                KnotGradMode mode = KnotGradMode::BasisTimesKnot);

// Curve-level gradient factors (the 1D specializations of the above).
struct CurveCtrlGrads {
  int i0 = 0;
  std::vector<double> factors;
};
CurveCtrlGrads grad_wrt_ctrl(const NurbsCurve& curve, double u);

struct CurveWeightGrads {
  int i0 = 0;
  std::vector<Vec3> grads;
};
CurveWeightGrads grad_wrt_weights(const NurbsCurve& curve, double u);

}  // namespace splinegrad
