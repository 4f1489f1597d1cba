#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "splinegrad/grid.hpp"
#include "splinegrad/nurbs.hpp"

namespace splinegrad {

enum class Optimizer { PlainGd, Adam };

struct FitConfig {
  double learning_rate = 1e-2;       // control points
  double knot_learning_rate = 1e-3;  // interior knots, when reparameterizing
  int iterations = 1000;
  Optimizer optimizer = Optimizer::Adam;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  bool reparameterize_knots = false;
  double sigma = 1e-2;
  KnotGradMode knot_grad = KnotGradMode::BasisTimesKnot;
  double knot_margin = 1e-4;
  double laplacian_weight = 0.0;
  std::uint64_t seed = 0;

  void validate() const;
};

struct FitReport {
  NurbsSurface surface;
  std::vector<double> loss_history;  // iterations + 1 entries, includes the initial loss
  double final_mse = 0.0;
  double wall_seconds = 0.0;
};

/// Mean squared error over point grids: (1/N) sum |pred - target|^2 with its
/// per-point gradient (2/N)(pred - target).
std::pair<double, PointGrid> mse_loss(const PointGrid& pred, const PointGrid& target);

/// Two-sided Chamfer distance with unsquared norms:
/// sum_p min_q |p-q| + sum_q min_p |p-q|. The squared variant is available
/// for cross-checking against other conventions.
double chamfer_distance(const std::vector<Vec3>& p, const std::vector<Vec3>& q,
                        bool squared = false);

/// Reporting helper: chamfer distance scaled by 100.
double chamfer_distance_x100(const std::vector<Vec3>& p, const std::vector<Vec3>& q);

/// Discrete-Laplacian smoothness term over interior control points:
/// sum |4 P_ij - P_{i-1,j} - P_{i+1,j} - P_{i,j-1} - P_{i,j+1}|^2, with its
/// analytic gradient. Requires a grid of at least 3x3.
std::pair<double, std::vector<std::vector<Vec3>>> laplacian_regularizer(
    const std::vector<std::vector<Vec3>>& ctrl);

/// Uniform nx x ny sample of Bukin function N.6,
/// z = 100 sqrt(|y - 0.01 x^2|) + 0.01 |x + 10| over x in [-15, -5],
/// y in [-3, 3]; the grid spans the rectangle endpoints exactly.
PointGrid bukin_target(std::size_t nx, std::size_t ny);

/// Clamped surface of the requested degree with control points drawn
/// uniformly from the target's bounding box and unit weights.
NurbsSurface random_surface_for_target(const PointGrid& target, std::size_t ctrl_u,
                                       std::size_t ctrl_v, int degree, std::uint64_t seed);

/// Gradient-descent surface fit: each iteration evaluates the surface at the
/// target resolution, applies the MSE loss (plus the optional Laplacian
/// term), backpropagates, and updates the control points (and interior knots
/// when reparameterize_knots is set, followed by a feasibility projection).
FitReport fit_surface(const PointGrid& target, const NurbsSurface& init, const FitConfig& cfg);

/// Projects interior knots back to a valid configuration: clamp into the
/// parametric range, sort, then push adjacent violators apart symmetrically
/// until gaps reach `margin`. Clamped end knots are never moved.
void project_interior_knots(KnotVector& kv, double margin);

/// Loss with analytic gradient over a flat parameter block.
using LossWithGrad =
    std::function<std::pair<double, std::vector<double>>(const std::vector<double>&)>;

/// Max over coordinates of |analytic - fd| / max(1, |analytic|, |fd|) with
/// central finite differences of the given step.
double gradient_check(const LossWithGrad& f, std::vector<double> params, double step);

struct GradCheckRow {
  std::string block;
  double max_rel_err = 0.0;
};

/// Seeded finite-difference suites for the differentiable kernels; block
/// names identify the parameter group that was checked.
std::vector<GradCheckRow> gradcheck_suite(const std::string& name);

}  // namespace splinegrad
