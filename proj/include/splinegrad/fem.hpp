#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "splinegrad/grid.hpp"

namespace splinegrad {

/// Structured quadrilateral mesh of the unit square with tensor-product
/// Lagrange elements of degree 1..3. Nodes are equally spaced; each element
/// maps affinely onto the reference square [-1, 1]^2.
struct StructuredMesh {
  std::size_t nx = 1;
  std::size_t ny = 1;
  int degree = 1;

  std::size_t nodes_x() const { return nx * degree + 1; }
  std::size_t nodes_y() const { return ny * degree + 1; }
  double hx() const { return 1.0 / static_cast<double>(nx); }
  double hy() const { return 1.0 / static_cast<double>(ny); }
  void validate() const;
};

/// Nodal coefficients on the mesh node grid; coeffs(i, j) belongs to the node
/// at (i * hx / degree, j * hy / degree). Boundary slots carry the imposed
/// Dirichlet values.
struct ScalarField2D {
  StructuredMesh mesh;
  Grid coeffs;

  ScalarField2D() = default;
  explicit ScalarField2D(const StructuredMesh& m)
      : mesh(m), coeffs(m.nodes_x(), m.nodes_y(), 0.0) {}
  void validate() const;
};

struct LagrangeBasis1D {
  std::array<double, 4> values{};
  std::array<double, 4> derivs{};
  int count = 0;
};

/// Nodal Lagrange basis on degree+1 equally spaced nodes in [-1, 1]:
/// value 1 at the own node, 0 at the others; derivatives are analytic.
LagrangeBasis1D lagrange_basis_1d(int degree, double xi);

struct QuadratureRule {
  std::vector<double> points;
  std::vector<double> weights;
};

/// Gauss-Legendre rule on [-1, 1], exact for polynomials of degree
/// <= 2*npts - 1. Supports 1..5 points.
QuadratureRule gauss_quadrature(int npts);

using SpatialFn = std::function<double(double, double)>;

/// Galerkin energy J(U) = 1/2 B(U, U) - L(U)
///                      = integral of (1/2 nu |grad U|^2 - f U) over [0,1]^2,
/// assembled element-wise with (degree+1)^2 tensor quadrature points.
double assemble_energy(const ScalarField2D& field, const SpatialFn& nu, const SpatialFn& f);

enum class BoundaryMode { Dirichlet, ZeroNeumann };

/// dJ/dU per nodal coefficient. Under Dirichlet conditions the boundary slots
/// are constrained, so their gradient entries are zero; under zero-Neumann
/// every slot is free.
Grid energy_gradient(const ScalarField2D& field, const SpatialFn& nu, const SpatialFn& f,
                     BoundaryMode mode = BoundaryMode::Dirichlet);

/// Sets the boundary ring to g, leaving the interior untouched.
void apply_dirichlet(ScalarField2D& field, double g);

enum class SolveMethod { Gd, Adam, Cg };
SolveMethod parse_solve_method(const std::string& name);

struct ConvergenceSample {
  int iteration = 0;
  double energy = 0.0;
  double grad_max_norm = 0.0;
};

struct SolveResult {
  ScalarField2D field;
  int iterations = 0;
  double grad_max_norm = 0.0;
  std::vector<ConvergenceSample> history;
};

/// Minimizes J over the interior coefficients with zero Dirichlet boundary,
/// stopping when the gradient max-norm drops to tol or max_iters is reached.
/// The cg path exploits that J is quadratic; gd and adam are the plain
/// gradient iterations.
SolveResult solve_poisson(const StructuredMesh& mesh, const SpatialFn& nu, const SpatialFn& f,
                          SolveMethod method, double tol, int max_iters);

/// Manufactured pair u_ex = sin(pi x) sin(pi y), f = 2 pi^2 sin(pi x) sin(pi y)
/// solving -div(grad u) = f with u = 0 on the boundary.
std::pair<double, double> exact_solution_and_forcing(double x, double y);

/// sqrt of the element-wise quadrature of (U - reference)^2.
double l2_error(const ScalarField2D& field, const SpatialFn& reference);

/// Log-diffusivity expansion coefficients; omega must lie in [-3, 3]^4.
struct DiffusivityParams {
  std::array<double, 4> omega{};

  DiffusivityParams() = default;
  explicit DiffusivityParams(const std::array<double, 4>& w);

  /// Seeded uniform draw of omega from the [-3, 3]^4 box.
  static DiffusivityParams sample(std::uint64_t seed);
};

/// nu(x, y) = exp(sum_i omega_i lambda_i xi_i(x) eta_i(y)) with
/// xi_i(t) = eta_i(t) = (a_i/2) cos(a_i t) + sin(a_i t),
/// a = (1.72, 4.05, 6.85, 9.82), lambda_i = 1 / (1 + 0.25 a_i^2).
double diffusivity_field(const DiffusivityParams& params, double x, double y);

}  // namespace splinegrad
