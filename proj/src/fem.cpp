#include "splinegrad/fem.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "splinegrad/errors.hpp"
#include "splinegrad/parallel.hpp"
#include "splinegrad/rng.hpp"

namespace splinegrad {

void StructuredMesh::validate() const {
  if (nx < 1 || ny < 1) throw ConfigError("mesh needs at least one element per axis");
  if (degree < 1 || degree > 3) throw ConfigError("element degree must be 1, 2 or 3");
}

void ScalarField2D::validate() const {
  mesh.validate();
  if (coeffs.rows != mesh.nodes_x() || coeffs.cols != mesh.nodes_y()) {
    throw DimensionError("field coefficient grid does not match the mesh node grid");
  }
}

LagrangeBasis1D lagrange_basis_1d(int degree, double xi) {
  if (degree < 1 || degree > 3) throw ConfigError("Lagrange degree must be 1, 2 or 3");
  LagrangeBasis1D b;
  b.count = degree + 1;
  std::array<double, 4> nodes{};
  for (int j = 0; j <= degree; ++j) {
    nodes[j] = -1.0 + 2.0 * static_cast<double>(j) / static_cast<double>(degree);
  }
  for (int j = 0; j <= degree; ++j) {
    double value = 1.0;
    for (int m = 0; m <= degree; ++m) {
      if (m == j) continue;
      value *= (xi - nodes[m]) / (nodes[j] - nodes[m]);
    }
    b.values[j] = value;
    double deriv = 0.0;
    for (int r = 0; r <= degree; ++r) {
      if (r == j) continue;
      double term = 1.0 / (nodes[j] - nodes[r]);
      for (int m = 0; m <= degree; ++m) {
        if (m == j || m == r) continue;
        term *= (xi - nodes[m]) / (nodes[j] - nodes[m]);
      }
      deriv += term;
    }
    b.derivs[j] = deriv;
  }
  return b;
}

QuadratureRule gauss_quadrature(int npts) {
  switch (npts) {
    case 1:
      return {{0.0}, {2.0}};
    case 2:
      return {{-0.57735026918962576, 0.57735026918962576}, {1.0, 1.0}};
    case 3:
      return {{-0.77459666924148338, 0.0, 0.77459666924148338},
              {0.55555555555555556, 0.88888888888888889, 0.55555555555555556}};
    case 4:
      return {{-0.86113631159405258, -0.33998104358485626, 0.33998104358485626,
               0.86113631159405258},
              {0.34785484513745386, 0.65214515486254614, 0.65214515486254614,
               0.34785484513745386}};
    case 5:
      return {{-0.90617984593866399, -0.53846931010568309, 0.0, 0.53846931010568309,
               0.90617984593866399},
              {0.23692688505618909, 0.47862867049936647, 0.56888888888888889,
               0.47862867049936647, 0.23692688505618909}};
    default:
      throw ConfigError("gauss_quadrature supports 1..5 points");
  }
}

namespace {

// Per-axis basis table at the quadrature points of one element axis.
struct AxisTable {
  QuadratureRule rule;
  std::vector<LagrangeBasis1D> basis;  // one entry per quadrature point
};

AxisTable make_axis_table(int degree, int npts) {
  AxisTable t;
  t.rule = gauss_quadrature(npts);
  t.basis.reserve(t.rule.points.size());
  for (double xi : t.rule.points) t.basis.push_back(lagrange_basis_1d(degree, xi));
  return t;
}

// Runs fn(element, quadrature data) over all elements of the mesh.
template <typename Fn>
void for_each_element_qp(const StructuredMesh& mesh, const AxisTable& table, Fn&& fn) {
  const int d = mesh.degree;
  const double hx = mesh.hx(), hy = mesh.hy();
  const double jac = hx * hy / 4.0;
  const std::size_t nq = table.rule.points.size();
  for (std::size_t ey = 0; ey < mesh.ny; ++ey) {
    for (std::size_t ex = 0; ex < mesh.nx; ++ex) {
      for (std::size_t qy = 0; qy < nq; ++qy) {
        for (std::size_t qx = 0; qx < nq; ++qx) {
          const double x = (static_cast<double>(ex) + 0.5 * (table.rule.points[qx] + 1.0)) * hx;
          const double y = (static_cast<double>(ey) + 0.5 * (table.rule.points[qy] + 1.0)) * hy;
          const double w = table.rule.weights[qx] * table.rule.weights[qy] * jac;
          fn(ex, ey, static_cast<std::size_t>(ex * d), static_cast<std::size_t>(ey * d),
             table.basis[qx], table.basis[qy], x, y, w);
        }
      }
    }
  }
}

double eval_checked(const SpatialFn& fn, double x, double y, const char* what) {
  const double v = fn(x, y);
  if (!std::isfinite(v)) {
    throw NumericError(std::string(what) + " is non-finite at a quadrature point");
  }
  return v;
}

}  // namespace

double assemble_energy(const ScalarField2D& field, const SpatialFn& nu, const SpatialFn& f) {
  field.validate();
  const StructuredMesh& mesh = field.mesh;
  const int d = mesh.degree;
  const AxisTable table = make_axis_table(d, d + 1);
  const double sx = 2.0 / mesh.hx(), sy = 2.0 / mesh.hy();

  double energy = 0.0;
  for_each_element_qp(mesh, table,
                      [&](std::size_t, std::size_t, std::size_t gx0, std::size_t gy0,
                          const LagrangeBasis1D& bx, const LagrangeBasis1D& by, double x, double y,
                          double w) {
                        double u = 0.0, ux = 0.0, uy = 0.0;
                        for (int a = 0; a <= d; ++a) {
                          for (int b = 0; b <= d; ++b) {
                            const double c = field.coeffs(gx0 + a, gy0 + b);
                            u += c * bx.values[a] * by.values[b];
                            ux += c * bx.derivs[a] * sx * by.values[b];
                            uy += c * bx.values[a] * by.derivs[b] * sy;
                          }
                        }
                        const double nu_q = eval_checked(nu, x, y, "diffusivity");
                        const double f_q = eval_checked(f, x, y, "forcing");
                        energy += w * (0.5 * nu_q * (ux * ux + uy * uy) - f_q * u);
                      });
  return energy;
}

Grid energy_gradient(const ScalarField2D& field, const SpatialFn& nu, const SpatialFn& f,
                     BoundaryMode mode) {
  field.validate();
  const StructuredMesh& mesh = field.mesh;
  const int d = mesh.degree;
  const AxisTable table = make_axis_table(d, d + 1);
  const double sx = 2.0 / mesh.hx(), sy = 2.0 / mesh.hy();

  Grid grad(mesh.nodes_x(), mesh.nodes_y(), 0.0);
  for_each_element_qp(
      mesh, table,
      [&](std::size_t, std::size_t, std::size_t gx0, std::size_t gy0, const LagrangeBasis1D& bx,
          const LagrangeBasis1D& by, double x, double y, double w) {
        double ux = 0.0, uy = 0.0;
        for (int a = 0; a <= d; ++a) {
          for (int b = 0; b <= d; ++b) {
            const double c = field.coeffs(gx0 + a, gy0 + b);
            ux += c * bx.derivs[a] * sx * by.values[b];
            uy += c * bx.values[a] * by.derivs[b] * sy;
          }
        }
        const double nu_q = eval_checked(nu, x, y, "diffusivity");
        const double f_q = eval_checked(f, x, y, "forcing");
        for (int a = 0; a <= d; ++a) {
          for (int b = 0; b <= d; ++b) {
            const double phi = bx.values[a] * by.values[b];
            const double phix = bx.derivs[a] * sx * by.values[b];
            const double phiy = bx.values[a] * by.derivs[b] * sy;
            grad(gx0 + a, gy0 + b) += w * (nu_q * (ux * phix + uy * phiy) - f_q * phi);
          }
        }
      });

  if (mode == BoundaryMode::Dirichlet) {
    for (std::size_t i = 0; i < grad.rows; ++i) {
      for (std::size_t j = 0; j < grad.cols; ++j) {
        if (i == 0 || j == 0 || i + 1 == grad.rows || j + 1 == grad.cols) grad(i, j) = 0.0;
      }
    }
  }
  return grad;
}

void apply_dirichlet(ScalarField2D& field, double g) {
  field.validate();
  Grid& c = field.coeffs;
  for (std::size_t i = 0; i < c.rows; ++i) {
    c(i, 0) = g;
    c(i, c.cols - 1) = g;
  }
  for (std::size_t j = 0; j < c.cols; ++j) {
    c(0, j) = g;
    c(c.rows - 1, j) = g;
  }
}

SolveMethod parse_solve_method(const std::string& name) {
  if (name == "gd") return SolveMethod::Gd;
  if (name == "adam") return SolveMethod::Adam;
  if (name == "cg") return SolveMethod::Cg;
  throw ConfigError("unknown solve method: " + name);
}

namespace {

struct InteriorMap {
  std::vector<std::size_t> slots;  // flat coefficient indices of interior nodes
  std::size_t rows = 0, cols = 0;

  explicit InteriorMap(const StructuredMesh& mesh) : rows(mesh.nodes_x()), cols(mesh.nodes_y()) {
    for (std::size_t i = 1; i + 1 < rows; ++i) {
      for (std::size_t j = 1; j + 1 < cols; ++j) slots.push_back(i * cols + j);
    }
  }
  void scatter(const std::vector<double>& x, ScalarField2D& field) const {
    for (std::size_t k = 0; k < slots.size(); ++k) field.coeffs.data[slots[k]] = x[k];
  }
  std::vector<double> gather(const Grid& g) const {
    std::vector<double> x(slots.size());
    for (std::size_t k = 0; k < slots.size(); ++k) x[k] = g.data[slots[k]];
    return x;
  }
};

double max_abs(const std::vector<double>& v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

double dot_vec(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

}  // namespace

SolveResult solve_poisson(const StructuredMesh& mesh, const SpatialFn& nu, const SpatialFn& f,
                          SolveMethod method, double tol, int max_iters) {
  mesh.validate();
  if (!(tol > 0.0)) throw ConfigError("solver tolerance must be positive");

  SolveResult result;
  result.field = ScalarField2D(mesh);
  apply_dirichlet(result.field, 0.0);

  const InteriorMap interior(mesh);
  const std::size_t n = interior.slots.size();

  ScalarField2D work(mesh);
  auto gradient_at = [&](const std::vector<double>& x) {
    interior.scatter(x, work);
    return interior.gather(energy_gradient(work, nu, f));
  };

  // J is quadratic: grad(x) = A x - b with b = -grad(0); A v = grad(v) + b.
  std::vector<double> x(n, 0.0);
  const std::vector<double> b = [&] {
    std::vector<double> g0 = gradient_at(std::vector<double>(n, 0.0));
    for (double& v : g0) v = -v;
    return g0;
  }();
  auto apply_a = [&](const std::vector<double>& v) {
    std::vector<double> av = gradient_at(v);
    for (std::size_t i = 0; i < n; ++i) av[i] += b[i];
    return av;
  };
  // J(x) from a known gradient g = A x - b: J = (x.g - x.b) / 2.
  auto energy_from_grad = [&](const std::vector<double>& xv, const std::vector<double>& g) {
    return 0.5 * (dot_vec(xv, g) - dot_vec(xv, b));
  };
  auto check_finite = [&](double j, int it) {
    if (!std::isfinite(j)) {
      throw DivergenceError("solver diverged at iteration " + std::to_string(it));
    }
  };

  std::vector<double> grad = gradient_at(x);
  double gnorm = max_abs(grad);
  result.history.push_back({0, energy_from_grad(x, grad), gnorm});

  if (n == 0 || gnorm <= tol) {
    interior.scatter(x, result.field);
    result.grad_max_norm = gnorm;
    return result;
  }

  // Largest stiffness eigenvalue estimate for the gradient step sizes.
  auto estimate_lmax = [&] {
    std::vector<double> v(n);
    for (std::size_t i = 0; i < n; ++i) v[i] = 1.0 + 0.5 * static_cast<double>(i % 7);
    double lambda = 1.0;
    for (int it = 0; it < 40; ++it) {
      std::vector<double> av = apply_a(v);
      const double nrm = std::sqrt(dot_vec(av, av));
      if (nrm == 0.0) break;
      lambda = nrm / std::sqrt(dot_vec(v, v));
      for (std::size_t i = 0; i < n; ++i) v[i] = av[i] / nrm;
    }
    return lambda;
  };

  int it = 0;
  if (method == SolveMethod::Cg) {
    std::vector<double> r(n), p(n), ap(n);
    for (std::size_t i = 0; i < n; ++i) r[i] = -grad[i];
    p = r;
    double rs = dot_vec(r, r);
    while (it < max_iters && gnorm > tol) {
      ++it;
      ap = apply_a(p);
      const double alpha = rs / dot_vec(p, ap);
      for (std::size_t i = 0; i < n; ++i) {
        x[i] += alpha * p[i];
        r[i] -= alpha * ap[i];
      }
      if (it % 64 == 0) {
        grad = gradient_at(x);
        for (std::size_t i = 0; i < n; ++i) r[i] = -grad[i];
      }
      const double rs_next = dot_vec(r, r);
      gnorm = max_abs(r);
      std::vector<double> g(n);
      for (std::size_t i = 0; i < n; ++i) g[i] = -r[i];
      const double j = energy_from_grad(x, g);
      check_finite(j, it);
      result.history.push_back({it, j, gnorm});
      const double beta = rs_next / rs;
      rs = rs_next;
      for (std::size_t i = 0; i < n; ++i) p[i] = r[i] + beta * p[i];
    }
  } else if (method == SolveMethod::Gd) {
    const double lr = 1.0 / (1.05 * estimate_lmax());
    while (it < max_iters && gnorm > tol) {
      ++it;
      for (std::size_t i = 0; i < n; ++i) x[i] -= lr * grad[i];
      grad = gradient_at(x);
      gnorm = max_abs(grad);
      const double j = energy_from_grad(x, grad);
      check_finite(j, it);
      result.history.push_back({it, j, gnorm});
    }
  } else {
    const double lr0 = 0.5 / estimate_lmax();
    const double beta1 = 0.9, beta2 = 0.999, eps = 1e-12;
    std::vector<double> m(n, 0.0), v2(n, 0.0);
    while (it < max_iters && gnorm > tol) {
      ++it;
      // 1/sqrt(t) decay so the iterates settle onto the quadratic minimum.
      const double lr = lr0 / std::sqrt(static_cast<double>(it));
      const double bc1 = 1.0 - std::pow(beta1, it);
      const double bc2 = 1.0 - std::pow(beta2, it);
      for (std::size_t i = 0; i < n; ++i) {
        m[i] = beta1 * m[i] + (1.0 - beta1) * grad[i];
        v2[i] = beta2 * v2[i] + (1.0 - beta2) * grad[i] * grad[i];
        x[i] -= lr * (m[i] / bc1) / (std::sqrt(v2[i] / bc2) + eps);
      }
      grad = gradient_at(x);
      gnorm = max_abs(grad);
      const double j = energy_from_grad(x, grad);
      check_finite(j, it);
      result.history.push_back({it, j, gnorm});
    }
  }

  interior.scatter(x, result.field);
  result.iterations = it;
  result.grad_max_norm = gnorm;
  return result;
}

std::pair<double, double> exact_solution_and_forcing(double x, double y) {
  const double pi = std::numbers::pi;
  const double s = std::sin(pi * x) * std::sin(pi * y);
  return {s, 2.0 * pi * pi * s};
}

double l2_error(const ScalarField2D& field, const SpatialFn& reference) {
  field.validate();
  const StructuredMesh& mesh = field.mesh;
  const int d = mesh.degree;
  const AxisTable table = make_axis_table(d, std::min(d + 2, 5));

  double acc = 0.0;
  for_each_element_qp(mesh, table,
                      [&](std::size_t, std::size_t, std::size_t gx0, std::size_t gy0,
                          const LagrangeBasis1D& bx, const LagrangeBasis1D& by, double x, double y,
                          double w) {
                        double u = 0.0;
                        for (int a = 0; a <= d; ++a) {
                          for (int b = 0; b <= d; ++b) {
                            u += field.coeffs(gx0 + a, gy0 + b) * bx.values[a] * by.values[b];
                          }
                        }
                        const double diff = u - reference(x, y);
                        acc += w * diff * diff;
                      });
  return std::sqrt(acc);
}

namespace {
constexpr std::array<double, 4> kDiffusivityFreq = {1.72, 4.05, 6.85, 9.82};
}

DiffusivityParams::DiffusivityParams(const std::array<double, 4>& w) : omega(w) {
  for (double o : omega) {
    if (o < -3.0 || o > 3.0) throw DomainError("omega components must lie in [-3, 3]");
  }
}

DiffusivityParams DiffusivityParams::sample(std::uint64_t seed) {
  SplitMix64 rng(seed);
  std::array<double, 4> w{};
  for (double& o : w) o = rng.uniform(-3.0, 3.0);
  return DiffusivityParams(w);
}

double diffusivity_field(const DiffusivityParams& params, double x, double y) {
  double s = 0.0;
  for (int i = 0; i < 4; ++i) {
    const double a = kDiffusivityFreq[i];
    const double lambda = 1.0 / (1.0 + 0.25 * a * a);
    const double xi = 0.5 * a * std::cos(a * x) + std::sin(a * x);
    const double eta = 0.5 * a * std::cos(a * y) + std::sin(a * y);
    s += params.omega[i] * lambda * xi * eta;
  }
  return std::exp(s);
}

}  // namespace splinegrad
