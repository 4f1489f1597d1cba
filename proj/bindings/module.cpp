#include <pybind11/functional.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "splinegrad/fem.hpp"
#include "splinegrad/fitloop.hpp"
#include "splinegrad/nurbs.hpp"
#include "splinegrad/parallel.hpp"
#include "splinegrad/pcw2d.hpp"
#include "splinegrad/piecewise1d.hpp"

namespace py = pybind11;
using namespace splinegrad;

namespace {

Grid array_to_grid(const py::array_t<double, py::array::c_style | py::array::forcecast>& a) {
  if (a.ndim() != 2) throw DimensionError("expected a 2D array");
  Grid g(a.shape(0), a.shape(1));
  std::copy(a.data(), a.data() + g.size(), g.data.begin());
  return g;
}

py::array_t<double> grid_to_array(const Grid& g) {
  py::array_t<double> a({g.rows, g.cols});
  std::copy(g.data.begin(), g.data.end(), a.mutable_data());
  return a;
}

PointGrid array_to_point_grid(
    const py::array_t<double, py::array::c_style | py::array::forcecast>& a) {
  if (a.ndim() != 3 || a.shape(2) != 3) throw DimensionError("expected an (n, m, 3) array");
  PointGrid g(a.shape(0), a.shape(1));
  const double* p = a.data();
  for (std::size_t i = 0; i < g.size(); ++i) {
    g.data[i] = {p[3 * i], p[3 * i + 1], p[3 * i + 2]};
  }
  return g;
}

py::array_t<double> point_grid_to_array(const PointGrid& g) {
  py::array_t<double> a({g.rows, g.cols, std::size_t{3}});
  double* p = a.mutable_data();
  for (std::size_t i = 0; i < g.size(); ++i) {
    p[3 * i] = g.data[i][0];
    p[3 * i + 1] = g.data[i][1];
    p[3 * i + 2] = g.data[i][2];
  }
  return a;
}

std::vector<Vec3> array_to_cloud(
    const py::array_t<double, py::array::c_style | py::array::forcecast>& a) {
  if (a.ndim() != 2 || a.shape(1) != 3) throw DimensionError("expected an (n, 3) array");
  std::vector<Vec3> pts(a.shape(0));
  const double* p = a.data();
  for (std::size_t i = 0; i < pts.size(); ++i) pts[i] = {p[3 * i], p[3 * i + 1], p[3 * i + 2]};
  return pts;
}

SpatialFn nu_from_omega(const std::optional<std::array<double, 4>>& omega) {
  if (!omega) return [](double, double) { return 1.0; };
  const DiffusivityParams params(*omega);
  return [params](double x, double y) { return diffusivity_field(params, x, y); };
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Differentiable spline approximation kernels";

  py::register_exception<DimensionError>(m, "DimensionError", PyExc_ValueError);
  py::register_exception<InfeasibleError>(m, "InfeasibleError", PyExc_ValueError);
  py::register_exception<DomainError>(m, "KernelDomainError", PyExc_ValueError);
  py::register_exception<ConfigError>(m, "KernelConfigError", PyExc_ValueError);
  py::register_exception<DivergenceError>(m, "KernelDivergenceError", PyExc_RuntimeError);
  py::register_exception<NumericError>(m, "KernelNumericError", PyExc_ArithmeticError);

  m.def("set_num_threads", &set_num_threads);
  m.def("num_threads", &num_threads);

  // -- piecewise1d ----------------------------------------------------------
  py::class_<IntervalPartition>(m, "IntervalPartition")
      .def(py::init<>())
      .def_readwrite("n", &IntervalPartition::n)
      .def_readwrite("cuts", &IntervalPartition::cuts)
      .def("piece_count", &IntervalPartition::piece_count)
      .def("piece", &IntervalPartition::piece);

  py::class_<PiecewiseFit>(m, "PiecewiseFit")
      .def_readonly("partition", &PiecewiseFit::partition)
      .def_readonly("degree", &PiecewiseFit::degree)
      .def_readonly("coeffs", &PiecewiseFit::coeffs)
      .def_readonly("fitted", &PiecewiseFit::fitted)
      .def_readonly("cost", &PiecewiseFit::cost);

  py::class_<BlockSparseJacobian>(m, "BlockSparseJacobian")
      .def_readonly("partition", &BlockSparseJacobian::partition)
      .def_readonly("degree", &BlockSparseJacobian::degree);

  m.def("fit_kpiecewise", &fit_kpiecewise, py::arg("x"), py::arg("k"), py::arg("degree") = 0);
  m.def("fit_with_partition", &fit_with_partition);
  m.def("polyfit_interval", &polyfit_interval);
  m.def("jacobian", &jacobian);
  m.def("vjp", &vjp);

  // -- pcw2d ----------------------------------------------------------------
  py::class_<LabelGrid>(m, "LabelGrid")
      .def_readonly("rows", &LabelGrid::rows)
      .def_readonly("cols", &LabelGrid::cols)
      .def_readonly("labels", &LabelGrid::labels)
      .def_readonly("sizes", &LabelGrid::sizes)
      .def("component_count", &LabelGrid::component_count);

  m.def("connected_components",
        [](const py::array_t<double, py::array::c_style | py::array::forcecast>& image,
           double threshold) { return connected_components(array_to_grid(image), threshold); });
  m.def("pcw2d_forward",
        [](const py::array_t<double, py::array::c_style | py::array::forcecast>& image,
           const LabelGrid& labels) {
          return grid_to_array(pcw2d_forward(array_to_grid(image), labels));
        });
  m.def("pcw2d_vjp",
        [](const LabelGrid& labels,
           const py::array_t<double, py::array::c_style | py::array::forcecast>& upstream) {
          return grid_to_array(pcw2d_vjp(labels, array_to_grid(upstream)));
        });

  // -- nurbs ----------------------------------------------------------------
  py::class_<KnotVector>(m, "KnotVector")
      .def(py::init([](int degree, std::vector<double> knots) {
             KnotVector kv;
             kv.degree = degree;
             kv.knots = std::move(knots);
             kv.validate();
             return kv;
           }),
           py::arg("degree"), py::arg("knots"))
      .def_readwrite("degree", &KnotVector::degree)
      .def_readwrite("knots", &KnotVector::knots)
      .def("min_param", &KnotVector::min_param)
      .def("max_param", &KnotVector::max_param)
      .def("is_clamped", &KnotVector::is_clamped)
      .def_static("uniform_clamped", &KnotVector::uniform_clamped);

  py::class_<NurbsCurve>(m, "NurbsCurve")
      .def(py::init<>())
      .def_readwrite("ctrl", &NurbsCurve::ctrl)
      .def_readwrite("weights", &NurbsCurve::weights)
      .def_readwrite("knots", &NurbsCurve::knots)
      .def("validate", &NurbsCurve::validate);

  py::class_<NurbsSurface>(m, "NurbsSurface")
      .def(py::init<>())
      .def_readwrite("ctrl", &NurbsSurface::ctrl)
      .def_readwrite("weights", &NurbsSurface::weights)
      .def_readwrite("knots_u", &NurbsSurface::knots_u)
      .def_readwrite("knots_v", &NurbsSurface::knots_v)
      .def("validate", &NurbsSurface::validate);

  py::class_<EvalCache>(m, "EvalCache").def(py::init<>());

  py::enum_<KnotGradMode>(m, "KnotGradMode")
      .value("BASIS_TIMES_KNOT", KnotGradMode::BasisTimesKnot)
      .value("GAUSSIAN_FACTOR", KnotGradMode::GaussianFactor);

  py::class_<NurbsGradients>(m, "NurbsGradients")
      .def_readonly("d_ctrl", &NurbsGradients::d_ctrl)
      .def_readonly("d_weights", &NurbsGradients::d_weights)
      .def_readonly("d_knots_u", &NurbsGradients::d_knots_u)
      .def_readonly("d_knots_v", &NurbsGradients::d_knots_v);

  m.def("find_span", &find_span);
  m.def("basis_funs", &basis_funs);
  m.def("basis_funs_du", &basis_funs_du);
  m.def("eval_curve", &eval_curve);
  m.def("eval_surface_grid",
        [](const NurbsSurface& s, std::size_t n_grid, std::size_t m_grid) {
          return point_grid_to_array(eval_surface_grid(s, n_grid, m_grid));
        },
        py::arg("surface"), py::arg("n_grid"), py::arg("m_grid"));
  m.def("eval_surface_grid_with_cache",
        [](const NurbsSurface& s, std::size_t n_grid, std::size_t m_grid) {
          EvalCache cache;
          const PointGrid g = eval_surface_grid(s, n_grid, m_grid, &cache);
          return py::make_tuple(point_grid_to_array(g), cache);
        });
  m.def("backward_surface",
        [](const NurbsSurface& s, const EvalCache& cache,
           const py::array_t<double, py::array::c_style | py::array::forcecast>& upstream,
           double sigma, KnotGradMode mode) {
          return backward_surface(s, cache, array_to_point_grid(upstream), sigma, mode);
        },
        py::arg("surface"), py::arg("cache"), py::arg("upstream"), py::arg("sigma") = 1e-2,
        py::arg("mode") = KnotGradMode::BasisTimesKnot);

  // -- fitloop --------------------------------------------------------------
  py::enum_<Optimizer>(m, "Optimizer")
      .value("PLAIN_GD", Optimizer::PlainGd)
      .value("ADAM", Optimizer::Adam);

  py::class_<FitConfig>(m, "FitConfig")
      .def(py::init<>())
      .def_readwrite("learning_rate", &FitConfig::learning_rate)
      .def_readwrite("knot_learning_rate", &FitConfig::knot_learning_rate)
      .def_readwrite("iterations", &FitConfig::iterations)
      .def_readwrite("optimizer", &FitConfig::optimizer)
      .def_readwrite("beta1", &FitConfig::beta1)
      .def_readwrite("beta2", &FitConfig::beta2)
      .def_readwrite("eps", &FitConfig::eps)
      .def_readwrite("reparameterize_knots", &FitConfig::reparameterize_knots)
      .def_readwrite("sigma", &FitConfig::sigma)
      .def_readwrite("knot_grad", &FitConfig::knot_grad)
      .def_readwrite("knot_margin", &FitConfig::knot_margin)
      .def_readwrite("laplacian_weight", &FitConfig::laplacian_weight)
      .def_readwrite("seed", &FitConfig::seed);

  py::class_<FitReport>(m, "FitReport")
      .def_readonly("surface", &FitReport::surface)
      .def_readonly("loss_history", &FitReport::loss_history)
      .def_readonly("final_mse", &FitReport::final_mse)
      .def_readonly("wall_seconds", &FitReport::wall_seconds);

  m.def("mse_loss",
        [](const py::array_t<double, py::array::c_style | py::array::forcecast>& pred,
           const py::array_t<double, py::array::c_style | py::array::forcecast>& target) {
          auto [loss, grad] = mse_loss(array_to_point_grid(pred), array_to_point_grid(target));
          return py::make_tuple(loss, point_grid_to_array(grad));
        });
  m.def("chamfer_distance",
        [](const py::array_t<double, py::array::c_style | py::array::forcecast>& p,
           const py::array_t<double, py::array::c_style | py::array::forcecast>& q, bool squared) {
          return chamfer_distance(array_to_cloud(p), array_to_cloud(q), squared);
        },
        py::arg("p"), py::arg("q"), py::arg("squared") = false);
  m.def("chamfer_distance_x100",
        [](const py::array_t<double, py::array::c_style | py::array::forcecast>& p,
           const py::array_t<double, py::array::c_style | py::array::forcecast>& q) {
          return chamfer_distance_x100(array_to_cloud(p), array_to_cloud(q));
        });
  m.def("laplacian_regularizer", &laplacian_regularizer);
  m.def("bukin_target", [](std::size_t nx, std::size_t ny) {
    return point_grid_to_array(bukin_target(nx, ny));
  });
  m.def("random_surface_for_target",
        [](const py::array_t<double, py::array::c_style | py::array::forcecast>& target,
           std::size_t ctrl_u, std::size_t ctrl_v, int degree, std::uint64_t seed) {
          return random_surface_for_target(array_to_point_grid(target), ctrl_u, ctrl_v, degree,
                                           seed);
        });
  m.def("fit_surface",
        [](const py::array_t<double, py::array::c_style | py::array::forcecast>& target,
           const NurbsSurface& init, const FitConfig& cfg) {
          return fit_surface(array_to_point_grid(target), init, cfg);
        });
  m.def("gradcheck_suite", [](const std::string& name) {
    py::dict out;
    for (const GradCheckRow& row : gradcheck_suite(name)) {
      out[py::str(row.block)] = row.max_rel_err;
    }
    return out;
  });

  // -- fem ------------------------------------------------------------------
  py::class_<StructuredMesh>(m, "StructuredMesh")
      .def(py::init([](std::size_t nx, std::size_t ny, int degree) {
             StructuredMesh mesh{nx, ny, degree};
             mesh.validate();
             return mesh;
           }),
           py::arg("nx"), py::arg("ny"), py::arg("degree") = 1)
      .def_readonly("nx", &StructuredMesh::nx)
      .def_readonly("ny", &StructuredMesh::ny)
      .def_readonly("degree", &StructuredMesh::degree)
      .def("nodes_x", &StructuredMesh::nodes_x)
      .def("nodes_y", &StructuredMesh::nodes_y);

  py::enum_<SolveMethod>(m, "SolveMethod")
      .value("GD", SolveMethod::Gd)
      .value("ADAM", SolveMethod::Adam)
      .value("CG", SolveMethod::Cg);

  m.def("lagrange_basis_1d", [](int degree, double xi) {
    const LagrangeBasis1D b = lagrange_basis_1d(degree, xi);
    std::vector<double> values(b.values.begin(), b.values.begin() + b.count);
    std::vector<double> derivs(b.derivs.begin(), b.derivs.begin() + b.count);
    return py::make_tuple(values, derivs);
  });
  m.def("gauss_quadrature", [](int npts) {
    const QuadratureRule r = gauss_quadrature(npts);
    return py::make_tuple(r.points, r.weights);
  });
  m.def("exact_solution_and_forcing", &exact_solution_and_forcing);
  m.def("diffusivity_field",
        [](const std::array<double, 4>& omega, double x, double y) {
          return diffusivity_field(DiffusivityParams(omega), x, y);
        });
  m.def("sample_omega", [](std::uint64_t seed) { return DiffusivityParams::sample(seed).omega; });
  m.def("solve_poisson",
        [](const StructuredMesh& mesh, const std::optional<std::array<double, 4>>& omega,
           const std::string& method, double tol, int max_iters) {
          const SpatialFn nu = nu_from_omega(omega);
          const SpatialFn f = [](double x, double y) {
            return exact_solution_and_forcing(x, y).second;
          };
          const SolveResult r =
              solve_poisson(mesh, nu, f, parse_solve_method(method), tol, max_iters);
          return py::make_tuple(grid_to_array(r.field.coeffs), r.iterations, r.grad_max_norm);
        },
        py::arg("mesh"), py::arg("omega") = std::nullopt, py::arg("method") = "cg",
        py::arg("tol") = 1e-8, py::arg("max_iters") = 100000);
  m.def("l2_error_vs_exact", [](const StructuredMesh& mesh,
                                const py::array_t<double, py::array::c_style |
                                                              py::array::forcecast>& coeffs) {
    ScalarField2D field(mesh);
    field.coeffs = array_to_grid(coeffs);
    return l2_error(field, [](double x, double y) {
      return exact_solution_and_forcing(x, y).first;
    });
  });

#ifdef SPLINEGRAD_VERSION
  m.attr("__version__") = SPLINEGRAD_VERSION;
#else
  m.attr("__version__") = "dev";
#endif
}
