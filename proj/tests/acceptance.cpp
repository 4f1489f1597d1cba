// Acceptance suite: one pass/fail line per criterion, nonzero exit on any
// failure. argv[1] must be the CLI binary path (used by the determinism
// criterion); argv[2] optionally overrides the scratch directory.
#include <Eigen/Dense>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "splinegrad/fem.hpp"
#include "splinegrad/fitloop.hpp"
#include "splinegrad/io.hpp"
#include "splinegrad/nurbs.hpp"
#include "splinegrad/pcw2d.hpp"
#include "splinegrad/piecewise1d.hpp"
#include "splinegrad/rng.hpp"
#include "splinegrad/serialize.hpp"

using namespace splinegrad;
namespace fs = std::filesystem;

namespace {

int g_failures = 0;

double seconds_since(const std::chrono::steady_clock::time_point& t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

void report(int index, const std::string& name, bool ok, const std::string& detail) {
  std::printf("%s %2d %-28s %s\n", ok ? "PASS" : "FAIL", index, name.c_str(), detail.c_str());
  std::fflush(stdout);
  if (!ok) ++g_failures;
}

// ---- shared oracles -------------------------------------------------------

double oracle_interval_cost(const std::vector<double>& x, std::size_t begin, std::size_t end,
                            int degree) {
  const std::size_t len = end - begin;
  Eigen::MatrixXd v(len, degree + 1);
  Eigen::VectorXd xi(len);
  for (std::size_t r = 0; r < len; ++r) {
    double pw = 1.0;
    for (int p = 0; p <= degree; ++p) {
      v(r, p) = pw;
      pw *= static_cast<double>(r);
    }
    xi(r) = x[begin + r];
  }
  const Eigen::VectorXd alpha = v.colPivHouseholderQr().solve(xi);
  return (v * alpha - xi).squaredNorm();
}

double oracle_best_cost(const std::vector<double>& x, std::size_t k, int degree) {
  const std::size_t n = x.size();
  const std::size_t min_piece = degree + 1;
  double best = std::numeric_limits<double>::infinity();
  std::vector<std::size_t> cuts(k, 0);
  std::function<void(std::size_t, std::size_t, double)> recurse = [&](std::size_t piece,
                                                                      std::size_t start,
                                                                      double acc) {
    if (piece + 1 == k) {
      if (n - start >= min_piece) {
        best = std::min(best, acc + oracle_interval_cost(x, start, n, degree));
      }
      return;
    }
    for (std::size_t cut = start + min_piece; cut + (k - piece - 1) * min_piece <= n; ++cut) {
      recurse(piece + 1, cut, acc + oracle_interval_cost(x, start, cut, degree));
    }
  };
  recurse(0, 0, 0.0);
  return best;
}

Eigen::MatrixXd oracle_hat(std::size_t len, int degree) {
  const std::vector<double> t = local_coords(len);
  Eigen::MatrixXd v(len, degree + 1);
  for (std::size_t r = 0; r < len; ++r) {
    double pw = 1.0;
    for (int p = 0; p <= degree; ++p) {
      v(r, p) = pw;
      pw *= t[r];
    }
  }
  return v * (v.transpose() * v).inverse() * v.transpose();
}

Eigen::MatrixXd oracle_dense_jacobian(const BlockSparseJacobian& jac) {
  const std::size_t n = jac.partition.n;
  Eigen::MatrixXd dense = Eigen::MatrixXd::Zero(n, n);
  for (std::size_t j = 0; j < jac.partition.piece_count(); ++j) {
    const auto [begin, end] = jac.partition.piece(j);
    const std::size_t len = end - begin;
    if (jac.degree == 0) {
      dense.block(begin, begin, len, len).setConstant(1.0 / static_cast<double>(len));
    } else {
      dense.block(begin, begin, len, len) = oracle_hat(len, jac.degree);
    }
  }
  return dense;
}

KnotVector random_clamped(SplitMix64& rng, int degree, std::size_t ctrl_count) {
  KnotVector kv;
  kv.degree = degree;
  std::vector<double> mids(ctrl_count - degree - 1);
  for (double& m : mids) m = rng.uniform(0.05, 0.95);
  std::sort(mids.begin(), mids.end());
  kv.knots.assign(degree + 1, 0.0);
  kv.knots.insert(kv.knots.end(), mids.begin(), mids.end());
  kv.knots.insert(kv.knots.end(), degree + 1, 1.0);
  return kv;
}

NurbsSurface random_surface(SplitMix64& rng, std::size_t nu, std::size_t nv, int degree) {
  NurbsSurface s;
  s.knots_u = random_clamped(rng, degree, nu);
  s.knots_v = random_clamped(rng, degree, nv);
  s.ctrl.assign(nu, std::vector<Vec3>(nv));
  s.weights.assign(nu, std::vector<double>(nv));
  for (std::size_t i = 0; i < nu; ++i) {
    for (std::size_t j = 0; j < nv; ++j) {
      s.ctrl[i][j] = {rng.uniform(-2, 2), rng.uniform(-2, 2), rng.uniform(-2, 2)};
      s.weights[i][j] = rng.uniform(0.5, 2.0);
    }
  }
  return s;
}

// ---- criteria -------------------------------------------------------------

void criterion_1_dp_optimality() {
  const auto t0 = std::chrono::steady_clock::now();
  SplitMix64 rng(1001);
  double worst = 0.0;
  int instances = 0;
  while (instances < 200) {
    const int degree = static_cast<int>(rng.next() % 3);
    const std::size_t n = 4 + rng.next() % 9;
    const std::size_t max_k = std::min<std::size_t>(4, n / (degree + 1));
    if (max_k == 0) continue;
    const std::size_t k = 1 + rng.next() % max_k;
    std::vector<double> x(n);
    for (double& v : x) v = rng.uniform(-4.0, 4.0);
    const double expected = oracle_best_cost(x, k, degree);
    const double got = fit_kpiecewise(x, k, degree).cost;
    worst = std::max(worst, std::abs(got - expected));
    ++instances;
  }
  const double elapsed = seconds_since(t0);
  std::ostringstream detail;
  detail << "max |dp - brute| = " << worst << ", " << elapsed << " s";
  report(1, "dp-optimality-oracle", worst <= 1e-9 && elapsed < 60.0, detail.str());
}

void criterion_2_jacobian_structure() {
  SplitMix64 rng(1002);
  bool ok = true;
  double worst_idem = 0.0, worst_sum = 0.0, worst_vjp = 0.0;
  for (int trial = 0; trial < 30; ++trial) {
    const int degree = static_cast<int>(rng.next() % 3);
    const std::size_t n = 8 + rng.next() % 43;  // up to 50
    const std::size_t k = 1 + rng.next() % 4;
    if (k * (degree + 1) > n) continue;
    std::vector<double> x(n);
    for (double& v : x) v = rng.uniform(-2, 2);
    const auto jac = jacobian(fit_kpiecewise(x, k, degree));
    const Eigen::MatrixXd dense = oracle_dense_jacobian(jac);
    if (degree == 0) {
      for (std::size_t j = 0; j < jac.partition.piece_count(); ++j) {
        const auto [b, e] = jac.partition.piece(j);
        const double inv = 1.0 / static_cast<double>(e - b);
        for (std::size_t r = b; r < e; ++r) {
          double row_sum = 0.0;
          for (std::size_t c = b; c < e; ++c) {
            ok = ok && std::abs(dense(r, c) - inv) <= 1e-12;
            row_sum += dense(r, c);
          }
          worst_sum = std::max(worst_sum, std::abs(row_sum - 1.0));
        }
      }
    } else {
      for (std::size_t j = 0; j < jac.partition.piece_count(); ++j) {
        const auto [b, e] = jac.partition.piece(j);
        const Eigen::MatrixXd h = dense.block(b, b, e - b, e - b);
        worst_idem = std::max(worst_idem, (h * h - h).cwiseAbs().maxCoeff());
        ok = ok && (h - h.transpose()).cwiseAbs().maxCoeff() <= 1e-12;
      }
    }
    std::vector<double> v(n);
    for (double& q : v) q = rng.uniform(-1, 1);
    const auto got = vjp(jac, v);
    const Eigen::Map<const Eigen::VectorXd> vm(v.data(), n);
    const Eigen::VectorXd expect = dense.transpose() * vm;
    for (std::size_t i = 0; i < n; ++i) {
      worst_vjp = std::max(worst_vjp, std::abs(got[i] - expect(i)));
    }
  }
  ok = ok && worst_idem <= 1e-9 && worst_sum <= 1e-12 && worst_vjp <= 1e-12;
  std::ostringstream detail;
  detail << "idem " << worst_idem << ", row-sum " << worst_sum << ", vjp " << worst_vjp;
  report(2, "jacobian-structure", ok, detail.str());
}

void criterion_3_partition_of_unity() {
  SplitMix64 rng(1003);
  double worst = 0.0;
  for (int trial = 0; trial < 1000; ++trial) {
    const int degree = 1 + static_cast<int>(rng.next() % 4);
    const KnotVector kv = random_clamped(rng, degree, degree + 1 + rng.next() % 5);
    const double u = rng.uniform(0.0, 1.0);
    const auto b = basis_funs(kv, find_span(kv, u), u);
    double sum = 0.0;
    for (double v : b) sum += v;
    worst = std::max(worst, std::abs(sum - 1.0));
  }
  // Clamped endpoint interpolation.
  double worst_end = 0.0;
  for (int trial = 0; trial < 50; ++trial) {
    const int degree = 1 + static_cast<int>(rng.next() % 4);
    NurbsCurve c;
    c.knots = random_clamped(rng, degree, degree + 2 + rng.next() % 4);
    for (std::size_t i = 0; i < c.knots.ctrl_count(); ++i) {
      c.ctrl.push_back({rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1)});
      c.weights.push_back(rng.uniform(0.5, 2.0));
    }
    const Vec3 p0 = eval_curve(c, 0.0) - c.ctrl.front();
    const Vec3 p1 = eval_curve(c, 1.0) - c.ctrl.back();
    for (int a = 0; a < 3; ++a) {
      worst_end = std::max({worst_end, std::abs(p0[a]), std::abs(p1[a])});
    }
  }
  std::ostringstream detail;
  detail << "max |sum - 1| = " << worst << ", endpoint dev " << worst_end;
  report(3, "partition-of-unity", worst <= 1e-10 && worst_end <= 1e-13, detail.str());
}

void criterion_4_nurbs_gradients() {
  const auto t0 = std::chrono::steady_clock::now();
  SplitMix64 rng(1004);
  const double step = 1e-6;
  double worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const NurbsSurface base = random_surface(rng, 5, 5, 3);
    PointGrid probe(4, 4);
    for (Vec3& g : probe.data) {
      g = {rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1)};
    }
    auto loss_of = [&](const NurbsSurface& s) {
      const PointGrid pred = eval_surface_grid(s, probe.rows, probe.cols);
      double acc = 0.0;
      for (std::size_t i = 0; i < pred.size(); ++i) acc += dot(pred.data[i], probe.data[i]);
      return acc;
    };
    EvalCache cache;
    eval_surface_grid(base, probe.rows, probe.cols, &cache);
    const NurbsGradients grads = backward_surface(base, cache, probe);
    // Control points.
    for (std::size_t i = 0; i < 5; ++i) {
      for (std::size_t j = 0; j < 5; ++j) {
        for (int a = 0; a < 3; ++a) {
          NurbsSurface sp = base, sm = base;
          sp.ctrl[i][j][a] += step;
          sm.ctrl[i][j][a] -= step;
          const double fd = (loss_of(sp) - loss_of(sm)) / (2 * step);
          const double an = grads.d_ctrl[i][j][a];
          worst = std::max(worst, std::abs(fd - an) / std::max({1.0, std::abs(fd), std::abs(an)}));
        }
      }
    }
    // Weights.
    for (std::size_t i = 0; i < 5; ++i) {
      for (std::size_t j = 0; j < 5; ++j) {
        NurbsSurface sp = base, sm = base;
        sp.weights[i][j] += step;
        sm.weights[i][j] -= step;
        const double fd = (loss_of(sp) - loss_of(sm)) / (2 * step);
        const double an = grads.d_weights[i][j];
        worst = std::max(worst, std::abs(fd - an) / std::max({1.0, std::abs(fd), std::abs(an)}));
      }
    }
  }
  // Knot-gradient locality: one active point touches at most (p+1)+(q+1) slots.
  bool local_ok = true;
  {
    const NurbsSurface s = random_surface(rng, 6, 6, 3);
    EvalCache cache;
    eval_surface_grid(s, 7, 7, &cache);
    for (std::size_t idx = 0; idx < cache.pts.size(); ++idx) {
      PointGrid up(7, 7);
      up.data[idx] = {1.0, 1.0, 1.0};
      std::vector<double> du, dv;
      grad_wrt_knots(s, cache, up, 1e-2, KnotGradMode::BasisTimesKnot, du, dv);
      int nonzero = 0;
      for (double v : du) nonzero += v != 0.0;
      for (double v : dv) nonzero += v != 0.0;
      local_ok = local_ok && nonzero <= 8;
    }
  }
  const double elapsed = seconds_since(t0);
  std::ostringstream detail;
  detail << "max rel err = " << worst << ", locality " << (local_ok ? "ok" : "violated") << ", "
         << elapsed << " s";
  report(4, "nurbs-gradient-checks", worst <= 1e-5 && local_ok && elapsed < 120.0, detail.str());
}

void criterion_5_quarter_circle() {
  NurbsCurve c;
  c.knots.degree = 2;
  c.knots.knots = {0, 0, 0, 1, 1, 1};
  c.ctrl = {{1, 0, 0}, {1, 1, 0}, {0, 1, 0}};
  c.weights = {1.0, std::sqrt(2.0) / 2.0, 1.0};
  double worst = 0.0;
  for (int i = 0; i < 100; ++i) {
    const Vec3 p = eval_curve(c, i / 99.0);
    worst = std::max(worst, std::abs(std::hypot(p[0], p[1]) - 1.0));
  }
  std::ostringstream detail;
  detail << "max | |C(u)| - 1 | = " << worst;
  report(5, "quarter-circle-exactness", worst <= 1e-12, detail.str());
}

void criterion_6_bukin_reparameterization() {
  const auto t0 = std::chrono::steady_clock::now();
  const PointGrid target = bukin_target(64, 64);
  FitConfig cfg;
  cfg.iterations = 2000;
  cfg.seed = 0;
  cfg.optimizer = Optimizer::Adam;
  cfg.learning_rate = 0.5;       // Bukin's z spans ~230; the default 1e-2
  cfg.knot_learning_rate = 6e-3; // cannot traverse that range in 2000 steps
  cfg.knot_grad = KnotGradMode::BasisTimesKnot;
  const NurbsSurface init = random_surface_for_target(target, 8, 8, 3, cfg.seed);

  cfg.reparameterize_knots = false;
  const double base = fit_surface(target, init, cfg).final_mse;
  cfg.reparameterize_knots = true;
  const double rep = fit_surface(target, init, cfg).final_mse;
  const double elapsed = seconds_since(t0);
  std::ostringstream detail;
  detail << "mse " << rep << " vs " << base << " (ratio " << rep / base << "), " << elapsed
         << " s";
  report(6, "bukin-reparameterization", rep <= 0.6 * base && elapsed < 300.0, detail.str());
}

void criterion_7_surface_recovery() {
  SplitMix64 rng(1007);
  const int n = 8, degree = 3;
  NurbsSurface truth;
  truth.knots_u = KnotVector::uniform_clamped(degree, n);
  truth.knots_v = KnotVector::uniform_clamped(degree, n);
  truth.ctrl.assign(n, std::vector<Vec3>(n));
  truth.weights.assign(n, std::vector<double>(n, 1.0));
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      truth.ctrl[i][j] = {i * 0.3, j * 0.3, rng.uniform(-1, 1)};
    }
  }
  const PointGrid target = eval_surface_grid(truth, 32, 32);
  FitConfig cfg;
  cfg.iterations = 2000;
  cfg.seed = 1;
  const NurbsSurface init = random_surface_for_target(target, n, n, degree, cfg.seed);
  const FitReport report_fit = fit_surface(target, init, cfg);
  std::ostringstream detail;
  detail << "final mse = " << report_fit.final_mse;
  report(7, "surface-recovery", report_fit.final_mse <= 1e-4, detail.str());
}

void criterion_8_fem_gradient() {
  const double step = 1e-6;
  double worst = 0.0;
  for (int degree = 1; degree <= 3; ++degree) {
    for (std::size_t nx : {4, 8}) {
      SplitMix64 rng(1008 + degree + nx);
      const StructuredMesh mesh{nx, nx, degree};
      ScalarField2D field(mesh);
      std::vector<std::size_t> interior;
      for (std::size_t i = 1; i + 1 < field.coeffs.rows; ++i) {
        for (std::size_t j = 1; j + 1 < field.coeffs.cols; ++j) {
          interior.push_back(i * field.coeffs.cols + j);
        }
      }
      for (std::size_t slot : interior) field.coeffs.data[slot] = rng.uniform(-1, 1);
      const DiffusivityParams params = DiffusivityParams::sample(degree);
      const SpatialFn nu = [params](double x, double y) { return diffusivity_field(params, x, y); };
      const SpatialFn f = [](double x, double y) {
        return exact_solution_and_forcing(x, y).second;
      };
      const Grid grad = energy_gradient(field, nu, f);
      for (std::size_t slot : interior) {
        const double saved = field.coeffs.data[slot];
        field.coeffs.data[slot] = saved + step;
        const double jp = assemble_energy(field, nu, f);
        field.coeffs.data[slot] = saved - step;
        const double jm = assemble_energy(field, nu, f);
        field.coeffs.data[slot] = saved;
        const double fd = (jp - jm) / (2 * step);
        worst = std::max(worst,
                         std::abs(fd - grad.data[slot]) / std::max(1.0, std::abs(fd)));
      }
    }
  }
  std::ostringstream detail;
  detail << "max rel err = " << worst;
  report(8, "fem-energy-gradient", worst <= 1e-6, detail.str());
}

void criterion_9_poisson_manufactured() {
  const auto t0 = std::chrono::steady_clock::now();
  const SpatialFn nu = [](double, double) { return 1.0; };
  const SpatialFn f = [](double x, double y) { return exact_solution_and_forcing(x, y).second; };
  const SpatialFn uex = [](double x, double y) { return exact_solution_and_forcing(x, y).first; };
  auto solve_err = [&](std::size_t nx, int degree) {
    const StructuredMesh mesh{nx, nx, degree};
    const SolveResult r = solve_poisson(mesh, nu, f, SolveMethod::Cg, 1e-10, 20000);
    return l2_error(r.field, uex);
  };
  const double e32 = solve_err(32, 1);
  const double e64 = solve_err(64, 1);
  const double e16q = solve_err(16, 2);
  const double elapsed = seconds_since(t0);
  const bool ok = e32 <= 5e-3 && e32 / e64 >= 3.0 && e16q < e32 && elapsed < 180.0;
  std::ostringstream detail;
  detail << "L2(32,d1) " << e32 << ", ratio " << e32 / e64 << ", L2(16,d2) " << e16q << ", "
         << elapsed << " s";
  report(9, "poisson-manufactured", ok, detail.str());
}

void criterion_10_chamfer() {
  SplitMix64 rng(1010);
  bool ok = true;
  double worst = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t np = 1 + rng.next() % 64, nq = 1 + rng.next() % 64;
    std::vector<Vec3> p(np), q(nq);
    for (Vec3& v : p) v = {rng.uniform(-3, 3), rng.uniform(-3, 3), rng.uniform(-3, 3)};
    for (Vec3& v : q) v = {rng.uniform(-3, 3), rng.uniform(-3, 3), rng.uniform(-3, 3)};
    double brute = 0.0;
    for (const Vec3& a : p) {
      double best = std::numeric_limits<double>::infinity();
      for (const Vec3& b : q) best = std::min(best, norm(a - b));
      brute += best;
    }
    for (const Vec3& b : q) {
      double best = std::numeric_limits<double>::infinity();
      for (const Vec3& a : p) best = std::min(best, norm(a - b));
      brute += best;
    }
    const double d = chamfer_distance(p, q);
    worst = std::max(worst, std::abs(d - brute));
    ok = ok && d == chamfer_distance(q, p);
  }
  // Zero iff identical on integer clouds.
  std::vector<Vec3> ints = {{0, 0, 0}, {1, 2, 3}, {4, 5, 6}};
  ok = ok && chamfer_distance(ints, ints) == 0.0;
  std::vector<Vec3> shifted = ints;
  shifted[2] = {4, 5, 7};
  ok = ok && chamfer_distance(ints, shifted) > 0.0;
  std::ostringstream detail;
  detail << "max |fast - brute| = " << worst;
  report(10, "chamfer-properties", ok && worst <= 1e-12, detail.str());
}

void criterion_11_pcw2d() {
  SplitMix64 rng(1011);
  double worst = 0.0;
  bool idem = true;
  for (int trial = 0; trial < 20; ++trial) {
    Grid img(4, 4);
    for (double& v : img.data) v = rng.uniform(0, 1);
    const LabelGrid labels = connected_components(img, 0.5);
    Grid up(4, 4);
    for (double& v : up.data) v = rng.uniform(-1, 1);
    const Grid got = pcw2d_vjp(labels, up);
    for (std::size_t t = 0; t < 16; ++t) {
      double expect = 0.0;
      for (std::size_t s = 0; s < 16; ++s) {
        if (labels.labels[s] == labels.labels[t]) {
          expect += up.data[s] / static_cast<double>(labels.sizes[labels.labels[s]]);
        }
      }
      worst = std::max(worst, std::abs(got.data[t] - expect));
    }
    const Grid once = pcw2d_forward(img, labels);
    const Grid twice = pcw2d_forward(once, labels);
    for (std::size_t i = 0; i < once.size(); ++i) {
      idem = idem && once.data[i] == twice.data[i];
    }
  }
  std::ostringstream detail;
  detail << "max |vjp - dense| = " << worst << ", idempotent " << (idem ? "yes" : "no");
  report(11, "pcw2d-oracle", worst <= 1e-12 && idem, detail.str());
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void criterion_12_cli_determinism(const std::string& cli, const fs::path& dir) {
  if (cli.empty()) {
    report(12, "cli-determinism", false, "CLI path not provided (argv[1])");
    return;
  }
  fs::create_directories(dir);
  const std::string d = dir.string();

  // Inputs.
  write_signal_csv(d + "/sig.csv", {0, 1, 2, 5, 7, 9, 4, 4, 4});
  {
    SplitMix64 rng(12);
    Grid img(6, 6);
    for (double& v : img.data) v = rng.uniform(0, 1);
    write_grid(d + "/img.txt", img);
  }
  {
    SplitMix64 rng(13);
    NurbsSurface s;
    s.knots_u = KnotVector::uniform_clamped(2, 5);
    s.knots_v = KnotVector::uniform_clamped(2, 5);
    s.ctrl.assign(5, std::vector<Vec3>(5));
    s.weights.assign(5, std::vector<double>(5, 1.0));
    for (auto& row : s.ctrl) {
      for (Vec3& p : row) p = {rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1)};
    }
    std::ofstream(d + "/surf.json") << surface_to_json(s).dump(2);
  }
  std::ofstream(d + "/cfg.json") << fit_config_to_json([] {
    FitConfig cfg;
    cfg.iterations = 40;
    cfg.reparameterize_knots = true;
    cfg.learning_rate = 0.3;
    cfg.seed = 5;
    return cfg;
  }()).dump(2);

  struct Command {
    std::string args;
    std::vector<std::string> outputs;
  };
  const std::vector<Command> commands = {
      {"fit1d --in " + d + "/sig.csv --k 3 --d 1 --out " + d + "/OUT_fit.json",
       {"OUT_fit.json"}},
      {"pcw2d --in " + d + "/img.txt --threshold 0.5 --out " + d + "/OUT_seg.txt",
       {"OUT_seg.txt"}},
      {"eval-nurbs --surface " + d + "/surf.json --nx 9 --ny 7 --out " + d + "/OUT_eval",
       {"OUT_eval_x.txt", "OUT_eval_y.txt", "OUT_eval_z.txt"}},
      {"fit-surface --bukin 12 12 --cfg " + d + "/cfg.json --ctrl 5 5 --out " + d +
           "/OUT_report.json",
       {"OUT_report.json"}},
      {"solve-poisson --nx 8 --degree 2 --method cg --tol 1e-9 --omega 0.5,-0.25,0.1,0.9 "
       "--log " +
           d + "/OUT_conv.csv --out " + d + "/OUT_field.txt",
       {"OUT_field.txt", "OUT_conv.csv"}},
      {"gradcheck --suite piecewise > " + d + "/OUT_gradcheck.txt", {"OUT_gradcheck.txt"}},
  };

  bool ok = true;
  std::string first_diff;
  for (const Command& cmd : commands) {
    std::vector<std::string> snapshot;
    for (int run = 0; run < 2; ++run) {
      const std::string full = cli + " --threads 1 " + cmd.args;
      if (std::system(full.c_str()) != 0) {
        ok = false;
        first_diff = "command failed: " + cmd.args;
        break;
      }
      if (run == 0) {
        for (const std::string& out : cmd.outputs) snapshot.push_back(read_file(d + "/" + out));
      } else {
        for (std::size_t i = 0; i < cmd.outputs.size(); ++i) {
          if (read_file(d + "/" + cmd.outputs[i]) != snapshot[i]) {
            ok = false;
            if (first_diff.empty()) first_diff = "differs: " + cmd.outputs[i];
          }
        }
      }
    }
    if (!ok) break;
  }
  report(12, "cli-determinism", ok, ok ? "byte-identical reruns" : first_diff);
}

}  // namespace

int main(int argc, char** argv) {
  const std::string cli = argc > 1 ? argv[1] : "";
  const fs::path scratch = argc > 2 ? fs::path(argv[2])
                                    : fs::temp_directory_path() / "splinegrad_acceptance";
  criterion_1_dp_optimality();
  criterion_2_jacobian_structure();
  criterion_3_partition_of_unity();
  criterion_4_nurbs_gradients();
  criterion_5_quarter_circle();
  criterion_6_bukin_reparameterization();
  criterion_7_surface_recovery();
  criterion_8_fem_gradient();
  criterion_9_poisson_manufactured();
  criterion_10_chamfer();
  criterion_11_pcw2d();
  criterion_12_cli_determinism(cli, scratch);
  std::printf("%d of 12 criteria failed\n", g_failures);
  return g_failures;
}
