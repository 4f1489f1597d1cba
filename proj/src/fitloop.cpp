#include "splinegrad/fitloop.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>

#include "splinegrad/errors.hpp"
#include "splinegrad/fem.hpp"
#include "splinegrad/piecewise1d.hpp"
#include "splinegrad/rng.hpp"

namespace splinegrad {

void FitConfig::validate() const {
  if (!(learning_rate > 0.0)) throw ConfigError("learning rate must be positive");
  if (!(knot_learning_rate > 0.0)) throw ConfigError("knot learning rate must be positive");
  if (iterations < 0) throw ConfigError("iteration count must be non-negative");
  if (!(sigma > 0.0)) throw ConfigError("sigma must be positive");
  if (knot_margin < 0.0) throw ConfigError("knot margin must be non-negative");
  if (!(beta1 >= 0.0 && beta1 < 1.0) || !(beta2 >= 0.0 && beta2 < 1.0)) {
    throw ConfigError("adam betas must lie in [0, 1)");
  }
  if (laplacian_weight < 0.0) throw ConfigError("laplacian weight must be non-negative");
}

std::pair<double, PointGrid> mse_loss(const PointGrid& pred, const PointGrid& target) {
  if (!pred.same_shape(target)) throw DimensionError("mse_loss: grid shapes differ");
  const double inv_n = 1.0 / static_cast<double>(pred.size());
  double loss = 0.0;
  PointGrid grad(pred.rows, pred.cols);
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const Vec3 d = pred.data[i] - target.data[i];
    loss += inv_n * dot(d, d);
    grad.data[i] = (2.0 * inv_n) * d;
  }
  return {loss, grad};
}

double chamfer_distance(const std::vector<Vec3>& p, const std::vector<Vec3>& q, bool squared) {
  if (p.empty() || q.empty()) throw DomainError("chamfer_distance: point set is empty");
  auto one_sided = [squared](const std::vector<Vec3>& from, const std::vector<Vec3>& to) {
    double acc = 0.0;
    for (const Vec3& a : from) {
      double best = std::numeric_limits<double>::infinity();
      for (const Vec3& b : to) {
        const Vec3 d = a - b;
        best = std::min(best, dot(d, d));
      }
      acc += squared ? best : std::sqrt(best);
    }
    return acc;
  };
  return one_sided(p, q) + one_sided(q, p);
}

double chamfer_distance_x100(const std::vector<Vec3>& p, const std::vector<Vec3>& q) {
  return 100.0 * chamfer_distance(p, q);
}

std::pair<double, std::vector<std::vector<Vec3>>> laplacian_regularizer(
    const std::vector<std::vector<Vec3>>& ctrl) {
  const std::size_t nu = ctrl.size();
  const std::size_t nv = nu ? ctrl[0].size() : 0;
  if (nu < 3 || nv < 3) throw DimensionError("laplacian_regularizer: grid must be at least 3x3");
  double loss = 0.0;
  std::vector<std::vector<Vec3>> grad(nu, std::vector<Vec3>(nv, Vec3{0.0, 0.0, 0.0}));
  for (std::size_t i = 1; i + 1 < nu; ++i) {
    for (std::size_t j = 1; j + 1 < nv; ++j) {
      const Vec3 t = 4.0 * ctrl[i][j] - ctrl[i - 1][j] - ctrl[i + 1][j] - ctrl[i][j - 1] -
                     ctrl[i][j + 1];
      loss += dot(t, t);
      grad[i][j] += 8.0 * t;
      grad[i - 1][j] += -2.0 * t;
      grad[i + 1][j] += -2.0 * t;
      grad[i][j - 1] += -2.0 * t;
      grad[i][j + 1] += -2.0 * t;
    }
  }
  return {loss, grad};
}

PointGrid bukin_target(std::size_t nx, std::size_t ny) {
  if (nx < 2 || ny < 2) throw ConfigError("bukin_target needs at least a 2x2 grid");
  PointGrid g(nx, ny);
  for (std::size_t i = 0; i < nx; ++i) {
    const double x = -15.0 + 10.0 * static_cast<double>(i) / static_cast<double>(nx - 1);
    for (std::size_t j = 0; j < ny; ++j) {
      const double y = -3.0 + 6.0 * static_cast<double>(j) / static_cast<double>(ny - 1);
      const double z = 100.0 * std::sqrt(std::abs(y - 0.01 * x * x)) + 0.01 * std::abs(x + 10.0);
      g(i, j) = {x, y, z};
    }
  }
  return g;
}

NurbsSurface random_surface_for_target(const PointGrid& target, std::size_t ctrl_u,
                                       std::size_t ctrl_v, int degree, std::uint64_t seed) {
  if (target.size() == 0) throw DimensionError("target grid is empty");
  Vec3 lo = target.data[0], hi = target.data[0];
  for (const Vec3& p : target.data) {
    for (int a = 0; a < 3; ++a) {
      lo[a] = std::min(lo[a], p[a]);
      hi[a] = std::max(hi[a], p[a]);
    }
  }
  SplitMix64 rng(seed);
  NurbsSurface s;
  s.knots_u = KnotVector::uniform_clamped(degree, ctrl_u);
  s.knots_v = KnotVector::uniform_clamped(degree, ctrl_v);
  s.ctrl.assign(ctrl_u, std::vector<Vec3>(ctrl_v));
  s.weights.assign(ctrl_u, std::vector<double>(ctrl_v, 1.0));
  for (std::size_t i = 0; i < ctrl_u; ++i) {
    for (std::size_t j = 0; j < ctrl_v; ++j) {
      s.ctrl[i][j] = {rng.uniform(lo[0], hi[0]), rng.uniform(lo[1], hi[1]),
                      rng.uniform(lo[2], hi[2])};
    }
  }
  s.validate();
  return s;
}

void project_interior_knots(KnotVector& kv, double margin) {
  const int d = kv.degree;
  const std::size_t first = d + 1;
  const std::size_t last = kv.knots.size() - d - 2;  // inclusive
  if (first > last) return;                          // no interior knots
  const double lo = kv.knots[d] + margin;
  const double hi = kv.knots[kv.knots.size() - d - 1] - margin;
  for (int pass = 0; pass < 100; ++pass) {
    for (std::size_t i = first; i <= last; ++i) kv.knots[i] = std::clamp(kv.knots[i], lo, hi);
    std::sort(kv.knots.begin() + first, kv.knots.begin() + last + 1);
    bool clean = true;
    for (std::size_t i = first; i < last; ++i) {
      const double gap = kv.knots[i + 1] - kv.knots[i];
      if (gap < margin) {
        const double mid = 0.5 * (kv.knots[i] + kv.knots[i + 1]);
        kv.knots[i] = mid - 0.5 * margin;
        kv.knots[i + 1] = mid + 0.5 * margin;
        clean = false;
      }
    }
    if (clean) break;
  }
  for (std::size_t i = first; i <= last; ++i) kv.knots[i] = std::clamp(kv.knots[i], lo, hi);
  std::sort(kv.knots.begin() + first, kv.knots.begin() + last + 1);
}

namespace {

// First-moment/second-moment state of one adam parameter block.
struct AdamState {
  std::vector<double> m;
  std::vector<double> v;
  int step = 0;

  explicit AdamState(std::size_t n) : m(n, 0.0), v(n, 0.0) {}

  void update(std::vector<double>& params, const std::vector<double>& grad, const FitConfig& cfg,
              double lr) {
    ++step;
    const double bc1 = 1.0 - std::pow(cfg.beta1, step);
    const double bc2 = 1.0 - std::pow(cfg.beta2, step);
    for (std::size_t i = 0; i < params.size(); ++i) {
      m[i] = cfg.beta1 * m[i] + (1.0 - cfg.beta1) * grad[i];
      v[i] = cfg.beta2 * v[i] + (1.0 - cfg.beta2) * grad[i] * grad[i];
      params[i] -= lr * (m[i] / bc1) / (std::sqrt(v[i] / bc2) + cfg.eps);
    }
  }
};

void plain_gd_update(std::vector<double>& params, const std::vector<double>& grad, double lr) {
  for (std::size_t i = 0; i < params.size(); ++i) params[i] -= lr * grad[i];
}

std::vector<double> flatten_ctrl(const std::vector<std::vector<Vec3>>& ctrl) {
  std::vector<double> flat;
  flat.reserve(ctrl.size() * ctrl[0].size() * 3);
  for (const auto& row : ctrl) {
    for (const Vec3& p : row) flat.insert(flat.end(), p.begin(), p.end());
  }
  return flat;
}

void unflatten_ctrl(const std::vector<double>& flat, std::vector<std::vector<Vec3>>& ctrl) {
  std::size_t k = 0;
  for (auto& row : ctrl) {
    for (Vec3& p : row) {
      p = {flat[k], flat[k + 1], flat[k + 2]};
      k += 3;
    }
  }
}

std::vector<double> interior_knots(const KnotVector& kv) {
  const int d = kv.degree;
  return {kv.knots.begin() + d + 1, kv.knots.end() - d - 1};
}

void set_interior_knots(KnotVector& kv, const std::vector<double>& interior) {
  std::copy(interior.begin(), interior.end(), kv.knots.begin() + kv.degree + 1);
}

}  // namespace

FitReport fit_surface(const PointGrid& target, const NurbsSurface& init, const FitConfig& cfg) {
  cfg.validate();
  init.validate();
  if (target.rows < 2 || target.cols < 2) throw DimensionError("target grid must be at least 2x2");
  for (const Vec3& p : target.data) {
    if (!std::isfinite(p[0]) || !std::isfinite(p[1]) || !std::isfinite(p[2])) {
      throw NumericError("target grid contains non-finite points");
    }
  }

  const auto t0 = std::chrono::steady_clock::now();
  FitReport report;
  report.surface = init;
  NurbsSurface& surface = report.surface;

  std::vector<double> ctrl_flat = flatten_ctrl(surface.ctrl);
  std::vector<double> knots_u = interior_knots(surface.knots_u);
  std::vector<double> knots_v = interior_knots(surface.knots_v);
  AdamState adam_ctrl(ctrl_flat.size());
  AdamState adam_knots_u(knots_u.size());
  AdamState adam_knots_v(knots_v.size());

  auto forward_loss = [&](EvalCache* cache, PointGrid* upstream) {
    const PointGrid pred = eval_surface_grid(surface, target.rows, target.cols, cache);
    auto [mse, grad] = mse_loss(pred, target);
    double loss = mse;
    if (cfg.laplacian_weight > 0.0) {
      loss += cfg.laplacian_weight * laplacian_regularizer(surface.ctrl).first;
    }
    if (upstream) *upstream = std::move(grad);
    return std::pair<double, double>{loss, mse};
  };

  for (int it = 0; it < cfg.iterations; ++it) {
    EvalCache cache;
    PointGrid upstream;
    const auto [loss, mse] = forward_loss(&cache, &upstream);
    if (!std::isfinite(loss)) {
      throw DivergenceError("fit diverged at iteration " + std::to_string(it));
    }
    report.loss_history.push_back(loss);

    NurbsGradients grads =
        backward_surface(surface, cache, upstream, cfg.sigma, cfg.knot_grad);
    std::vector<double> dctrl = flatten_ctrl(grads.d_ctrl);
    if (cfg.laplacian_weight > 0.0) {
      const auto [lap, lap_grad] = laplacian_regularizer(surface.ctrl);
      (void)lap;
      const std::vector<double> lap_flat = flatten_ctrl(lap_grad);
      for (std::size_t i = 0; i < dctrl.size(); ++i) {
        dctrl[i] += cfg.laplacian_weight * lap_flat[i];
      }
    }

    if (cfg.optimizer == Optimizer::Adam) {
      adam_ctrl.update(ctrl_flat, dctrl, cfg, cfg.learning_rate);
    } else {
      plain_gd_update(ctrl_flat, dctrl, cfg.learning_rate);
    }
    unflatten_ctrl(ctrl_flat, surface.ctrl);

    if (cfg.reparameterize_knots) {
      const int p = surface.knots_u.degree, q = surface.knots_v.degree;
      std::vector<double> du(grads.d_knots_u.begin() + p + 1, grads.d_knots_u.end() - p - 1);
      std::vector<double> dv(grads.d_knots_v.begin() + q + 1, grads.d_knots_v.end() - q - 1);
      if (cfg.optimizer == Optimizer::Adam) {
        adam_knots_u.update(knots_u, du, cfg, cfg.knot_learning_rate);
        adam_knots_v.update(knots_v, dv, cfg, cfg.knot_learning_rate);
      } else {
        plain_gd_update(knots_u, du, cfg.knot_learning_rate);
        plain_gd_update(knots_v, dv, cfg.knot_learning_rate);
      }
      set_interior_knots(surface.knots_u, knots_u);
      set_interior_knots(surface.knots_v, knots_v);
      project_interior_knots(surface.knots_u, cfg.knot_margin);
      project_interior_knots(surface.knots_v, cfg.knot_margin);
      knots_u = interior_knots(surface.knots_u);
      knots_v = interior_knots(surface.knots_v);
    }
  }

  const auto [final_loss, final_mse] = forward_loss(nullptr, nullptr);
  if (!std::isfinite(final_loss)) {
    throw DivergenceError("fit diverged at iteration " + std::to_string(cfg.iterations));
  }
  report.loss_history.push_back(final_loss);
  report.final_mse = final_mse;
  report.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return report;
}

double gradient_check(const LossWithGrad& f, std::vector<double> params, double step) {
  if (!(step > 0.0)) throw ConfigError("gradient_check step must be positive");
  const std::vector<double> analytic = f(params).second;
  if (analytic.size() != params.size()) {
    throw DimensionError("gradient length does not match parameter count");
  }
  double worst = 0.0;
  for (std::size_t i = 0; i < params.size(); ++i) {
    const double saved = params[i];
    params[i] = saved + step;
    const double lp = f(params).first;
    params[i] = saved - step;
    const double lm = f(params).first;
    params[i] = saved;
    const double fd = (lp - lm) / (2.0 * step);
    if (!std::isfinite(fd) || !std::isfinite(analytic[i])) {
      throw NumericError("non-finite value in gradient check");
    }
    const double denom = std::max({1.0, std::abs(analytic[i]), std::abs(fd)});
    worst = std::max(worst, std::abs(analytic[i] - fd) / denom);
  }
  return worst;
}

namespace {

// Linear probe <g, S>: its gradient is exactly the backward pass of g.
double probe_loss(const PointGrid& pred, const PointGrid& probe) {
  double acc = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) acc += dot(pred.data[i], probe.data[i]);
  return acc;
}

NurbsSurface random_test_surface(SplitMix64& rng, std::size_t nu, std::size_t nv, int degree) {
  NurbsSurface s;
  s.knots_u = KnotVector::uniform_clamped(degree, nu);
  s.knots_v = KnotVector::uniform_clamped(degree, nv);
  s.ctrl.assign(nu, std::vector<Vec3>(nv));
  s.weights.assign(nu, std::vector<double>(nv));
  for (std::size_t i = 0; i < nu; ++i) {
    for (std::size_t j = 0; j < nv; ++j) {
      s.ctrl[i][j] = {rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0)};
      s.weights[i][j] = rng.uniform(0.5, 2.0);
    }
  }
  return s;
}

std::vector<GradCheckRow> nurbs_gradcheck() {
  const double step = 1e-6;
  double worst_ctrl = 0.0, worst_w = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    SplitMix64 rng(1000 + trial);
    NurbsSurface base = random_test_surface(rng, 5, 5, 3);
    PointGrid probe(6, 6);
    for (Vec3& g : probe.data) {
      g = {rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0)};
    }
    auto backward = [&](const NurbsSurface& s) {
      EvalCache cache;
      const PointGrid pred = eval_surface_grid(s, probe.rows, probe.cols, &cache);
      return std::pair{probe_loss(pred, probe), backward_surface(s, cache, probe)};
    };

    LossWithGrad ctrl_loss = [&](const std::vector<double>& params) {
      NurbsSurface s = base;
      unflatten_ctrl(params, s.ctrl);
      auto [loss, grads] = backward(s);
      return std::pair{loss, flatten_ctrl(grads.d_ctrl)};
    };
    worst_ctrl = std::max(worst_ctrl, gradient_check(ctrl_loss, flatten_ctrl(base.ctrl), step));

    LossWithGrad weight_loss = [&](const std::vector<double>& params) {
      NurbsSurface s = base;
      std::size_t k = 0;
      for (auto& row : s.weights) {
        for (double& w : row) w = params[k++];
      }
      auto [loss, grads] = backward(s);
      std::vector<double> flat;
      for (const auto& row : grads.d_weights) flat.insert(flat.end(), row.begin(), row.end());
      return std::pair{loss, flat};
    };
    std::vector<double> w0;
    for (const auto& row : base.weights) w0.insert(w0.end(), row.begin(), row.end());
    worst_w = std::max(worst_w, gradient_check(weight_loss, w0, step));
  }
  return {{"nurbs/ctrl", worst_ctrl}, {"nurbs/weights", worst_w}};
}

std::vector<GradCheckRow> fem_gradcheck() {
  const double step = 1e-6;
  std::vector<GradCheckRow> rows;
  for (int degree = 1; degree <= 3; ++degree) {
    SplitMix64 rng(2000 + degree);
    StructuredMesh mesh{3, 3, degree};
    const DiffusivityParams params = DiffusivityParams::sample(7);
    SpatialFn nu = [params](double x, double y) { return diffusivity_field(params, x, y); };
    SpatialFn f = [](double x, double y) { return exact_solution_and_forcing(x, y).second; };

    ScalarField2D field(mesh);
    std::vector<std::size_t> interior;
    for (std::size_t i = 1; i + 1 < field.coeffs.rows; ++i) {
      for (std::size_t j = 1; j + 1 < field.coeffs.cols; ++j) {
        interior.push_back(i * field.coeffs.cols + j);
      }
    }
    std::vector<double> x0(interior.size());
    for (double& v : x0) v = rng.uniform(-1.0, 1.0);

    LossWithGrad energy = [&](const std::vector<double>& params_vec) {
      ScalarField2D u = field;
      for (std::size_t k = 0; k < interior.size(); ++k) u.coeffs.data[interior[k]] = params_vec[k];
      const double j = assemble_energy(u, nu, f);
      const Grid g = energy_gradient(u, nu, f);
      std::vector<double> flat(interior.size());
      for (std::size_t k = 0; k < interior.size(); ++k) flat[k] = g.data[interior[k]];
      return std::pair{j, flat};
    };
    rows.push_back({"fem/energy-d" + std::to_string(degree), gradient_check(energy, x0, step)});
  }
  return rows;
}

std::vector<GradCheckRow> piecewise_gradcheck() {
  const double step = 1e-6;
  std::vector<GradCheckRow> rows;
  for (int degree = 0; degree <= 2; ++degree) {
    SplitMix64 rng(3000 + degree);
    double worst = 0.0;
    for (int trial = 0; trial < 10; ++trial) {
      const std::size_t n = 12;
      std::vector<double> x(n);
      for (double& v : x) v = rng.uniform(-2.0, 2.0);
      const IntervalPartition partition = fit_kpiecewise(x, 3, degree).partition;
      std::vector<double> probe(n);
      for (double& v : probe) v = rng.uniform(-1.0, 1.0);

      LossWithGrad fit_probe = [&](const std::vector<double>& params) {
        const PiecewiseFit fit = fit_with_partition(params, partition, degree);
        double loss = 0.0;
        for (std::size_t i = 0; i < n; ++i) loss += probe[i] * fit.fitted[i];
        return std::pair{loss, vjp(jacobian(fit), probe)};
      };
      worst = std::max(worst, gradient_check(fit_probe, x, step));
    }
    rows.push_back({"piecewise/d" + std::to_string(degree), worst});
  }
  return rows;
}

}  // namespace

std::vector<GradCheckRow> gradcheck_suite(const std::string& name) {
  if (name == "nurbs") return nurbs_gradcheck();
  if (name == "fem") return fem_gradcheck();
  if (name == "piecewise") return piecewise_gradcheck();
  throw ConfigError("unknown gradcheck suite: " + name);
}

}  // namespace splinegrad
