#include <cstdio>
#include <cstdlib>
#include <exception>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "splinegrad/errors.hpp"
#include "splinegrad/fem.hpp"
#include "splinegrad/fitloop.hpp"
#include "splinegrad/io.hpp"
#include "splinegrad/nurbs.hpp"
#include "splinegrad/parallel.hpp"
#include "splinegrad/pcw2d.hpp"
#include "splinegrad/piecewise1d.hpp"
#include "splinegrad/serialize.hpp"

namespace sg = splinegrad;

namespace {

void write_json_file(const std::string& path, const sg::json& j) {
  sg::atomic_write_text(path, j.dump(2) + "\n");
}

sg::json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open JSON file: " + path);
  return sg::json::parse(in);
}

struct Options {
  // fit1d
  std::string in_path, out_path;
  int k = 1, d = 0;
  // pcw2d
  double threshold = 0.5;
  // eval-nurbs / fit-surface
  std::string surface_path, out_prefix, target_prefix, cfg_path;
  std::size_t nx = 2, ny = 2;
  std::vector<std::size_t> bukin_dims;
  std::vector<std::size_t> ctrl_dims{8, 8};
  int fit_degree = 3;
  int history_every = 1;
  // solve-poisson
  std::size_t mesh_nx = 0, mesh_ny = 0;
  int mesh_degree = 1;
  std::string method = "cg";
  double tol = 1e-8;
  int max_iters = 100000;
  std::vector<double> omega;
  std::string log_path, nu_path;
  // gradcheck
  std::string suite;
  // global
  int threads = 0;
  std::uint64_t seed = 0;
  bool seed_given = false;
};

int run_fit1d(const Options& opt) {
  const std::vector<double> x = sg::read_signal_csv(opt.in_path);
  const sg::PiecewiseFit fit = sg::fit_kpiecewise(x, opt.k, opt.d);
  write_json_file(opt.out_path, sg::piecewise_fit_to_json(fit));
  return 0;
}

int run_pcw2d(const Options& opt) {
  const sg::Grid image = sg::read_grid(opt.in_path);
  const sg::LabelGrid labels = sg::connected_components(image, opt.threshold);
  sg::write_grid(opt.out_path, sg::pcw2d_forward(image, labels));
  return 0;
}

int run_eval_nurbs(const Options& opt) {
  const sg::NurbsSurface surface = sg::surface_from_json(read_json_file(opt.surface_path));
  const sg::PointGrid grid = sg::eval_surface_grid(surface, opt.nx, opt.ny);
  sg::write_point_grid(opt.out_prefix, grid);
  return 0;
}

int run_fit_surface(const Options& opt) {
  sg::FitConfig cfg;
  if (!opt.cfg_path.empty()) cfg = sg::fit_config_from_json(read_json_file(opt.cfg_path));
  if (opt.seed_given) cfg.seed = opt.seed;

  sg::PointGrid target;
  if (!opt.bukin_dims.empty()) {
    target = sg::bukin_target(opt.bukin_dims[0], opt.bukin_dims[1]);
  } else if (!opt.target_prefix.empty()) {
    target = sg::read_point_grid(opt.target_prefix);
  } else {
    std::cerr << "fit-surface needs --target or --bukin\n";
    return 2;
  }

  const sg::NurbsSurface init = sg::random_surface_for_target(
      target, opt.ctrl_dims[0], opt.ctrl_dims[1], opt.fit_degree, cfg.seed);
  const sg::FitReport report = sg::fit_surface(target, init, cfg);
  write_json_file(opt.out_path, sg::fit_report_to_json(report, opt.history_every));
  return 0;
}

int run_solve_poisson(const Options& opt, const CLI::App* cmd) {
  std::size_t nx = opt.mesh_nx, ny = opt.mesh_ny;
  int degree = opt.mesh_degree, max_iters = opt.max_iters;
  std::string method = opt.method;
  double tol = opt.tol;
  std::vector<double> omega = opt.omega;

  // --cfg supplies defaults; explicit flags win.
  if (!opt.cfg_path.empty()) {
    const sg::json j = read_json_file(opt.cfg_path);
    if (j.contains("nx") && cmd->count("--nx") == 0) nx = j["nx"].get<std::size_t>();
    if (j.contains("ny") && cmd->count("--ny") == 0) ny = j["ny"].get<std::size_t>();
    if (j.contains("degree") && cmd->count("--degree") == 0) degree = j["degree"].get<int>();
    if (j.contains("method") && cmd->count("--method") == 0) {
      method = j["method"].get<std::string>();
    }
    if (j.contains("tol") && cmd->count("--tol") == 0) tol = j["tol"].get<double>();
    if (j.contains("max_iters") && cmd->count("--max-iters") == 0) {
      max_iters = j["max_iters"].get<int>();
    }
    if (j.contains("omega") && cmd->count("--omega") == 0) {
      omega = j["omega"].get<std::vector<double>>();
    }
    if (cmd->count("--ny") == 0 && !j.contains("ny")) ny = nx;
  }
  if (nx == 0) {
    std::cerr << "solve-poisson needs --nx (or a cfg with nx)\n";
    return 2;
  }

  const sg::StructuredMesh mesh{nx, ny, degree};
  sg::SpatialFn nu = [](double, double) { return 1.0; };
  if (!omega.empty()) {
    if (omega.size() != 4) {
      std::cerr << "--omega needs exactly 4 comma-separated values\n";
      return 2;
    }
    const sg::DiffusivityParams params({omega[0], omega[1], omega[2], omega[3]});
    nu = [params](double x, double y) { return sg::diffusivity_field(params, x, y); };
  }
  sg::SpatialFn f = [](double x, double y) { return sg::exact_solution_and_forcing(x, y).second; };

  const sg::SolveResult result =
      sg::solve_poisson(mesh, nu, f, sg::parse_solve_method(method), tol, max_iters);
  sg::write_grid(opt.out_path, result.field.coeffs);
  if (!opt.nu_path.empty()) {
    sg::Grid map(mesh.nodes_x(), mesh.nodes_y());
    for (std::size_t i = 0; i < map.rows; ++i) {
      for (std::size_t j = 0; j < map.cols; ++j) {
        map(i, j) = nu(static_cast<double>(i) / (map.rows - 1),
                       static_cast<double>(j) / (map.cols - 1));
      }
    }
    sg::write_grid(opt.nu_path, map);
  }
  if (!opt.log_path.empty()) {
    std::ostringstream log;
    log << "iteration,energy,grad_max_norm\n";
    for (const auto& s : result.history) {
      log << s.iteration << ',' << sg::format_real(s.energy) << ','
          << sg::format_real(s.grad_max_norm) << '\n';
    }
    sg::atomic_write_text(opt.log_path, log.str());
  }
  return 0;
}

int run_gradcheck(const Options& opt) {
  const std::vector<sg::GradCheckRow> rows = sg::gradcheck_suite(opt.suite);
  bool ok = true;
  std::printf("%-24s %s\n", "block", "max-rel-err");
  for (const auto& row : rows) {
    std::printf("%-24s %.3e\n", row.block.c_str(), row.max_rel_err);
    ok = ok && row.max_rel_err <= 1e-4;
  }
  std::printf("%s\n", ok ? "OK" : "EXCEEDED 1e-4");
  return ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Differentiable spline approximation toolkit"};
  app.require_subcommand(1);
  Options opt;

  app.add_option("--threads", opt.threads, "Worker threads (default: DSA_THREADS or 1)");
  app.add_option("--seed", opt.seed, "Override the random seed")->each([&](const std::string&) {
    opt.seed_given = true;
  });

  CLI::App* fit1d = app.add_subcommand("fit1d", "Exact k-piecewise polynomial regression");
  fit1d->add_option("--in", opt.in_path, "Input CSV signal, one value per line")->required();
  fit1d->add_option("--k", opt.k, "Number of pieces")->required();
  fit1d->add_option("--d", opt.d, "Polynomial degree per piece");
  fit1d->add_option("--out", opt.out_path, "Output fit JSON")->required();

  CLI::App* pcw2d = app.add_subcommand("pcw2d", "Piecewise-constant 2D forward pass");
  pcw2d->add_option("--in", opt.in_path, "Input text grid")->required();
  pcw2d->add_option("--threshold", opt.threshold, "Binarization threshold")->required();
  pcw2d->add_option("--out", opt.out_path, "Output text grid")->required();

  CLI::App* evaln = app.add_subcommand("eval-nurbs", "Evaluate a NURBS surface on a grid");
  evaln->add_option("--surface", opt.surface_path, "Surface JSON")->required();
  evaln->add_option("--nx", opt.nx, "Grid points along u")->required();
  evaln->add_option("--ny", opt.ny, "Grid points along v")->required();
  evaln->add_option("--out", opt.out_prefix, "Output prefix for _x/_y/_z grids")->required();

  CLI::App* fits = app.add_subcommand("fit-surface", "Gradient-based NURBS surface fitting");
  fits->add_option("--target", opt.target_prefix, "Target point-grid prefix");
  fits->add_option("--bukin", opt.bukin_dims, "Synthesize a Bukin N.6 target of size NX NY")
      ->expected(2);
  fits->add_option("--cfg", opt.cfg_path, "Fit configuration JSON");
  fits->add_option("--ctrl", opt.ctrl_dims, "Control grid size NU NV")->expected(2);
  fits->add_option("--degree", opt.fit_degree, "Surface degree (both directions)");
  fits->add_option("--history-every", opt.history_every, "Keep every k-th loss history entry");
  fits->add_option("--out", opt.out_path, "Output report JSON")->required();

  CLI::App* solve = app.add_subcommand("solve-poisson", "Energy-minimizing Poisson solve");
  solve->add_option("--nx", opt.mesh_nx, "Elements along x");
  solve->add_option("--cfg", opt.cfg_path, "Solver configuration JSON");
  solve->add_option("--ny", opt.mesh_ny, "Elements along y");
  solve->add_option("--degree", opt.mesh_degree, "Element degree (1-3)");
  solve->add_option("--method", opt.method, "gd, adam or cg");
  solve->add_option("--tol", opt.tol, "Gradient max-norm tolerance");
  solve->add_option("--max-iters", opt.max_iters, "Iteration cap");
  solve->add_option("--omega", opt.omega, "Diffusivity family parameters w1,w2,w3,w4")
      ->delimiter(',');
  solve->add_option("--log", opt.log_path, "Convergence log CSV");
  solve->add_option("--dump-nu", opt.nu_path, "Write the diffusivity map sampled at the nodes");
  solve->add_option("--out", opt.out_path, "Output nodal field grid")->required();

  CLI::App* gradcheck = app.add_subcommand("gradcheck", "Finite-difference gradient suites");
  gradcheck->add_option("--suite", opt.suite, "nurbs, fem or piecewise")
      ->required()
      ->check(CLI::IsMember({"nurbs", "fem", "piecewise"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << e.what() << "\n\n" << app.help() << std::flush;
    return 2;
  }

  if (opt.threads <= 0) {
    if (const char* env = std::getenv("DSA_THREADS")) opt.threads = std::atoi(env);
  }
  sg::set_num_threads(opt.threads > 0 ? opt.threads : 1);
  if (solve->parsed() && solve->count("--ny") == 0) opt.mesh_ny = opt.mesh_nx;

  try {
    if (fit1d->parsed()) return run_fit1d(opt);
    if (pcw2d->parsed()) return run_pcw2d(opt);
    if (evaln->parsed()) return run_eval_nurbs(opt);
    if (fits->parsed()) return run_fit_surface(opt);
    if (solve->parsed()) return run_solve_poisson(opt, solve);
    if (gradcheck->parsed()) return run_gradcheck(opt);
  } catch (const sg::ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const sg::InfeasibleError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 2;
}
