#include "splinegrad/serialize.hpp"

#include "splinegrad/errors.hpp"

namespace splinegrad {

json surface_to_json(const NurbsSurface& surface) {
  json j;
  j["degreeU"] = surface.knots_u.degree;
  j["degreeV"] = surface.knots_v.degree;
  j["knotsU"] = surface.knots_u.knots;
  j["knotsV"] = surface.knots_v.knots;
  json ctrl = json::array();
  for (const auto& row : surface.ctrl) {
    json jrow = json::array();
    for (const Vec3& p : row) jrow.push_back({p[0], p[1], p[2]});
    ctrl.push_back(std::move(jrow));
  }
  j["ctrl"] = std::move(ctrl);
  j["weights"] = surface.weights;
  return j;
}

NurbsSurface surface_from_json(const json& j) {
  NurbsSurface s;
  s.knots_u.degree = j.at("degreeU").get<int>();
  s.knots_v.degree = j.at("degreeV").get<int>();
  s.knots_u.knots = j.at("knotsU").get<std::vector<double>>();
  s.knots_v.knots = j.at("knotsV").get<std::vector<double>>();
  for (const json& jrow : j.at("ctrl")) {
    std::vector<Vec3> row;
    for (const json& jp : jrow) {
      if (jp.size() != 3) throw DimensionError("surface JSON control points must be 3D");
      row.push_back({jp[0].get<double>(), jp[1].get<double>(), jp[2].get<double>()});
    }
    s.ctrl.push_back(std::move(row));
  }
  s.weights = j.at("weights").get<std::vector<std::vector<double>>>();
  s.validate();
  return s;
}

namespace {

Optimizer optimizer_from_name(const std::string& name) {
  if (name == "adam") return Optimizer::Adam;
  if (name == "plain-gd") return Optimizer::PlainGd;
  throw ConfigError("unknown optimizer: " + name);
}

KnotGradMode knot_grad_from_name(const std::string& name) {
  if (name == "basis-times-knot") return KnotGradMode::BasisTimesKnot;
  if (name == "gaussian") return KnotGradMode::GaussianFactor;
  throw ConfigError("unknown knot-grad mode: " + name);
}

}  // namespace

json fit_config_to_json(const FitConfig& cfg) {
  json j;
  j["learning_rate"] = cfg.learning_rate;
  j["knot_learning_rate"] = cfg.knot_learning_rate;
  j["iterations"] = cfg.iterations;
  j["optimizer"] = cfg.optimizer == Optimizer::Adam ? "adam" : "plain-gd";
  j["beta1"] = cfg.beta1;
  j["beta2"] = cfg.beta2;
  j["eps"] = cfg.eps;
  j["reparameterize_knots"] = cfg.reparameterize_knots;
  j["sigma"] = cfg.sigma;
  j["knot_grad"] = cfg.knot_grad == KnotGradMode::BasisTimesKnot ? "basis-times-knot" : "gaussian";
  j["knot_margin"] = cfg.knot_margin;
  j["laplacian_weight"] = cfg.laplacian_weight;
  j["seed"] = cfg.seed;
  return j;
}

FitConfig fit_config_from_json(const json& j) {
  FitConfig cfg;
  if (j.contains("learning_rate")) cfg.learning_rate = j["learning_rate"].get<double>();
  if (j.contains("knot_learning_rate")) {
    cfg.knot_learning_rate = j["knot_learning_rate"].get<double>();
  }
  if (j.contains("iterations")) cfg.iterations = j["iterations"].get<int>();
  if (j.contains("optimizer")) cfg.optimizer = optimizer_from_name(j["optimizer"].get<std::string>());
  if (j.contains("beta1")) cfg.beta1 = j["beta1"].get<double>();
  if (j.contains("beta2")) cfg.beta2 = j["beta2"].get<double>();
  if (j.contains("eps")) cfg.eps = j["eps"].get<double>();
  if (j.contains("reparameterize_knots")) {
    cfg.reparameterize_knots = j["reparameterize_knots"].get<bool>();
  }
  if (j.contains("sigma")) cfg.sigma = j["sigma"].get<double>();
  if (j.contains("knot_grad")) cfg.knot_grad = knot_grad_from_name(j["knot_grad"].get<std::string>());
  if (j.contains("knot_margin")) cfg.knot_margin = j["knot_margin"].get<double>();
  if (j.contains("laplacian_weight")) cfg.laplacian_weight = j["laplacian_weight"].get<double>();
  if (j.contains("seed")) cfg.seed = j["seed"].get<std::uint64_t>();
  cfg.validate();
  return cfg;
}

json fit_report_to_json(const FitReport& report, int history_every) {
  if (history_every < 1) throw ConfigError("history stride must be >= 1");
  json j;
  j["final_mse"] = report.final_mse;
  json history = json::array();
  for (std::size_t i = 0; i < report.loss_history.size(); ++i) {
    if (i % static_cast<std::size_t>(history_every) == 0 ||
        i + 1 == report.loss_history.size()) {
      history.push_back({{"iteration", i}, {"loss", report.loss_history[i]}});
    }
  }
  j["loss_history"] = std::move(history);
  j["surface"] = surface_to_json(report.surface);
  return j;
}

json piecewise_fit_to_json(const PiecewiseFit& fit) {
  json j;
  j["n"] = fit.partition.n;
  j["k"] = fit.partition.piece_count();
  j["d"] = fit.degree;
  j["breaks"] = fit.partition.cuts;
  j["coeffs"] = fit.coeffs;
  j["cost"] = fit.cost;
  return j;
}

}  // namespace splinegrad
