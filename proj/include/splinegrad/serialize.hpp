#pragma once

#include "json.hpp"

#include "splinegrad/fitloop.hpp"
#include "splinegrad/nurbs.hpp"
#include "splinegrad/piecewise1d.hpp"

namespace splinegrad {

using json = nlohmann::json;

// Surface JSON: {degreeU, degreeV, knotsU[], knotsV[], ctrl[[[x,y,z]...]],
// weights[[...]]}.
json surface_to_json(const NurbsSurface& surface);
NurbsSurface surface_from_json(const json& j);

json fit_config_to_json(const FitConfig& cfg);
FitConfig fit_config_from_json(const json& j);

/// Report JSON keeps the fitted surface, the (optionally strided) loss
/// history and the final MSE. Wall-clock time is deliberately left out so
/// reruns with the same seed are byte-identical.
json fit_report_to_json(const FitReport& report, int history_every = 1);

/// 1D fit JSON: {n, k, d, breaks, coeffs, cost}.
json piecewise_fit_to_json(const PiecewiseFit& fit);

}  // namespace splinegrad
