#pragma once

#include <string>
#include <vector>

#include "splinegrad/grid.hpp"

namespace splinegrad {

// Text grid format: first line "rows cols", then row-major reals (one grid
// row per line), written with 17 significant digits so round trips are exact.

Grid read_grid(const std::string& path);
void write_grid(const std::string& path, const Grid& grid);

// Point grids are stored as three scalar grids <prefix>_x.txt, _y.txt, _z.txt.
PointGrid read_point_grid(const std::string& prefix);
void write_point_grid(const std::string& prefix, const PointGrid& grid);

// 1D signals: one real per line, no header.
std::vector<double> read_signal_csv(const std::string& path);
void write_signal_csv(const std::string& path, const std::vector<double>& values);

/// Writes to a temporary sibling file and renames it into place, so an
/// interrupted run never leaves a truncated output.
void atomic_write_text(const std::string& path, const std::string& content);

std::string format_real(double v);

}  // namespace splinegrad
