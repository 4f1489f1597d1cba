#include "splinegrad/io.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace splinegrad {

std::string format_real(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void atomic_write_text(const std::string& path, const std::string& content) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open for writing: " + tmp);
    out << content;
    if (!out) throw std::runtime_error("write failed: " + tmp);
  }
  std::filesystem::rename(tmp, path);
}

Grid read_grid(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open grid file: " + path);
  std::size_t rows = 0, cols = 0;
  if (!(in >> rows >> cols)) throw std::runtime_error("bad grid header in " + path);
  if (rows == 0 || cols == 0) throw DimensionError("empty grid in " + path);
  Grid g(rows, cols);
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (!(in >> g.data[i])) throw std::runtime_error("truncated grid data in " + path);
  }
  return g;
}

void write_grid(const std::string& path, const Grid& grid) {
  std::ostringstream out;
  out << grid.rows << ' ' << grid.cols << '\n';
  for (std::size_t r = 0; r < grid.rows; ++r) {
    for (std::size_t c = 0; c < grid.cols; ++c) {
      if (c) out << ' ';
      out << format_real(grid(r, c));
    }
    out << '\n';
  }
  atomic_write_text(path, out.str());
}

namespace {
const char* kAxisSuffix[3] = {"_x.txt", "_y.txt", "_z.txt"};
}

PointGrid read_point_grid(const std::string& prefix) {
  Grid axes[3];
  for (int a = 0; a < 3; ++a) axes[a] = read_grid(prefix + kAxisSuffix[a]);
  if (!axes[0].same_shape(axes[1]) || !axes[0].same_shape(axes[2])) {
    throw DimensionError("point grid components disagree in shape: " + prefix);
  }
  PointGrid g(axes[0].rows, axes[0].cols);
  for (std::size_t i = 0; i < g.size(); ++i) {
    g.data[i] = {axes[0].data[i], axes[1].data[i], axes[2].data[i]};
  }
  return g;
}

void write_point_grid(const std::string& prefix, const PointGrid& grid) {
  for (int a = 0; a < 3; ++a) {
    Grid axis(grid.rows, grid.cols);
    for (std::size_t i = 0; i < grid.size(); ++i) axis.data[i] = grid.data[i][a];
    write_grid(prefix + kAxisSuffix[a], axis);
  }
}

std::vector<double> read_signal_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open signal file: " + path);
  std::vector<double> values;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    values.push_back(std::stod(line));
  }
  return values;
}

void write_signal_csv(const std::string& path, const std::vector<double>& values) {
  std::ostringstream out;
  for (double v : values) out << format_real(v) << '\n';
  atomic_write_text(path, out.str());
}

}  // namespace splinegrad
