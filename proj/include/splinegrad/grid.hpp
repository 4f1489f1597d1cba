#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <vector>

#include "splinegrad/errors.hpp"

namespace splinegrad {

using Vec3 = std::array<double, 3>;

inline Vec3 operator+(const Vec3& a, const Vec3& b) {
  return {a[0] + b[0], a[1] + b[1], a[2] + b[2]};
}
inline Vec3 operator-(const Vec3& a, const Vec3& b) {
  return {a[0] - b[0], a[1] - b[1], a[2] - b[2]};
}
inline Vec3 operator*(double s, const Vec3& a) { return {s * a[0], s * a[1], s * a[2]}; }
inline Vec3& operator+=(Vec3& a, const Vec3& b) {
  a[0] += b[0];
  a[1] += b[1];
  a[2] += b[2];
  return a;
}
inline double dot(const Vec3& a, const Vec3& b) {
  return a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
}
inline double norm(const Vec3& a) { return std::sqrt(dot(a, a)); }

/// Dense row-major scalar grid.
struct Grid {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;

  Grid() = default;
  Grid(std::size_t r, std::size_t c, double fill = 0.0) : rows(r), cols(c), data(r * c, fill) {}

  double& operator()(std::size_t r, std::size_t c) { return data[r * cols + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data[r * cols + c]; }
  std::size_t size() const { return data.size(); }
  bool same_shape(const Grid& other) const { return rows == other.rows && cols == other.cols; }
};

/// Dense row-major grid of 3D points.
struct PointGrid {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<Vec3> data;

  PointGrid() = default;
  PointGrid(std::size_t r, std::size_t c, Vec3 fill = {0.0, 0.0, 0.0})
      : rows(r), cols(c), data(r * c, fill) {}

  Vec3& operator()(std::size_t r, std::size_t c) { return data[r * cols + c]; }
  const Vec3& operator()(std::size_t r, std::size_t c) const { return data[r * cols + c]; }
  std::size_t size() const { return data.size(); }
  bool same_shape(const PointGrid& other) const {
    return rows == other.rows && cols == other.cols;
  }
};

}  // namespace splinegrad
