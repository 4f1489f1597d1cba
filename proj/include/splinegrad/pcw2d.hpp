#pragma once

#include <cstddef>
#include <vector>

#include "splinegrad/grid.hpp"

namespace splinegrad {

/// Connected-component labeling of a grid. Label ids are contiguous 0..k-1 in
/// row-major first-visit order; sizes[i] is the pixel count of component i.
struct LabelGrid {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<int> labels;
  std::vector<std::size_t> sizes;

  int component_count() const { return static_cast<int>(sizes.size()); }
  int label(std::size_t r, std::size_t c) const { return labels[r * cols + c]; }
};

/// Binarizes at `threshold` (value > threshold) and labels 4-connected regions
/// of equal binary value by union-find. Both classes form components.
LabelGrid connected_components(const Grid& image, double threshold);

/// Per-pixel output = mean of the input over the pixel's component.
Grid pcw2d_forward(const Grid& image, const LabelGrid& labels);

/// J^T v for the component-mean map: per-pixel output = mean of `upstream`
/// over the pixel's component (the block is symmetric and 1/|I| valued).
Grid pcw2d_vjp(const LabelGrid& labels, const Grid& upstream);

}  // namespace splinegrad
