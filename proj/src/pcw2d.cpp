#include "splinegrad/pcw2d.hpp"

#include <cmath>
#include <numeric>

namespace splinegrad {

namespace {

struct UnionFind {
  std::vector<std::size_t> parent;

  explicit UnionFind(std::size_t n) : parent(n) {
    std::iota(parent.begin(), parent.end(), std::size_t{0});
  }
  std::size_t find(std::size_t a) {
    while (parent[a] != a) {
      parent[a] = parent[parent[a]];
      a = parent[a];
    }
    return a;
  }
  void unite(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a != b) parent[std::max(a, b)] = std::min(a, b);
  }
};

// Means are accumulated relative to the component's first pixel, so a
// component that is already constant sums residuals of exactly zero and the
// map is idempotent bit-for-bit.
Grid component_means(const LabelGrid& labels, const Grid& values) {
  const std::size_t k = labels.sizes.size();
  std::vector<double> anchor(k, 0.0), residual(k, 0.0);
  std::vector<char> seen(k, 0);
  for (std::size_t i = 0; i < values.size(); ++i) {
    const int l = labels.labels[i];
    if (!seen[l]) {
      seen[l] = 1;
      anchor[l] = values.data[i];
    }
    residual[l] += values.data[i] - anchor[l];
  }
  Grid out(values.rows, values.cols);
  for (std::size_t i = 0; i < values.size(); ++i) {
    const int l = labels.labels[i];
    out.data[i] = anchor[l] + residual[l] / static_cast<double>(labels.sizes[l]);
  }
  return out;
}

}  // namespace

LabelGrid connected_components(const Grid& image, double threshold) {
  if (image.rows == 0 || image.cols == 0) throw DimensionError("connected_components: empty grid");
  for (double v : image.data) {
    if (!std::isfinite(v)) throw NumericError("connected_components: non-finite pixel");
  }
  const std::size_t rows = image.rows, cols = image.cols;
  std::vector<char> binary(image.size());
  for (std::size_t i = 0; i < image.size(); ++i) binary[i] = image.data[i] > threshold ? 1 : 0;

  UnionFind uf(image.size());
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < cols; ++c) {
      const std::size_t i = r * cols + c;
      if (c > 0 && binary[i] == binary[i - 1]) uf.unite(i, i - 1);
      if (r > 0 && binary[i] == binary[i - cols]) uf.unite(i, i - cols);
    }
  }

  LabelGrid out;
  out.rows = rows;
  out.cols = cols;
  out.labels.assign(image.size(), -1);
  std::vector<int> root_label(image.size(), -1);
  for (std::size_t i = 0; i < image.size(); ++i) {
    const std::size_t root = uf.find(i);
    if (root_label[root] < 0) {
      root_label[root] = out.component_count();
      out.sizes.push_back(0);
    }
    out.labels[i] = root_label[root];
    ++out.sizes[root_label[root]];
  }
  return out;
}

Grid pcw2d_forward(const Grid& image, const LabelGrid& labels) {
  if (image.rows != labels.rows || image.cols != labels.cols) {
    throw DimensionError("pcw2d_forward: image and labels disagree in shape");
  }
  return component_means(labels, image);
}

Grid pcw2d_vjp(const LabelGrid& labels, const Grid& upstream) {
  if (upstream.rows != labels.rows || upstream.cols != labels.cols) {
    throw DimensionError("pcw2d_vjp: upstream and labels disagree in shape");
  }
  return component_means(labels, upstream);
}

}  // namespace splinegrad
