#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <utility>
#include <vector>

#include "splinegrad/errors.hpp"

namespace splinegrad {

/// Partition of sample indices 1..n into contiguous, nonempty pieces.
/// `cuts` holds the 1-based position of the last index of each piece except
/// the final one, strictly increasing within [1, n-1]. k pieces <=> k-1 cuts.
struct IntervalPartition {
  std::size_t n = 0;
  std::vector<std::size_t> cuts;

  std::size_t piece_count() const { return cuts.size() + 1; }
  /// Half-open 0-based index range [begin, end) of piece j.
  std::pair<std::size_t, std::size_t> piece(std::size_t j) const;
  void validate() const;
};

/// Result of an exact k-piece degree-d least-squares fit. Coefficients are in
/// the monomial basis of the per-piece local coordinate (indices mapped
/// affinely onto [-1, 1]; a single-sample piece uses coordinate 0).
struct PiecewiseFit {
  IntervalPartition partition;
  int degree = 0;
  std::vector<std::vector<double>> coeffs;  // piece_count x (degree+1)
  std::vector<double> fitted;               // length n
  double cost = 0.0;                        // sum of squared residuals at build time
};

/// Factored block-diagonal weak Jacobian of a piecewise fit. For degree 0 the
/// implied block is constant 1/|I|, so only piece sizes are kept; for
/// degree >= 1 each block is the hat matrix V (V^T V)^{-1} V^T, stored as the
/// pair (V, M) with M = (V^T V)^{-1} V^T.
struct BlockSparseJacobian {
  struct Factors {
    Eigen::MatrixXd vandermonde;  // |I| x (d+1)
    Eigen::MatrixXd solve;        // (d+1) x |I|
  };

  IntervalPartition partition;
  int degree = 0;
  std::vector<Factors> blocks;  // empty when degree == 0
};

/// Local coordinates of a piece of the given length: affine map onto [-1, 1],
/// or {0} for a single sample.
std::vector<double> local_coords(std::size_t len);

/// Least-squares monomial coefficients of degree d over x[begin, end).
/// Throws InfeasibleError when the piece has fewer than d+1 samples.
std::vector<double> polyfit_interval(const std::vector<double>& x, std::size_t begin,
                                     std::size_t end, int degree);

/// Exact minimum-cost fit over all partitions into k contiguous pieces of at
/// least d+1 samples each, by dynamic programming. Throws InfeasibleError when
/// k > n or k*(d+1) > n.
PiecewiseFit fit_kpiecewise(const std::vector<double>& x, std::size_t k, int degree);

/// Least-squares fit with the partition held fixed (the smooth branch of the
/// piecewise map; this is what the weak Jacobian differentiates).
PiecewiseFit fit_with_partition(const std::vector<double>& x, const IntervalPartition& partition,
                                int degree);

BlockSparseJacobian jacobian(const PiecewiseFit& fit);

/// J^T v from the block factors, O(n*(d+1)) time, no dense blocks formed.
std::vector<double> vjp(const BlockSparseJacobian& jac, const std::vector<double>& v);

}  // namespace splinegrad
