#include "splinegrad/piecewise1d.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "splinegrad/parallel.hpp"

namespace splinegrad {

std::pair<std::size_t, std::size_t> IntervalPartition::piece(std::size_t j) const {
  const std::size_t begin = (j == 0) ? 0 : cuts[j - 1];
  const std::size_t end = (j + 1 == piece_count()) ? n : cuts[j];
  return {begin, end};
}

void IntervalPartition::validate() const {
  if (n == 0) throw DomainError("partition over an empty index range");
  std::size_t prev = 0;
  for (std::size_t c : cuts) {
    if (c <= prev || c >= n) throw DomainError("partition cuts must be strictly increasing in [1, n-1]");
    prev = c;
  }
}

std::vector<double> local_coords(std::size_t len) {
  std::vector<double> t(len, 0.0);
  if (len > 1) {
    for (std::size_t i = 0; i < len; ++i) {
      t[i] = -1.0 + 2.0 * static_cast<double>(i) / static_cast<double>(len - 1);
    }
  }
  return t;
}

namespace {

Eigen::MatrixXd vandermonde(const std::vector<double>& t, int degree) {
  Eigen::MatrixXd v(t.size(), degree + 1);
  for (std::size_t r = 0; r < t.size(); ++r) {
    double pw = 1.0;
    for (int p = 0; p <= degree; ++p) {
      v(r, p) = pw;
      pw *= t[r];
    }
  }
  return v;
}

// Incremental interval-cost engine for the DP sweep. For a fixed right end i
// it absorbs samples leftwards, maintaining power sums of the offset u = t - i
// so each extension is O(d) and each cost query O(d^3) on a (d+1) system.
// The normal equations are rescaled to [-2, 0] coordinates before solving.
class IntervalCostSweep {
 public:
  explicit IntervalCostSweep(int degree)
      : degree_(degree), pow_sums_(2 * degree + 1, 0.0), mom_sums_(degree + 1, 0.0) {
    gram_.resize(degree + 1, degree + 1);
    rhs_.resize(degree + 1);
  }

  void reset() {
    std::fill(pow_sums_.begin(), pow_sums_.end(), 0.0);
    std::fill(mom_sums_.begin(), mom_sums_.end(), 0.0);
    sq_sum_ = 0.0;
    len_ = 0;
  }

  void add_left(double u, double x) {
    double pw = 1.0;
    for (std::size_t p = 0; p < pow_sums_.size(); ++p) {
      pow_sums_[p] += pw;
      if (p < mom_sums_.size()) mom_sums_[p] += pw * x;
      pw *= u;
    }
    sq_sum_ += x * x;
    ++len_;
  }

  std::size_t length() const { return len_; }

  double cost() {
    if (degree_ == 0) {
      const double c = sq_sum_ - mom_sums_[0] * mom_sums_[0] / pow_sums_[0];
      return std::max(c, 0.0);
    }
    const double scale = (len_ > 1) ? 2.0 / static_cast<double>(len_ - 1) : 1.0;
    double si = 1.0;
    std::vector<double> spow(pow_sums_.size());
    for (std::size_t p = 0; p < spow.size(); ++p) {
      spow[p] = si;
      si *= scale;
    }
    for (int r = 0; r <= degree_; ++r) {
      rhs_(r) = mom_sums_[r] * spow[r];
      for (int c = 0; c <= degree_; ++c) gram_(r, c) = pow_sums_[r + c] * spow[r + c];
    }
    const Eigen::VectorXd beta = gram_.ldlt().solve(rhs_);
    return std::max(sq_sum_ - beta.dot(rhs_), 0.0);
  }

 private:
  int degree_;
  std::vector<double> pow_sums_;  // sum of u^p, p = 0..2d
  std::vector<double> mom_sums_;  // sum of u^p * x, p = 0..d
  double sq_sum_ = 0.0;
  std::size_t len_ = 0;
  Eigen::MatrixXd gram_;
  Eigen::VectorXd rhs_;
};

}  // namespace

std::vector<double> polyfit_interval(const std::vector<double>& x, std::size_t begin,
                                     std::size_t end, int degree) {
  if (degree < 0) throw InfeasibleError("degree must be non-negative");
  if (end > x.size() || begin >= end) throw DimensionError("interval out of range");
  const std::size_t len = end - begin;
  if (len < static_cast<std::size_t>(degree) + 1) {
    throw InfeasibleError("interval of size " + std::to_string(len) +
                          " is underdetermined for degree " + std::to_string(degree));
  }
  const std::vector<double> t = local_coords(len);
  const Eigen::MatrixXd v = vandermonde(t, degree);
  Eigen::VectorXd xi(len);
  for (std::size_t i = 0; i < len; ++i) xi(i) = x[begin + i];
  // Normal equations; V^T V is nonsingular for distinct nodes on [-1, 1].
  const Eigen::VectorXd alpha = (v.transpose() * v).ldlt().solve(v.transpose() * xi);
  return {alpha.data(), alpha.data() + alpha.size()};
}

PiecewiseFit fit_with_partition(const std::vector<double>& x, const IntervalPartition& partition,
                                int degree) {
  partition.validate();
  if (partition.n != x.size()) throw DimensionError("partition does not match signal length");
  PiecewiseFit fit;
  fit.partition = partition;
  fit.degree = degree;
  fit.coeffs.resize(partition.piece_count());
  fit.fitted.assign(x.size(), 0.0);
  for (std::size_t j = 0; j < partition.piece_count(); ++j) {
    const auto [begin, end] = partition.piece(j);
    fit.coeffs[j] = polyfit_interval(x, begin, end, degree);
    const std::vector<double> t = local_coords(end - begin);
    for (std::size_t i = begin; i < end; ++i) {
      double value = 0.0;
      double pw = 1.0;
      for (int p = 0; p <= degree; ++p) {
        value += fit.coeffs[j][p] * pw;
        pw *= t[i - begin];
      }
      fit.fitted[i] = value;
    }
  }
  double cost = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double r = x[i] - fit.fitted[i];
    cost += r * r;
  }
  fit.cost = cost;
  return fit;
}

PiecewiseFit fit_kpiecewise(const std::vector<double>& x, std::size_t k, int degree) {
  const std::size_t n = x.size();
  if (degree < 0) throw InfeasibleError("degree must be non-negative");
  if (k < 1 || k > n) throw InfeasibleError("piece count k must satisfy 1 <= k <= n");
  const std::size_t min_piece = static_cast<std::size_t>(degree) + 1;
  if (k * min_piece > n) {
    throw InfeasibleError("no partition into " + std::to_string(k) + " pieces of >= " +
                          std::to_string(min_piece) + " samples covers n = " + std::to_string(n));
  }

  const double inf = std::numeric_limits<double>::infinity();
  // best[j][i]: optimal cost of the first i samples in j pieces (1-based i).
  std::vector<std::vector<double>> best(k + 1, std::vector<double>(n + 1, inf));
  std::vector<std::vector<std::size_t>> last_start(k + 1, std::vector<std::size_t>(n + 1, 0));
  best[0][0] = 0.0;

  IntervalCostSweep sweep(degree);
  for (std::size_t i = 1; i <= n; ++i) {
    sweep.reset();
    for (std::size_t m = i; m >= 1; --m) {
      sweep.add_left(static_cast<double>(m) - static_cast<double>(i), x[m - 1]);
      if (sweep.length() < min_piece) continue;
      const double c = sweep.cost();
      const std::size_t max_j = std::min<std::size_t>(k, 1 + (m - 1) / min_piece);
      for (std::size_t j = 1; j <= max_j; ++j) {
        if (best[j - 1][m - 1] == inf) continue;
        const double cand = best[j - 1][m - 1] + c;
        // <= keeps the smallest feasible start of the last piece on ties.
        if (cand <= best[j][i]) {
          best[j][i] = cand;
          last_start[j][i] = m;
        }
      }
    }
  }

  IntervalPartition partition;
  partition.n = n;
  partition.cuts.reserve(k - 1);
  std::size_t i = n;
  for (std::size_t j = k; j >= 1; --j) {
    const std::size_t m = last_start[j][i];
    if (j > 1) partition.cuts.push_back(m - 1);
    i = m - 1;
  }
  std::reverse(partition.cuts.begin(), partition.cuts.end());
  return fit_with_partition(x, partition, degree);
}

BlockSparseJacobian jacobian(const PiecewiseFit& fit) {
  BlockSparseJacobian jac;
  jac.partition = fit.partition;
  jac.degree = fit.degree;
  if (fit.degree == 0) return jac;
  jac.blocks.resize(fit.partition.piece_count());
  for (std::size_t j = 0; j < jac.blocks.size(); ++j) {
    const auto [begin, end] = fit.partition.piece(j);
    const Eigen::MatrixXd v = vandermonde(local_coords(end - begin), fit.degree);
    jac.blocks[j].vandermonde = v;
    jac.blocks[j].solve = (v.transpose() * v).ldlt().solve(v.transpose());
  }
  return jac;
}

std::vector<double> vjp(const BlockSparseJacobian& jac, const std::vector<double>& v) {
  const std::size_t n = jac.partition.n;
  if (v.size() != n) throw DimensionError("vjp vector length does not match fit length");
  std::vector<double> out(n, 0.0);
  const std::size_t pieces = jac.partition.piece_count();
  parallel_chunks(pieces, [&](int, std::size_t lo, std::size_t hi) {
    for (std::size_t j = lo; j < hi; ++j) {
      const auto [begin, end] = jac.partition.piece(j);
      const std::size_t len = end - begin;
      if (jac.degree == 0) {
        double s = 0.0;
        for (std::size_t i = begin; i < end; ++i) s += v[i];
        const double mean = s / static_cast<double>(len);
        for (std::size_t i = begin; i < end; ++i) out[i] = mean;
      } else {
        // J^T v on block H = V M: H^T v = M^T (V^T v).
        const auto& f = jac.blocks[j];
        Eigen::VectorXd vi(len);
        for (std::size_t i = 0; i < len; ++i) vi(i) = v[begin + i];
        const Eigen::VectorXd y = f.vandermonde.transpose() * vi;
        const Eigen::VectorXd o = f.solve.transpose() * y;
        for (std::size_t i = 0; i < len; ++i) out[begin + i] = o(i);
      }
    }
  });
  return out;
}

}  // namespace splinegrad
