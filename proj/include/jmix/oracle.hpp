#pragma once

// Independent numerical evidence for (non-)mixability: midpoint quantile
// discretization, the rearrangement algorithm (RA), exhaustive search on
// tiny grids, and empirical checks of claimed joint centers.

#include "jmix/batch.hpp"
#include "jmix/distributions.hpp"
#include "jmix/numerics.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <functional>
#include <numeric>
#include <random>
#include <stdexcept>
#include <vector>

namespace jmix {

/// m x n matrix; column j holds quantile(F_j, (k - 1/2)/m), k = 1..m.
struct QuantileGrid {
  Eigen::MatrixXd values;

  int m() const { return static_cast<int>(values.rows()); }
  int n() const { return static_cast<int>(values.cols()); }
};

inline QuantileGrid discretize(const std::vector<UnivariateFamily>& families, int m) {
  if (m < 2) {
    throw domain_error("discretize requires m >= 2");
  }
  if (families.empty()) {
    throw domain_error("discretize requires at least one family");
  }
  QuantileGrid grid{Eigen::MatrixXd(m, static_cast<Eigen::Index>(families.size()))};
  for (std::size_t j = 0; j < families.size(); ++j) {
    for (int k = 0; k < m; ++k) {
      const double q = quantile(families[j], (k + 0.5) / m);
      if (!std::isfinite(q)) {
        throw domain_error("non-finite quantile in discretization");
      }
      grid.values(k, static_cast<Eigen::Index>(j)) = q;
    }
  }
  return grid;
}

/// permutations[j][row] is the atom index (row of the grid) placed in `row`
/// of column j.
using Arrangement = std::vector<std::vector<int>>;

inline Eigen::VectorXd arranged_row_sums(const QuantileGrid& grid, const Arrangement& perms) {
  Eigen::VectorXd sums = Eigen::VectorXd::Zero(grid.m());
  for (int j = 0; j < grid.n(); ++j) {
    for (int k = 0; k < grid.m(); ++k) {
      sums(k) += grid.values(perms[j][k], j);
    }
  }
  return sums;
}

inline double population_variance(const Eigen::VectorXd& v) {
  const double mean = v.mean();
  return (v.array() - mean).square().mean();
}

inline double spread_of(const Eigen::VectorXd& v) { return v.maxCoeff() - v.minCoeff(); }

struct RaOptions {
  int max_sweeps = 500;
  double tol = 1e-12;
  int restarts = 10;
  std::uint64_t seed = 0;
};

struct RearrangementResult {
  Arrangement permutations;
  double row_sum_spread = 0.0;
  double row_sum_stddev = 0.0;
  int iterations = 0;
  bool converged = false;
  int restarts = 1;
  /// Row-sum variance before the first sweep and after every sweep.
  std::vector<double> variance_trajectory;
  /// Largest per-sweep variance increase over every run (<= 0 when monotone).
  double max_variance_increase = 0.0;
};

/// One RA run from a given starting arrangement. Each column is re-sorted
/// oppositely to the sum of the other columns; a column move is kept only
/// when it lowers the row-sum variance.
inline RearrangementResult ra_single(const QuantileGrid& grid, Arrangement perms,
                                     int max_sweeps, double tol) {
  const int m = grid.m();
  const int n = grid.n();
  RearrangementResult res;
  Eigen::VectorXd sums = arranged_row_sums(grid, perms);
  double var = population_variance(sums);
  res.variance_trajectory.push_back(var);

  std::vector<int> order(m);
  std::vector<int> candidate(m);
  Eigen::VectorXd others(m);
  Eigen::VectorXd cand_sums(m);

  for (int sweep = 0; sweep < max_sweeps; ++sweep) {
    bool changed = false;
    const double var_before = var;
    for (int j = 0; j < n; ++j) {
      for (int k = 0; k < m; ++k) {
        double s = 0.0;
        for (int l = 0; l < n; ++l) {
          if (l != j) s += grid.values(perms[l][k], l);
        }
        others(k) = s;
      }
      std::iota(order.begin(), order.end(), 0);
      std::stable_sort(order.begin(), order.end(),
                       [&others](int a, int b) { return others(a) > others(b); });
      // Column atoms are nondecreasing, so atom t goes to the row with the
      // t-th largest partial sum.
      for (int t = 0; t < m; ++t) {
        candidate[order[t]] = t;
      }
      bool same = true;
      for (int k = 0; k < m; ++k) {
        if (grid.values(candidate[k], j) != grid.values(perms[j][k], j)) {
          same = false;
          break;
        }
      }
      if (same) continue;
      for (int k = 0; k < m; ++k) {
        cand_sums(k) = others(k) + grid.values(candidate[k], j);
      }
      const double cand_var = population_variance(cand_sums);
      if (cand_var < var) {
        perms[j] = candidate;
        sums = cand_sums;
        var = cand_var;
        changed = true;
      }
    }
    res.iterations = sweep + 1;
    res.variance_trajectory.push_back(var);
    if (var > var_before) {
      res.max_variance_increase = std::max(res.max_variance_increase, var - var_before);
    }
    if (!changed || var_before - var < tol) {
      res.converged = true;
      break;
    }
  }
  res.permutations = std::move(perms);
  // Recomputed in arranged_row_sums order so the stored arrangement
  // reproduces these figures bit for bit.
  sums = arranged_row_sums(grid, res.permutations);
  res.row_sum_spread = spread_of(sums);
  res.row_sum_stddev = std::sqrt(population_variance(sums));
  return res;
}

/// RA with restarts: run 0 starts comonotone, run r > 0 from columns shuffled
/// with an engine seeded seed + r. The best run has minimal spread; ties go to
/// the lexicographically smallest arrangement.
inline RearrangementResult ra_minimize(const QuantileGrid& grid, const RaOptions& opt = {}) {
  if (grid.m() < 2 || grid.n() < 2) {
    throw domain_error("ra_minimize requires m >= 2 and n >= 2");
  }
  const int restarts = std::max(1, opt.restarts);
  RearrangementResult best;
  double worst_increase = 0.0;
  for (int r = 0; r < restarts; ++r) {
    Arrangement start(grid.n(), std::vector<int>(grid.m()));
    for (auto& col : start) {
      std::iota(col.begin(), col.end(), 0);
    }
    if (r > 0) {
      Engine rng(chunk_seed(opt.seed, static_cast<std::uint64_t>(r)));
      for (auto& col : start) {
        std::shuffle(col.begin(), col.end(), rng);
      }
    }
    auto run = ra_single(grid, std::move(start), opt.max_sweeps, opt.tol);
    worst_increase = std::max(worst_increase, run.max_variance_increase);
    if (r == 0 || run.row_sum_spread < best.row_sum_spread ||
        (run.row_sum_spread == best.row_sum_spread && run.permutations < best.permutations)) {
      best = std::move(run);
    }
  }
  best.restarts = restarts;
  best.max_variance_increase = worst_increase;
  return best;
}

struct BruteForceResult {
  double spread = 0.0;
  Arrangement permutations;
};

namespace detail {

/// Pairs the last column oppositely to the partial sums. For a fixed set of
/// partial sums this ordering attains both the smallest possible maximum and
/// the largest possible minimum row sum, so it minimizes the spread exactly.
inline std::vector<int> antithetic_last_column(const Eigen::VectorXd& partial) {
  const auto m = static_cast<int>(partial.size());
  std::vector<int> order(m);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&partial](int a, int b) { return partial(a) > partial(b); });
  std::vector<int> col(m);
  for (int t = 0; t < m; ++t) {
    col[order[t]] = t;
  }
  return col;
}

} // namespace detail

/// Global minimum of the row-sum spread over all column arrangements with the
/// first column fixed. Middle columns are enumerated; the last one is placed
/// optimally in closed form. Limited to m <= 8, n <= 3.
inline BruteForceResult brute_force_min_spread(const QuantileGrid& grid) {
  const int m = grid.m();
  const int n = grid.n();
  if (m > 8 || n > 3) {
    throw domain_error("brute force limited to m <= 8 and n <= 3");
  }
  if (m < 1 || n < 2) {
    throw domain_error("brute force requires n >= 2");
  }
  std::vector<int> identity(m);
  std::iota(identity.begin(), identity.end(), 0);

  BruteForceResult best;
  bool have = false;
  std::vector<int> middle = identity;
  do {
    Arrangement perms;
    perms.push_back(identity);
    if (n == 3) perms.push_back(middle);
    Eigen::VectorXd partial = Eigen::VectorXd::Zero(m);
    for (std::size_t j = 0; j < perms.size(); ++j) {
      for (int k = 0; k < m; ++k) partial(k) += grid.values(perms[j][k], static_cast<int>(j));
    }
    perms.push_back(detail::antithetic_last_column(partial));
    const double spread = spread_of(arranged_row_sums(grid, perms));
    if (!have || spread < best.spread) {
      best.spread = spread;
      best.permutations = std::move(perms);
      have = true;
    }
  } while (n == 3 && std::next_permutation(middle.begin(), middle.end()));
  return best;
}

struct ConstantSumReport {
  std::size_t rows = 0;
  double center = 0.0;
  double max_abs_deviation = 0.0;
  /// Sum over columns of IQR / 1.349, a robust per-variable scale.
  double scale = 0.0;
  double tolerance = 0.0;
  bool pass = false;
  /// max over t in {-2,-1,1,2} of |mean exp(i t S) - exp(i t C)|.
  double cf_deviation = 0.0;
};

namespace detail {

inline double robust_scale(std::vector<double> column) {
  if (column.size() < 2) return 0.0;
  std::sort(column.begin(), column.end());
  auto at = [&column](double p) {
    const double pos = p * static_cast<double>(column.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const auto hi = std::min(lo + 1, column.size() - 1);
    return column[lo] + (pos - static_cast<double>(lo)) * (column[hi] - column[lo]);
  };
  return (at(0.75) - at(0.25)) / 1.349;
}

} // namespace detail

/// Checks P(X_1 + ... + X_n = C) = 1 empirically. Passes when every row sum
/// is within rel_tol * (1 + |C| + scale) of C.
inline ConstantSumReport verify_constant_sum(const Eigen::MatrixXd& draws, double center,
                                             double rel_tol) {
  if (draws.rows() == 0 || draws.cols() == 0) {
    throw domain_error("verify_constant_sum requires a nonempty batch");
  }
  ConstantSumReport rep;
  rep.rows = static_cast<std::size_t>(draws.rows());
  rep.center = center;
  for (Eigen::Index j = 0; j < draws.cols(); ++j) {
    std::vector<double> col(draws.rows());
    for (Eigen::Index i = 0; i < draws.rows(); ++i) col[i] = draws(i, j);
    rep.scale += detail::robust_scale(std::move(col));
  }
  const Eigen::VectorXd sums = draws.rowwise().sum();
  for (Eigen::Index i = 0; i < sums.size(); ++i) {
    rep.max_abs_deviation = std::max(rep.max_abs_deviation, std::abs(sums(i) - center));
  }
  if (!sums.allFinite()) {
    rep.max_abs_deviation = kInf;
  }
  rep.tolerance = rel_tol * (1.0 + std::abs(center) + rep.scale);
  rep.pass = rep.max_abs_deviation <= rep.tolerance;
  for (double t : {-2.0, -1.0, 1.0, 2.0}) {
    std::complex<double> acc(0.0, 0.0);
    for (Eigen::Index i = 0; i < sums.size(); ++i) {
      acc += std::polar(1.0, t * sums(i));
    }
    acc /= static_cast<double>(sums.size());
    rep.cf_deviation = std::max(rep.cf_deviation, std::abs(acc - std::polar(1.0, t * center)));
  }
  return rep;
}

inline ConstantSumReport verify_constant_sum(const SampleBatch& batch, double center,
                                             double rel_tol) {
  return verify_constant_sum(batch.draws, center, rel_tol);
}

struct TransformReport {
  double target = 0.0;
  double max_rel_deviation = 0.0;
  bool pass = false;
};

/// Applies f to each row sum and checks it equals K = f(C) within rel_tol.
inline TransformReport verify_transformed_sum(const SampleBatch& batch,
                                              const std::function<double(double)>& f,
                                              double center, double rel_tol) {
  TransformReport rep;
  rep.target = f(center);
  const double denom = std::max(1.0, std::abs(rep.target));
  const Eigen::VectorXd sums = batch.row_sums();
  for (Eigen::Index i = 0; i < sums.size(); ++i) {
    rep.max_rel_deviation =
        std::max(rep.max_rel_deviation, std::abs(f(sums(i)) - rep.target) / denom);
  }
  rep.pass = rep.max_rel_deviation <= rel_tol;
  return rep;
}

/// Largest Euclidean norm of X e over the draws of a matrix batch.
inline double max_column_sum_norm(const MatrixBatch& batch) {
  double worst = 0.0;
  for (const auto& x : batch.draws) {
    worst = std::max(worst, x.rowwise().sum().norm());
  }
  return worst;
}

} // namespace jmix
