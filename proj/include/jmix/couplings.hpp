#pragma once

// Joint laws with prescribed marginals and almost surely constant sums.
//
// Elliptical marginals E_1(mu_i, sigma_i^2, psi) are coupled through a rank-2
// scatter matrix Sigma_ij = sigma_i sigma_j <v_i, v_j>, where the planar unit
// vectors v_i close the polygon sum_i sigma_i v_i = 0. Such vectors exist
// exactly when sum sigma_i >= 2 max sigma_i, and then e' Sigma e = 0.

#include "jmix/batch.hpp"
#include "jmix/distributions.hpp"
#include "jmix/generators.hpp"
#include "jmix/mixability.hpp"
#include "jmix/oracle.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <numeric>
#include <span>
#include <sstream>
#include <string>
#include <vector>

namespace jmix {

class polygon_inequality_error : public domain_error {
public:
  using domain_error::domain_error;
};

struct PolygonCoupling {
  std::vector<double> sigma;
  std::vector<Eigen::Vector2d> unit_vectors;
  Eigen::MatrixXd scatter;
};

struct EquicorrelationPlan {
  int n = 0;
  double rho = 0.0;
  Eigen::MatrixXd phi;
};

/// Which scalars one joint draw shares across all of its components.
struct SharedMixingPlan {
  std::string base;
  bool generator_mixing = false;
  bool slash_factor = false;
  bool scale_mixture = false;

  std::vector<std::string> shared() const {
    std::vector<std::string> out;
    if (generator_mixing) out.emplace_back("W");
    if (slash_factor) out.emplace_back("U^(-1/q)");
    if (scale_mixture) out.emplace_back("theta");
    return out;
  }
};

namespace detail {

struct SideGroup {
  double length;
  std::vector<int> members;
};

/// Unit vectors u0, u1, u2 with L0 u0 + L1 u1 + L2 u2 = 0.
inline std::array<Eigen::Vector2d, 3> close_triangle(double l0, double l1, double l2) {
  const double c = std::clamp((l2 * l2 - l0 * l0 - l1 * l1) / (2.0 * l0 * l1), -1.0, 1.0);
  const Eigen::Vector2d u0(1.0, 0.0);
  const Eigen::Vector2d u1(c, std::sqrt(std::max(0.0, 1.0 - c * c)));
  Eigen::Vector2d w = -(l0 * u0 + l1 * u1);
  const double norm = w.norm();
  const Eigen::Vector2d u2 = norm > 0.0 ? Eigen::Vector2d(w / norm) : Eigen::Vector2d(-1.0, 0.0);
  return {u0, u1, u2};
}

} // namespace detail

/// Planar unit vectors with sum_i sigma_i v_i = 0. n = 2 is antithetic, n = 3
/// uses the law of cosines, larger n first folds the two shortest sides into
/// one (collinear) side until three remain; each fold keeps the inequality.
inline std::vector<Eigen::Vector2d> polygon_unit_vectors(std::span<const double> sigma) {
  if (!check_scale_inequality(sigma)) {
    std::ostringstream os;
    os.precision(17);
    os << "polygon inequality fails: sum " << detail::scale_sum(sigma) << " < 2*max "
       << detail::scale_twice_max(sigma);
    throw polygon_inequality_error(os.str());
  }
  const auto n = static_cast<int>(sigma.size());
  std::vector<Eigen::Vector2d> v(n);
  if (n == 2) {
    v[0] = Eigen::Vector2d(1.0, 0.0);
    v[1] = Eigen::Vector2d(-1.0, 0.0);
    return v;
  }
  std::vector<detail::SideGroup> groups;
  for (int i = 0; i < n; ++i) {
    groups.push_back({sigma[i], {i}});
  }
  auto shorter = [](const detail::SideGroup& a, const detail::SideGroup& b) {
    return a.length != b.length ? a.length < b.length : a.members.front() < b.members.front();
  };
  while (groups.size() > 3) {
    std::sort(groups.begin(), groups.end(), shorter);
    detail::SideGroup merged{groups[0].length + groups[1].length, groups[0].members};
    merged.members.insert(merged.members.end(), groups[1].members.begin(),
                          groups[1].members.end());
    std::sort(merged.members.begin(), merged.members.end());
    groups.erase(groups.begin(), groups.begin() + 2);
    groups.push_back(std::move(merged));
  }
  std::sort(groups.begin(), groups.end(), [](const auto& a, const auto& b) {
    return a.members.front() < b.members.front();
  });
  const auto dirs = detail::close_triangle(groups[0].length, groups[1].length, groups[2].length);
  for (int g = 0; g < 3; ++g) {
    for (int i : groups[g].members) {
      v[i] = dirs[g];
    }
  }
  return v;
}

inline PolygonCoupling make_polygon_coupling(std::span<const double> sigma) {
  PolygonCoupling pc;
  pc.sigma.assign(sigma.begin(), sigma.end());
  pc.unit_vectors = polygon_unit_vectors(sigma);
  const auto n = static_cast<Eigen::Index>(sigma.size());
  pc.scatter.resize(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      pc.scatter(i, j) = sigma[i] * sigma[j] * pc.unit_vectors[i].dot(pc.unit_vectors[j]);
    }
  }
  return pc;
}

/// Scatter matrix of the polygon coupling: PSD, rank <= 2, diagonal sigma_i^2
/// and zero total entry sum.
inline Eigen::MatrixXd elliptical_jm_covariance(std::span<const double> sigma) {
  return make_polygon_coupling(sigma).scatter;
}

/// Phi = (1 - rho) I + rho e e' with rho = -1/(n - 1); Phi e = 0.
inline EquicorrelationPlan make_equicorrelation(int n) {
  if (n < 2) {
    throw domain_error("equicorrelation plan requires n >= 2");
  }
  EquicorrelationPlan plan;
  plan.n = n;
  plan.rho = -1.0 / (n - 1.0);
  plan.phi = Eigen::MatrixXd::Constant(n, n, plan.rho);
  plan.phi.diagonal().setOnes();
  return plan;
}

/// B with B B' = M from the eigendecomposition. Eigenvalues below
/// -1e-10 trace are rejected; the rest up to 1e-10 trace count as zero and
/// their columns are dropped.
inline Eigen::MatrixXd psd_factor(const Eigen::MatrixXd& M) {
  if (M.rows() != M.cols() || M.rows() == 0) {
    throw domain_error("psd_factor requires a nonempty square matrix");
  }
  if (!M.isApprox(M.transpose(), 1e-12)) {
    throw domain_error("psd_factor requires a symmetric matrix");
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(M);
  const double tol = 1e-10 * std::max(std::abs(M.trace()), 1e-300);
  const auto& vals = eig.eigenvalues();
  if (vals.minCoeff() < -tol) {
    throw domain_error("matrix is not positive semidefinite");
  }
  std::vector<Eigen::Index> keep;
  for (Eigen::Index k = 0; k < vals.size(); ++k) {
    if (vals(k) > tol) keep.push_back(k);
  }
  Eigen::MatrixXd B(M.rows(), static_cast<Eigen::Index>(keep.size()));
  for (std::size_t c = 0; c < keep.size(); ++c) {
    B.col(static_cast<Eigen::Index>(c)) =
        eig.eigenvectors().col(keep[c]) * std::sqrt(vals(keep[c]));
  }
  return B;
}

namespace detail {

/// Runs fill(rng, first_row, rows) over fixed-size chunks; chunk k draws
/// from an engine seeded base_seed + k.
template <class Fill>
void for_each_chunk(std::size_t count, std::uint64_t seed, Fill fill) {
  const std::size_t chunks = (count + kChunkSize - 1) / kChunkSize;
  for (std::size_t c = 0; c < chunks; ++c) {
    Engine rng(chunk_seed(seed, c));
    const std::size_t first = c * kChunkSize;
    fill(rng, first, std::min(kChunkSize, count - first));
  }
}

inline void check_lengths(std::span<const double> mu, std::span<const double> sigma) {
  if (mu.size() != sigma.size()) {
    throw domain_error("mu and sigma must have equal length");
  }
}

inline void check_count(std::size_t count) {
  if (count == 0) {
    throw domain_error("sample count must be positive");
  }
}

} // namespace detail

/// X = mu + sqrt(W) L z with L's rows sigma_i v_i, z ~ N(0, I_2) and one W per
/// draw. Each X_i ~ E_1(mu_i, sigma_i^2, psi) and sum_i X_i = sum_i mu_i.
inline SampleBatch sample_jm_elliptical(std::span<const double> mu, std::span<const double> sigma,
                                        const CharacteristicGenerator& g, std::size_t count,
                                        std::uint64_t seed) {
  detail::check_lengths(mu, sigma);
  detail::check_count(count);
  const auto v = polygon_unit_vectors(sigma);
  const auto n = static_cast<Eigen::Index>(sigma.size());
  SampleBatch batch;
  batch.draws.resize(static_cast<Eigen::Index>(count), n);
  batch.seed = seed;
  batch.joint_center = std::accumulate(mu.begin(), mu.end(), 0.0);
  batch.coupling = "elliptical";
  batch.generator = g.name();
  batch.shared = SharedMixingPlan{"elliptical", true, false, false}.shared();
  detail::for_each_chunk(count, seed, [&](Engine& rng, std::size_t first, std::size_t rows) {
    detail::MixingSampler mixing(g);
    std::normal_distribution<double> gauss;
    for (std::size_t r = 0; r < rows; ++r) {
      const double w = std::sqrt(mixing(rng));
      const double z0 = gauss(rng);
      const double z1 = gauss(rng);
      const auto row = static_cast<Eigen::Index>(first + r);
      for (Eigen::Index i = 0; i < n; ++i) {
        batch.draws(row, i) = mu[i] + w * sigma[i] * (v[i](0) * z0 + v[i](1) * z1);
      }
    }
  });
  return batch;
}

/// Slash-elliptical marginals SE_1(mu_i, sigma_i^2, psi; q): the elliptical
/// coupling with one U ~ U(0, 1) per draw dividing every component by U^(1/q).
inline SampleBatch sample_jm_slash(std::span<const double> mu, std::span<const double> sigma,
                                   const CharacteristicGenerator& g, double q, std::size_t count,
                                   std::uint64_t seed) {
  if (!(q > 0.0) || !std::isfinite(q)) {
    throw domain_error("slash coupling requires q > 0");
  }
  detail::check_lengths(mu, sigma);
  detail::check_count(count);
  const auto v = polygon_unit_vectors(sigma);
  const auto n = static_cast<Eigen::Index>(sigma.size());
  SampleBatch batch;
  batch.draws.resize(static_cast<Eigen::Index>(count), n);
  batch.seed = seed;
  batch.joint_center = std::accumulate(mu.begin(), mu.end(), 0.0);
  batch.coupling = "slash";
  batch.generator = g.name();
  batch.shared = SharedMixingPlan{"slash", true, true, false}.shared();
  detail::for_each_chunk(count, seed, [&](Engine& rng, std::size_t first, std::size_t rows) {
    detail::MixingSampler mixing(g);
    std::normal_distribution<double> gauss;
    for (std::size_t r = 0; r < rows; ++r) {
      const double w = std::sqrt(mixing(rng));
      const double z0 = gauss(rng);
      const double z1 = gauss(rng);
      const double inv = 1.0 / std::pow(open_uniform(rng), 1.0 / q);
      const auto row = static_cast<Eigen::Index>(first + r);
      for (Eigen::Index i = 0; i < n; ++i) {
        const double z = w * sigma[i] * (v[i](0) * z0 + v[i](1) * z1);
        batch.draws(row, i) = z * inv + mu[i];
      }
    }
  });
  return batch;
}

struct ScaleMixtureOptions {
  int grid_m = 256;
  RaOptions ra{};
};

/// n-tuples whose marginals are the scale mixture of a unimodal-symmetric
/// base (center c) by H, with sum n c. One theta ~ H per draw. Elliptical
/// bases are coupled exactly; other bases use the RA table on an m-point
/// grid, jittered within quantile cells so marginals stay exact while the
/// sum is only approximately constant (bound stored in the batch).
inline SampleBatch sample_cm_scale_mixture(const UnivariateFamily& base, const DiscreteLaw& h,
                                           int n, std::size_t count, std::uint64_t seed,
                                           const ScaleMixtureOptions& opt = {}) {
  if (!base.flags().symmetric || !base.flags().unimodal) {
    throw hypothesis_violation("scale-mixture coupling needs a unimodal-symmetric base");
  }
  if (n < 2) {
    throw domain_error("scale-mixture coupling requires n >= 2");
  }
  validate(h);
  detail::check_count(count);
  const double c = base.flags().center;
  const double theta_max = *std::max_element(h.values.begin(), h.values.end());

  const CharacteristicGenerator* gen = nullptr;
  double base_scale = 1.0;
  if (const auto* e = std::get_if<Elliptical1D>(&base.kind())) {
    gen = &e->g;
    base_scale = e->sigma;
  } else if (const auto* l = std::get_if<LocationScaleSymmetric>(&base.kind())) {
    gen = std::get_if<CharacteristicGenerator>(&l->base);
    base_scale = l->theta;
  }

  SampleBatch batch;
  batch.draws.resize(static_cast<Eigen::Index>(count), n);
  batch.seed = seed;
  batch.joint_center = n * c;
  batch.coupling = "scale_mixture";

  if (gen != nullptr) {
    const std::vector<double> equal(n, base_scale);
    const auto v = polygon_unit_vectors(equal);
    batch.generator = gen->name();
    batch.shared = SharedMixingPlan{base.name(), true, false, true}.shared();
    detail::for_each_chunk(count, seed, [&](Engine& rng, std::size_t first, std::size_t rows) {
      detail::MixingSampler mixing(*gen);
      std::discrete_distribution<std::size_t> pick(h.weights.begin(), h.weights.end());
      std::normal_distribution<double> gauss;
      for (std::size_t r = 0; r < rows; ++r) {
        const double theta = h.values[pick(rng)];
        const double w = std::sqrt(mixing(rng));
        const double z0 = gauss(rng);
        const double z1 = gauss(rng);
        const auto row = static_cast<Eigen::Index>(first + r);
        for (int i = 0; i < n; ++i) {
          batch.draws(row, i) = c + theta * w * base_scale * (v[i](0) * z0 + v[i](1) * z1);
        }
      }
    });
    return batch;
  }

  const int m = opt.grid_m;
  const std::vector<UnivariateFamily> copies(n, base);
  const auto grid = discretize(copies, m);
  const auto ra = ra_minimize(grid, opt.ra);
  // Cell edges quantile(k/m), k = 0..m.
  std::vector<double> edges(m + 1);
  edges[0] = base.flags().support_lo;
  edges[m] = base.flags().support_hi;
  for (int k = 1; k < m; ++k) edges[k] = quantile(base, static_cast<double>(k) / m);
  const Eigen::VectorXd grid_sums = arranged_row_sums(grid, ra.permutations);
  double bound = 0.0;
  for (int k = 0; k < m; ++k) {
    double width = 0.0;
    for (int j = 0; j < n; ++j) {
      const int atom = ra.permutations[j][k];
      width += edges[atom + 1] - edges[atom];
    }
    bound = std::max(bound, std::abs(grid_sums(k) - n * c) + width);
  }
  batch.grid_m = m;
  batch.sum_error_bound = theta_max * bound;
  batch.generator = base.name();
  batch.shared = SharedMixingPlan{base.name(), false, false, true}.shared();
  detail::for_each_chunk(count, seed, [&](Engine& rng, std::size_t first, std::size_t rows) {
    std::discrete_distribution<std::size_t> pick(h.weights.begin(), h.weights.end());
    std::uniform_int_distribution<int> row_pick(0, m - 1);
    for (std::size_t r = 0; r < rows; ++r) {
      const double theta = h.values[pick(rng)];
      const int k = row_pick(rng);
      const auto row = static_cast<Eigen::Index>(first + r);
      for (int j = 0; j < n; ++j) {
        const int atom = ra.permutations[j][k];
        const double p = (atom + open_uniform(rng)) / m;
        const double y = quantile(base, std::min(p, std::nextafter(1.0, 0.0)));
        batch.draws(row, j) = c + theta * (y - c);
      }
    }
  });
  return batch;
}

/// X = sqrt(W) A G B' with A A' = Sigma_p, B B' = Phi (equicorrelation) and
/// G standard normal. Columns are E_p(0, Sigma_p, psi) and X e = 0.
inline MatrixBatch sample_matrix_variate_cm(const Eigen::MatrixXd& sigma_p,
                                            const CharacteristicGenerator& g, int n,
                                            std::size_t count, std::uint64_t seed) {
  const auto plan = make_equicorrelation(n);
  detail::check_count(count);
  const Eigen::MatrixXd A = psd_factor(sigma_p);
  const Eigen::MatrixXd B = psd_factor(plan.phi);
  MatrixBatch batch;
  batch.draws.resize(count);
  batch.seed = seed;
  batch.generator = g.name();
  detail::for_each_chunk(count, seed, [&](Engine& rng, std::size_t first, std::size_t rows) {
    detail::MixingSampler mixing(g);
    std::normal_distribution<double> gauss;
    Eigen::MatrixXd G(A.cols(), B.cols());
    for (std::size_t r = 0; r < rows; ++r) {
      const double w = std::sqrt(mixing(rng));
      for (Eigen::Index a = 0; a < G.rows(); ++a) {
        for (Eigen::Index b = 0; b < G.cols(); ++b) {
          G(a, b) = gauss(rng);
        }
      }
      batch.draws[first + r] = w * (A * G * B.transpose());
    }
  });
  return batch;
}

/// K = f(C): the constant that f(X_1 + ... + X_n) takes under a coupling
/// with joint center C.
inline double transform_center(const std::function<double(double)>& f, double center) {
  return f(center);
}

} // namespace jmix
