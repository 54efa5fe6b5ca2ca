#pragma once

// Characteristic generators of elliptical laws, represented through their
// normal variance mixture form X = sqrt(W) * N(0, 1).

#include "jmix/numerics.hpp"

#include <cmath>
#include <cstdint>
#include <optional>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

namespace jmix {

struct NormalGenerator {};

struct StudentTGenerator {
  double nu;
};

struct CauchyGenerator {};

/// Density generator (1 + u/m)^(-N).
struct PearsonVIIGenerator {
  double N;
  double m;
};

struct MixtureAtom {
  double weight;
  double scale;
};

/// Finite scale mixture of normals: W = scale^2 with probability weight.
struct DiscreteMixtureGenerator {
  std::vector<MixtureAtom> atoms;
};

using GeneratorKind = std::variant<NormalGenerator, StudentTGenerator, CauchyGenerator,
                                   PearsonVIIGenerator, DiscreteMixtureGenerator>;

/// A characteristic generator psi with psi(0) = 1. Every supported kind is a
/// normal variance mixture, so it generates elliptical laws in any dimension.
class CharacteristicGenerator {
public:
  CharacteristicGenerator() : kind_(NormalGenerator{}) {}

  static CharacteristicGenerator normal() { return CharacteristicGenerator(NormalGenerator{}); }

  static CharacteristicGenerator student_t(double nu) {
    if (!(nu > 0.0) || !std::isfinite(nu)) {
      throw domain_error("student_t generator requires nu > 0");
    }
    return CharacteristicGenerator(StudentTGenerator{nu});
  }

  static CharacteristicGenerator cauchy() { return CharacteristicGenerator(CauchyGenerator{}); }

  static CharacteristicGenerator pearson_vii(double N, double m) {
    if (!(N > 0.5) || !(m > 0.0) || !std::isfinite(N) || !std::isfinite(m)) {
      throw domain_error("pearson_vii generator requires N > 1/2 and m > 0");
    }
    return CharacteristicGenerator(PearsonVIIGenerator{N, m});
  }

  static CharacteristicGenerator discrete_mixture(std::vector<MixtureAtom> atoms) {
    if (atoms.empty()) {
      throw domain_error("discrete_mixture generator needs at least one atom");
    }
    double total = 0.0;
    for (const auto& atom : atoms) {
      if (!(atom.weight > 0.0) || atom.weight > 1.0 || !(atom.scale > 0.0) ||
          !std::isfinite(atom.scale)) {
        throw domain_error("discrete_mixture atoms need weight in (0,1] and scale > 0");
      }
      total += atom.weight;
    }
    if (std::abs(total - 1.0) > 1e-12) {
      throw domain_error("discrete_mixture weights must sum to 1");
    }
    return CharacteristicGenerator(DiscreteMixtureGenerator{std::move(atoms)});
  }

  const GeneratorKind& kind() const { return kind_; }

  /// Largest dimension n with psi in Psi_n; nullopt means Psi_infinity.
  /// Normal mixtures belong to Psi_infinity.
  std::optional<int> max_dimension() const { return std::nullopt; }

  std::string name() const {
    return std::visit(
        [](const auto& k) -> std::string {
          using K = std::decay_t<decltype(k)>;
          std::ostringstream os;
          os.precision(17);
          if constexpr (std::is_same_v<K, NormalGenerator>) {
            os << "normal";
          } else if constexpr (std::is_same_v<K, StudentTGenerator>) {
            os << "student_t(" << k.nu << ")";
          } else if constexpr (std::is_same_v<K, CauchyGenerator>) {
            os << "cauchy";
          } else if constexpr (std::is_same_v<K, PearsonVIIGenerator>) {
            os << "pearson_vii(" << k.N << "," << k.m << ")";
          } else {
            os << "discrete_mixture(";
            for (std::size_t i = 0; i < k.atoms.size(); ++i) {
              os << (i ? ";" : "") << k.atoms[i].weight << ":" << k.atoms[i].scale;
            }
            os << ")";
          }
          return os.str();
        },
        kind_);
  }

private:
  explicit CharacteristicGenerator(GeneratorKind kind) : kind_(std::move(kind)) {}
  GeneratorKind kind_;
};

struct DegenerateMixing {
  double value;
};

/// W = 1/T with T ~ Gamma(shape, rate).
struct InverseGammaMixing {
  double shape;
  double rate;
};

struct DiscreteMixing {
  std::vector<double> weights;
  std::vector<double> values;
};

/// Law of the nonnegative scale W in X = sqrt(W) * N(0, 1).
using MixingLaw = std::variant<DegenerateMixing, InverseGammaMixing, DiscreteMixing>;

inline MixingLaw mixing_law(const CharacteristicGenerator& g) {
  return std::visit(
      [](const auto& k) -> MixingLaw {
        using K = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<K, NormalGenerator>) {
          return DegenerateMixing{1.0};
        } else if constexpr (std::is_same_v<K, StudentTGenerator>) {
          return InverseGammaMixing{0.5 * k.nu, 0.5 * k.nu};
        } else if constexpr (std::is_same_v<K, CauchyGenerator>) {
          return InverseGammaMixing{0.5, 0.5};
        } else if constexpr (std::is_same_v<K, PearsonVIIGenerator>) {
          return InverseGammaMixing{k.N - 0.5, 0.5 * k.m};
        } else {
          DiscreteMixing law;
          for (const auto& atom : k.atoms) {
            law.weights.push_back(atom.weight);
            law.values.push_back(atom.scale * atom.scale);
          }
          return law;
        }
      },
      g.kind());
}

namespace detail {

/// E exp(-u W / 2) for W inverse gamma, integrating over the gamma density of 1/W.
inline double inverse_gamma_laplace(const InverseGammaMixing& law, double u) {
  if (u == 0.0) {
    return 1.0;
  }
  const double a = law.shape;
  const double b = law.rate;
  const double log_norm = a * std::log(b) - std::lgamma(a);
  auto integrand = [=](double t) {
    if (t <= 0.0) {
      return 0.0;
    }
    return std::exp(log_norm + (a - 1.0) * std::log(t) - b * t - 0.5 * u / t);
  };
  return integrate(integrand, 0.0, kInf);
}

/// Stateful per-engine sampler of W.
class MixingSampler {
public:
  explicit MixingSampler(const CharacteristicGenerator& g) : law_(mixing_law(g)) {
    if (const auto* ig = std::get_if<InverseGammaMixing>(&law_)) {
      gamma_ = std::gamma_distribution<double>(ig->shape, 1.0 / ig->rate);
    } else if (const auto* d = std::get_if<DiscreteMixing>(&law_)) {
      pick_ = std::discrete_distribution<std::size_t>(d->weights.begin(), d->weights.end());
    }
  }

  double operator()(Engine& rng) {
    if (const auto* deg = std::get_if<DegenerateMixing>(&law_)) {
      return deg->value;
    }
    if (std::holds_alternative<InverseGammaMixing>(law_)) {
      double t = 0.0;
      do {
        t = gamma_(rng);
      } while (t <= 0.0);
      return 1.0 / t;
    }
    const auto& d = std::get<DiscreteMixing>(law_);
    return d.values[pick_(rng)];
  }

private:
  MixingLaw law_;
  std::gamma_distribution<double> gamma_;
  std::discrete_distribution<std::size_t> pick_;
};

} // namespace detail

/// psi(u). Closed form for normal, Cauchy and discrete mixtures; quadrature
/// over the mixing density for Student t and Pearson VII.
inline double cg_eval(const CharacteristicGenerator& g, double u) {
  if (!(u >= 0.0)) {
    throw domain_error("characteristic generator argument must be >= 0");
  }
  return std::visit(
      [&](const auto& k) -> double {
        using K = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<K, NormalGenerator>) {
          return std::exp(-0.5 * u);
        } else if constexpr (std::is_same_v<K, CauchyGenerator>) {
          return std::exp(-std::sqrt(u));
        } else if constexpr (std::is_same_v<K, DiscreteMixtureGenerator>) {
          double s = 0.0;
          for (const auto& atom : k.atoms) {
            s += atom.weight * std::exp(-0.5 * u * atom.scale * atom.scale);
          }
          return s;
        } else {
          return detail::inverse_gamma_laplace(std::get<InverseGammaMixing>(mixing_law(g)), u);
        }
      },
      g.kind());
}

/// `count` independent draws of the mixing scale W, reproducible per seed.
inline std::vector<double> sample_mixing(const CharacteristicGenerator& g, std::size_t count,
                                         std::uint64_t seed) {
  if (count == 0) {
    throw domain_error("sample count must be positive");
  }
  std::vector<double> out;
  out.reserve(count);
  Engine rng(seed);
  detail::MixingSampler draw(g);
  for (std::size_t i = 0; i < count; ++i) {
    out.push_back(draw(rng));
  }
  return out;
}

} // namespace jmix
