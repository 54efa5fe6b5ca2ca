#pragma once

// JSON schemas for generators, families, verdicts and oracle reports, and
// RFC 4180 CSV for sample batches.

#include "jmix/batch.hpp"
#include "jmix/distributions.hpp"
#include "jmix/generators.hpp"
#include "jmix/mixability.hpp"
#include "jmix/oracle.hpp"

#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace jmix {

using json = nlohmann::json;

/// Malformed configuration or input file.
class parse_error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

namespace detail {

inline double num(const json& j, const char* key) {
  if (!j.contains(key) || !j.at(key).is_number()) {
    throw parse_error(std::string("missing numeric field '") + key + "'");
  }
  return j.at(key).get<double>();
}

inline double num_or(const json& j, const char* key, double fallback) {
  return j.contains(key) ? num(j, key) : fallback;
}

inline int int_field(const json& j, const char* key) {
  if (!j.contains(key) || !j.at(key).is_number_integer()) {
    throw parse_error(std::string("missing integer field '") + key + "'");
  }
  return j.at(key).get<int>();
}

inline std::string str(const json& j, const char* key) {
  if (!j.contains(key) || !j.at(key).is_string()) {
    throw parse_error(std::string("missing string field '") + key + "'");
  }
  return j.at(key).get<std::string>();
}

} // namespace detail

// Generators ------------------------------------------------------------

inline json generator_to_json(const CharacteristicGenerator& g) {
  return std::visit(
      [](const auto& k) -> json {
        using K = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<K, NormalGenerator>) {
          return {{"kind", "normal"}};
        } else if constexpr (std::is_same_v<K, StudentTGenerator>) {
          return {{"kind", "student_t"}, {"nu", k.nu}};
        } else if constexpr (std::is_same_v<K, CauchyGenerator>) {
          return {{"kind", "cauchy"}};
        } else if constexpr (std::is_same_v<K, PearsonVIIGenerator>) {
          return {{"kind", "pearson_vii"}, {"N", k.N}, {"m", k.m}};
        } else {
          json atoms = json::array();
          for (const auto& a : k.atoms) atoms.push_back({{"weight", a.weight}, {"scale", a.scale}});
          return {{"kind", "discrete_mixture"}, {"atoms", atoms}};
        }
      },
      g.kind());
}

inline CharacteristicGenerator generator_from_json(const json& j) {
  if (j.is_string()) {
    return generator_from_json(json{{"kind", j.get<std::string>()}});
  }
  const std::string kind = detail::str(j, "kind");
  if (kind == "normal") return CharacteristicGenerator::normal();
  if (kind == "student_t") return CharacteristicGenerator::student_t(detail::num(j, "nu"));
  if (kind == "cauchy") return CharacteristicGenerator::cauchy();
  if (kind == "pearson_vii") {
    return CharacteristicGenerator::pearson_vii(detail::num(j, "N"), detail::num(j, "m"));
  }
  if (kind == "discrete_mixture") {
    std::vector<MixtureAtom> atoms;
    for (const auto& a : j.at("atoms")) {
      if (a.is_array() && a.size() == 2) {
        atoms.push_back({a[0].get<double>(), a[1].get<double>()});
      } else {
        atoms.push_back({detail::num(a, "weight"), detail::num(a, "scale")});
      }
    }
    return CharacteristicGenerator::discrete_mixture(std::move(atoms));
  }
  throw parse_error("unknown generator kind '" + kind + "'");
}

/// Compact flag syntax: normal | cauchy | student_t:NU | pearson_vii:N:M |
/// discrete_mixture:W/S;W/S...
inline CharacteristicGenerator parse_generator_spec(const std::string& spec) {
  std::vector<std::string> parts;
  std::stringstream ss(spec);
  std::string item;
  while (std::getline(ss, item, ':')) parts.push_back(item);
  if (parts.empty()) throw parse_error("empty generator spec");
  try {
    const auto& kind = parts[0];
    if (kind == "normal" && parts.size() == 1) return CharacteristicGenerator::normal();
    if (kind == "cauchy" && parts.size() == 1) return CharacteristicGenerator::cauchy();
    if (kind == "student_t" && parts.size() == 2) {
      return CharacteristicGenerator::student_t(std::stod(parts[1]));
    }
    if (kind == "pearson_vii" && parts.size() == 3) {
      return CharacteristicGenerator::pearson_vii(std::stod(parts[1]), std::stod(parts[2]));
    }
    if (kind == "discrete_mixture" && parts.size() == 2) {
      std::vector<MixtureAtom> atoms;
      std::stringstream as(parts[1]);
      std::string atom;
      while (std::getline(as, atom, ';')) {
        const auto slash = atom.find('/');
        if (slash == std::string::npos) throw parse_error("atom must be weight/scale");
        atoms.push_back({std::stod(atom.substr(0, slash)), std::stod(atom.substr(slash + 1))});
      }
      return CharacteristicGenerator::discrete_mixture(std::move(atoms));
    }
  } catch (const std::invalid_argument&) {
    throw parse_error("malformed number in generator spec '" + spec + "'");
  } catch (const std::out_of_range&) {
    throw parse_error("number out of range in generator spec '" + spec + "'");
  }
  throw parse_error("malformed generator spec '" + spec + "'");
}

// Families --------------------------------------------------------------

inline json discrete_law_to_json(const DiscreteLaw& h) {
  return {{"values", h.values}, {"weights", h.weights}};
}

inline DiscreteLaw discrete_law_from_json(const json& j) {
  DiscreteLaw h;
  h.values = j.at("values").get<std::vector<double>>();
  h.weights = j.at("weights").get<std::vector<double>>();
  return h;
}

inline SymmetricShape shape_from_string(const std::string& s) {
  if (s == "uniform") return SymmetricShape::uniform;
  if (s == "triangular") return SymmetricShape::triangular;
  if (s == "logistic") return SymmetricShape::logistic;
  if (s == "laplace") return SymmetricShape::laplace;
  throw parse_error("unknown symmetric shape '" + s + "'");
}

inline json family_to_json(const UnivariateFamily& F) {
  return std::visit(
      [](const auto& k) -> json {
        using K = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<K, Uniform>) {
          return {{"family", "uniform"}, {"lo", k.lo}, {"hi", k.hi}};
        } else if constexpr (std::is_same_v<K, LocationScaleSymmetric>) {
          json base;
          if (const auto* s = std::get_if<SymmetricShape>(&k.base)) {
            base = to_string(*s);
          } else {
            base = generator_to_json(std::get<CharacteristicGenerator>(k.base));
          }
          return {{"family", "location_scale"}, {"base", base}, {"mu", k.mu}, {"theta", k.theta}};
        } else if constexpr (std::is_same_v<K, Elliptical1D>) {
          return {{"family", "elliptical"},
                  {"mu", k.mu},
                  {"sigma", k.sigma},
                  {"generator", generator_to_json(k.g)}};
        } else if constexpr (std::is_same_v<K, BimodalPower>) {
          return {{"family", "bimodal_power"}, {"a", k.a}, {"r", k.r}};
        } else if constexpr (std::is_same_v<K, BimodalMoment>) {
          return {{"family", "bimodal_moment"}, {"m", k.m}};
        } else if constexpr (std::is_same_v<K, BimodalMomentMixture>) {
          return {{"family", "bimodal_moment_mixture"},
                  {"orders", k.orders},
                  {"weights", k.weights}};
        } else if constexpr (std::is_same_v<K, GeneralizedLogistic>) {
          return {{"family", "generalized_logistic"}, {"alpha", k.alpha}, {"beta", k.beta}};
        } else if constexpr (std::is_same_v<K, KotzType>) {
          return {{"family", "kotz"}, {"N", k.N},   {"m", k.m},
                  {"beta", k.beta},   {"mu", k.mu}, {"sigma", k.sigma}};
        } else if constexpr (std::is_same_v<K, SkewNormal>) {
          return {{"family", "skew_normal"}, {"mu", k.mu}, {"sigma", k.sigma}, {"lambda", k.lambda}};
        } else if constexpr (std::is_same_v<K, SSMN>) {
          return {{"family", "ssmn"},
                  {"mu", k.mu},
                  {"sigma", k.sigma},
                  {"lambda", k.lambda},
                  {"H", discrete_law_to_json(k.h)}};
        } else {
          return {{"family", "slash"},
                  {"mu", k.mu},
                  {"sigma", k.sigma},
                  {"generator", generator_to_json(k.g)},
                  {"q", k.q}};
        }
      },
      F.kind());
}

inline UnivariateFamily family_from_json(const json& j) {
  using detail::num;
  using detail::num_or;
  const std::string f = detail::str(j, "family");
  auto gen = [&j]() {
    return j.contains("generator") ? generator_from_json(j.at("generator"))
                                   : CharacteristicGenerator::normal();
  };
  if (f == "uniform") return family::uniform(num_or(j, "lo", -1.0), num_or(j, "hi", 1.0));
  if (f == "normal") {
    return family::elliptical(num_or(j, "mu", 0.0), num_or(j, "sigma", 1.0),
                              CharacteristicGenerator::normal());
  }
  if (f == "location_scale") {
    const auto& base = j.at("base");
    const double mu = num_or(j, "mu", 0.0);
    const double theta = num_or(j, "theta", 1.0);
    if (base.is_string()) {
      const auto name = base.get<std::string>();
      if (name == "normal" || name == "cauchy") {
        return family::location_scale(generator_from_json(base), mu, theta);
      }
      return family::location_scale(shape_from_string(name), mu, theta);
    }
    return family::location_scale(generator_from_json(base), mu, theta);
  }
  if (f == "elliptical") return family::elliptical(num_or(j, "mu", 0.0), num_or(j, "sigma", 1.0), gen());
  if (f == "bimodal_power") return family::bimodal_power(num_or(j, "a", 1.0), detail::int_field(j, "r"));
  if (f == "bimodal_moment") return family::bimodal_moment(detail::int_field(j, "m"));
  if (f == "bimodal_moment_mixture") {
    return family::bimodal_moment_mixture(j.at("orders").get<std::vector<int>>(),
                                          j.at("weights").get<std::vector<double>>());
  }
  if (f == "generalized_logistic") return family::generalized_logistic(num(j, "alpha"), num(j, "beta"));
  if (f == "kotz") {
    return family::kotz(num(j, "N"), num(j, "m"), num(j, "beta"), num_or(j, "mu", 0.0),
                        num_or(j, "sigma", 1.0));
  }
  if (f == "skew_normal") {
    return family::skew_normal(num_or(j, "mu", 0.0), num_or(j, "sigma", 1.0), num(j, "lambda"));
  }
  if (f == "ssmn") {
    return family::ssmn(num_or(j, "mu", 0.0), num_or(j, "sigma", 1.0), num(j, "lambda"),
                        discrete_law_from_json(j.at("H")));
  }
  if (f == "slash") return family::slash(num_or(j, "mu", 0.0), num_or(j, "sigma", 1.0), gen(), num(j, "q"));
  throw parse_error("unknown family '" + f + "'");
}

/// Compact flag syntax for a standardized family: a generator spec (an
/// elliptical law with mu 0, sigma 1), a shape name (uniform, triangular,
/// logistic, laplace as location-scale bases), or one of
/// bimodal_power:A:R, bimodal_moment:M, generalized_logistic:ALPHA:BETA,
/// kotz:N:M:BETA, skew_normal:LAMBDA, uniform:LO:HI.
inline UnivariateFamily parse_family_spec(const std::string& spec) {
  std::vector<std::string> parts;
  std::stringstream ss(spec);
  std::string item;
  while (std::getline(ss, item, ':')) parts.push_back(item);
  if (parts.empty()) throw parse_error("empty family spec");
  const auto& kind = parts[0];
  auto arg = [&](std::size_t i) {
    try {
      std::size_t used = 0;
      const double v = std::stod(parts.at(i), &used);
      if (used != parts[i].size()) throw std::invalid_argument("trailing");
      return v;
    } catch (const std::exception&) {
      throw parse_error("malformed family spec '" + spec + "'");
    }
  };
  auto int_arg = [&](std::size_t i) {
    const double v = arg(i);
    if (v != std::floor(v)) throw parse_error("expected an integer in family spec '" + spec + "'");
    return static_cast<int>(v);
  };
  auto arity = [&](std::size_t k) {
    if (parts.size() != k + 1) throw parse_error("malformed family spec '" + spec + "'");
  };
  if (kind == "uniform" && parts.size() == 3) return family::uniform(arg(1), arg(2));
  if (kind == "uniform" || kind == "triangular" || kind == "logistic" || kind == "laplace") {
    arity(0);
    return family::location_scale(shape_from_string(kind), 0.0, 1.0);
  }
  if (kind == "bimodal_power") {
    arity(2);
    return family::bimodal_power(arg(1), int_arg(2));
  }
  if (kind == "bimodal_moment") {
    arity(1);
    return family::bimodal_moment(int_arg(1));
  }
  if (kind == "generalized_logistic") {
    arity(2);
    return family::generalized_logistic(arg(1), arg(2));
  }
  if (kind == "kotz") {
    arity(3);
    return family::kotz(arg(1), arg(2), arg(3));
  }
  if (kind == "skew_normal") {
    arity(1);
    return family::skew_normal(0.0, 1.0, arg(1));
  }
  return family::elliptical(0.0, 1.0, parse_generator_spec(spec));
}

// Verdicts --------------------------------------------------------------

inline json skew_normal_cert_json(const SkewNormalCert& c) {
  return {{"n", c.n},
          {"lambda", c.lambda},
          {"mean", c.mean},
          {"cdf_at_n_mean", c.cdf_at_n_mean},
          {"negative_mass", c.negative_mass},
          {"bound", c.bound}};
}

inline SkewNormalCert skew_normal_cert_from_json(const json& j) {
  SkewNormalCert c;
  c.n = j.at("n").get<int>();
  c.lambda = j.at("lambda").get<double>();
  c.mean = j.at("mean").get<double>();
  c.cdf_at_n_mean = j.at("cdf_at_n_mean").get<double>();
  c.negative_mass = j.at("negative_mass").get<double>();
  c.bound = j.at("bound").get<double>();
  return c;
}

inline json certificate_to_json(const Certificate& cert) {
  return std::visit(
      [](const auto& c) -> json {
        using C = std::decay_t<decltype(c)>;
        if constexpr (std::is_same_v<C, std::monostate>) {
          return nullptr;
        } else if constexpr (std::is_same_v<C, ScaleInequalityCert>) {
          return {{"kind", "scale_inequality"},
                  {"scales", c.scales},
                  {"sum", c.sum},
                  {"twice_max", c.twice_max},
                  {"iff", c.iff}};
        } else if constexpr (std::is_same_v<C, BoundedSymmetricCert>) {
          return {{"kind", "bounded_symmetric"},
                  {"a", c.a},
                  {"n", c.n},
                  {"point", c.point},
                  {"cdf_values", c.cdf_values},
                  {"threshold", c.threshold},
                  {"necessary_condition_holds", c.necessary_condition_holds}};
        } else if constexpr (std::is_same_v<C, UnboundedSymmetricCert>) {
          return {{"kind", "unbounded_symmetric"},
                  {"n", c.n},
                  {"witness_a", c.witness_a ? json(*c.witness_a) : json(nullptr)},
                  {"probe_a", c.probe_a},
                  {"masses", c.masses},
                  {"threshold", c.threshold},
                  {"grid_size", c.grid_size}};
        } else if constexpr (std::is_same_v<C, SkewNormalCert>) {
          json j = skew_normal_cert_json(c);
          j["kind"] = "skew_normal";
          return j;
        } else if constexpr (std::is_same_v<C, SsmnCert>) {
          json per = json::array();
          for (const auto& s : c.per_atom) per.push_back(skew_normal_cert_json(s));
          return {{"kind", "ssmn"}, {"n", c.n}, {"lambda", c.lambda}, {"atoms", c.atoms},
                  {"per_atom", per}};
        } else {
          return {{"kind", "oracle_evidence"},
                  {"m", c.m},
                  {"n", c.n},
                  {"spread", c.spread},
                  {"stddev", c.stddev},
                  {"restarts", c.restarts},
                  {"variance_trajectory", c.variance_trajectory}};
        }
      },
      cert);
}

inline Certificate certificate_from_json(const json& j) {
  if (j.is_null()) return std::monostate{};
  const std::string kind = detail::str(j, "kind");
  if (kind == "scale_inequality") {
    return ScaleInequalityCert{j.at("scales").get<std::vector<double>>(), j.at("sum").get<double>(),
                               j.at("twice_max").get<double>(), j.at("iff").get<bool>()};
  }
  if (kind == "bounded_symmetric") {
    BoundedSymmetricCert c;
    c.a = j.at("a").get<double>();
    c.n = j.at("n").get<int>();
    c.point = j.at("point").get<double>();
    c.cdf_values = j.at("cdf_values").get<std::vector<double>>();
    c.threshold = j.at("threshold").get<double>();
    c.necessary_condition_holds = j.at("necessary_condition_holds").get<bool>();
    return c;
  }
  if (kind == "unbounded_symmetric") {
    UnboundedSymmetricCert c;
    c.n = j.at("n").get<int>();
    if (!j.at("witness_a").is_null()) c.witness_a = j.at("witness_a").get<double>();
    c.probe_a = j.at("probe_a").get<double>();
    c.masses = j.at("masses").get<std::vector<double>>();
    c.threshold = j.at("threshold").get<double>();
    c.grid_size = j.at("grid_size").get<std::size_t>();
    return c;
  }
  if (kind == "skew_normal") return skew_normal_cert_from_json(j);
  if (kind == "ssmn") {
    SsmnCert c;
    c.n = j.at("n").get<int>();
    c.lambda = j.at("lambda").get<double>();
    c.atoms = j.at("atoms").get<std::vector<double>>();
    for (const auto& s : j.at("per_atom")) c.per_atom.push_back(skew_normal_cert_from_json(s));
    return c;
  }
  if (kind == "oracle_evidence") {
    OracleEvidenceCert c;
    c.m = j.at("m").get<int>();
    c.n = j.at("n").get<int>();
    c.spread = j.at("spread").get<double>();
    c.stddev = j.at("stddev").get<double>();
    c.restarts = j.at("restarts").get<int>();
    c.variance_trajectory = j.at("variance_trajectory").get<std::vector<double>>();
    return c;
  }
  throw parse_error("unknown certificate kind '" + kind + "'");
}

inline Verdict verdict_from_string(const std::string& s) {
  if (s == "JM") return Verdict::JM;
  if (s == "NotJM") return Verdict::NotJM;
  if (s == "Unknown") return Verdict::Unknown;
  throw parse_error("unknown verdict '" + s + "'");
}

inline json verdict_to_json(const MixabilityVerdict& v) {
  json j{{"verdict", to_string(v.verdict)},
         {"joint_center", v.joint_center ? json(*v.joint_center) : json(nullptr)},
         {"certificate", certificate_to_json(v.certificate)}};
  if (!v.note.empty()) j["note"] = v.note;
  return j;
}

inline MixabilityVerdict verdict_from_json(const json& j) {
  MixabilityVerdict v;
  v.verdict = verdict_from_string(detail::str(j, "verdict"));
  if (j.contains("joint_center") && !j.at("joint_center").is_null()) {
    v.joint_center = j.at("joint_center").get<double>();
  }
  v.certificate = certificate_from_json(j.value("certificate", json(nullptr)));
  v.note = j.value("note", std::string());
  return v;
}

// Oracle and verification reports ----------------------------------------

inline json oracle_report_to_json(const RearrangementResult& r, int m, int n) {
  return {{"m", m},
          {"n", n},
          {"spread", r.row_sum_spread},
          {"stddev", r.row_sum_stddev},
          {"iterations", r.iterations},
          {"converged", r.converged},
          {"restarts", r.restarts}};
}

inline json constant_sum_report_to_json(const ConstantSumReport& r) {
  return {{"rows", r.rows},
          {"center", r.center},
          {"max_abs_deviation", r.max_abs_deviation},
          {"scale", r.scale},
          {"tolerance", r.tolerance},
          {"pass", r.pass},
          {"cf_deviation", r.cf_deviation}};
}

// CSV ------------------------------------------------------------------

inline std::string format_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

/// Header X1..Xn (plus S, the row sum, when requested); CRLF line endings.
inline void write_batch_csv(std::ostream& os, const SampleBatch& batch, bool with_sum) {
  const auto n = batch.cols();
  for (Eigen::Index j = 0; j < n; ++j) os << (j ? "," : "") << 'X' << (j + 1);
  if (with_sum) os << ",S";
  os << "\r\n";
  for (Eigen::Index i = 0; i < batch.rows(); ++i) {
    for (Eigen::Index j = 0; j < n; ++j) os << (j ? "," : "") << format_double(batch.draws(i, j));
    if (with_sum) os << ',' << format_double(batch.draws.row(i).sum());
    os << "\r\n";
  }
}

/// One row per (draw, coordinate); X1..Xn hold that coordinate of each vector.
inline void write_matrix_batch_csv(std::ostream& os, const MatrixBatch& batch, int n) {
  os << "draw,coord";
  for (int j = 0; j < n; ++j) os << ",X" << (j + 1);
  os << "\r\n";
  for (std::size_t d = 0; d < batch.draws.size(); ++d) {
    const auto& x = batch.draws[d];
    for (Eigen::Index r = 0; r < x.rows(); ++r) {
      os << d << ',' << r;
      for (Eigen::Index j = 0; j < x.cols(); ++j) os << ',' << format_double(x(r, j));
      os << "\r\n";
    }
  }
}

namespace detail {

inline std::vector<std::string> split_csv_line(std::string line) {
  if (!line.empty() && line.back() == '\r') line.pop_back();
  std::vector<std::string> fields;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        cur.push_back('"');
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        cur.push_back(c);
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.push_back(std::move(cur));
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  fields.push_back(std::move(cur));
  return fields;
}

} // namespace detail

/// Reads the X-prefixed columns of a batch CSV; other columns are ignored.
inline Eigen::MatrixXd read_batch_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line)) throw parse_error("empty CSV");
  const auto header = detail::split_csv_line(line);
  std::vector<std::size_t> cols;
  for (std::size_t i = 0; i < header.size(); ++i) {
    const auto& h = header[i];
    if (h.size() > 1 && h[0] == 'X' &&
        h.find_first_not_of("0123456789", 1) == std::string::npos) {
      cols.push_back(i);
    }
  }
  if (cols.empty()) throw parse_error("CSV header has no X columns");
  std::vector<double> values;
  std::size_t rows = 0;
  while (std::getline(is, line)) {
    if (line.empty() || line == "\r") continue;
    const auto fields = detail::split_csv_line(line);
    if (fields.size() != header.size()) {
      throw parse_error("CSV row " + std::to_string(rows + 2) + " has wrong field count");
    }
    for (std::size_t c : cols) {
      std::size_t used = 0;
      double v = 0.0;
      try {
        v = std::stod(fields[c], &used);
      } catch (const std::exception&) {
        throw parse_error("bad number '" + fields[c] + "' in CSV");
      }
      if (used != fields[c].size()) throw parse_error("bad number '" + fields[c] + "' in CSV");
      values.push_back(v);
    }
    ++rows;
  }
  if (rows == 0) throw parse_error("CSV has no data rows");
  Eigen::MatrixXd out(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols.size()));
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < cols.size(); ++c) {
      out(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = values[r * cols.size() + c];
    }
  }
  return out;
}

} // namespace jmix
