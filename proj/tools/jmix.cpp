// jmix: verdicts, couplings, sampling, verification and exploration.
//
// Every subcommand collects its flags into a JSON config; `--config path`
// merges a JSON file over it, so file values win. The merged config is echoed
// into each output sidecar.

#include "jmix/couplings.hpp"
#include "jmix/io.hpp"
#include "jmix/mixability.hpp"
#include "jmix/oracle.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <fstream>
#include <functional>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace {

using jmix::json;

constexpr int kExitMalformed = 64;
constexpr int kExitIo = 66;

/// Flags that were actually given on the command line, keyed by config name.
class FlagSet {
public:
  explicit FlagSet(CLI::App* app) : app_(app) {}

  template <class T>
  CLI::Option* add(const std::string& flag, const std::string& key, const std::string& help) {
    auto value = std::make_shared<T>();
    CLI::Option* opt = app_->add_option(flag, *value, help);
    if constexpr (std::is_same_v<T, std::vector<double>> || std::is_same_v<T, std::vector<int>>) {
      opt->delimiter(',');
    }
    apply_.push_back([opt, value, key](json& cfg) {
      if (opt->count() > 0) cfg[key] = *value;
    });
    return opt;
  }

  void flag(const std::string& flag, const std::string& key, const std::string& help) {
    auto value = std::make_shared<bool>(false);
    CLI::Option* opt = app_->add_flag(flag, *value, help);
    apply_.push_back([opt, value, key](json& cfg) {
      if (opt->count() > 0) cfg[key] = *value;
    });
  }

  void collect(json& cfg) const {
    for (const auto& f : apply_) f(cfg);
  }

private:
  CLI::App* app_;
  std::vector<std::function<void(json&)>> apply_;
};

struct Global {
  std::uint64_t seed = 42;
  std::string config_path;
  std::string output;
  std::string format;
};

json load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw jmix::parse_error("cannot read config file '" + path + "'");
  try {
    json j = json::parse(in);
    if (!j.is_object()) throw jmix::parse_error("config file must hold a JSON object");
    return j;
  } catch (const json::parse_error& e) {
    throw jmix::parse_error(std::string("config file is not valid JSON: ") + e.what());
  }
}

/// Flags, then global options, then the config file on top.
json build_config(const FlagSet& flags, const Global& g) {
  json cfg = json::object();
  flags.collect(cfg);
  cfg["seed"] = g.seed;
  if (!g.output.empty()) cfg["output"] = g.output;
  if (!g.format.empty()) cfg["format"] = g.format;
  if (!g.config_path.empty()) cfg.merge_patch(load_config(g.config_path));
  return cfg;
}

std::vector<double> doubles(const json& cfg, const char* key, std::vector<double> fallback = {}) {
  if (!cfg.contains(key)) return fallback;
  try {
    return cfg.at(key).get<std::vector<double>>();
  } catch (const json::exception&) {
    throw jmix::parse_error(std::string("'") + key + "' must be a list of numbers");
  }
}

template <class T>
T get(const json& cfg, const char* key, T fallback) {
  if (!cfg.contains(key)) return fallback;
  try {
    return cfg.at(key).get<T>();
  } catch (const json::exception&) {
    throw jmix::parse_error(std::string("config field '") + key + "' has the wrong type");
  }
}

std::string require_string(const json& cfg, const char* key) {
  if (!cfg.contains(key)) throw jmix::parse_error(std::string("missing required '") + key + "'");
  return get<std::string>(cfg, key, "");
}

/// Writes to the configured output path, or stdout when none is set.
void emit(const json& cfg, const std::function<void(std::ostream&)>& write) {
  const std::string path = get<std::string>(cfg, "output", "");
  if (path.empty()) {
    write(std::cout);
    std::cout.flush();
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::ios_base::failure("cannot write '" + path + "'");
  write(out);
}

void write_sidecar(const json& cfg, const json& meta) {
  const std::string path = get<std::string>(cfg, "output", "");
  if (path.empty()) return;
  std::ofstream out(path + ".json", std::ios::binary);
  if (!out) throw std::ios_base::failure("cannot write '" + path + ".json'");
  json j = meta;
  j["config"] = cfg;
  out << j.dump(2) << '\n';
}

jmix::DiscreteLaw discrete_law(const json& cfg) {
  jmix::DiscreteLaw h;
  h.values = doubles(cfg, "h_values", {1.0});
  h.weights = doubles(cfg, "h_weights", std::vector<double>(h.values.size(), 1.0 / h.values.size()));
  jmix::validate(h);
  return h;
}

std::vector<jmix::UnivariateFamily> families_from_config(const json& cfg) {
  std::vector<jmix::UnivariateFamily> out;
  if (cfg.contains("families")) {
    for (const auto& f : cfg.at("families")) out.push_back(jmix::family_from_json(f));
    return out;
  }
  const auto spec = require_string(cfg, "family");
  const int copies = get<int>(cfg, "copies", 3);
  if (copies < 1) throw jmix::parse_error("copies must be positive");
  out.assign(static_cast<std::size_t>(copies), jmix::parse_family_spec(spec));
  return out;
}

// check ----------------------------------------------------------------

/// Bounded-support certificate when every law lives in a finite symmetric
/// interval, otherwise the unbounded search over an a-grid.
jmix::MixabilityVerdict symmetric_certificate(const std::vector<jmix::UnivariateFamily>& fams,
                                              const json& cfg) {
  double reach = 0.0;
  for (const auto& F : fams) {
    reach = std::max({reach, std::abs(F.flags().support_lo), std::abs(F.flags().support_hi)});
  }
  if (std::isfinite(reach)) {
    return jmix::not_jm_bounded_symmetric(fams, get<double>(cfg, "a", reach));
  }
  auto grid = cfg.contains("a") ? std::vector<double>{get<double>(cfg, "a", 1.0)}
                                : doubles(cfg, "a_grid", jmix::default_a_grid(fams));
  return jmix::not_jm_unbounded_symmetric(fams, grid);
}

std::vector<jmix::UnivariateFamily> copies_2n1(const jmix::UnivariateFamily& F, int n) {
  if (n < 1) throw jmix::parse_error("n must be at least 1");
  return std::vector<jmix::UnivariateFamily>(static_cast<std::size_t>(2 * n + 1), F);
}

jmix::MixabilityVerdict run_example(const std::string& ex, const json& cfg) {
  const std::vector<double> ones{1.0, 1.0, 1.0};
  if (ex == "2.1") {
    const auto F = jmix::family::bimodal_power(get<double>(cfg, "a", 1.0), get<int>(cfg, "r", 2));
    return jmix::not_jm_bounded_symmetric(copies_2n1(F, get<int>(cfg, "n", 1)), F.flags().support_hi);
  }
  if (ex == "2.2") {
    const auto F = jmix::family::kotz(get<double>(cfg, "kotz_N", 10.0), get<double>(cfg, "m", 1.0),
                                      get<double>(cfg, "beta", 1.0));
    const auto fams = copies_2n1(F, get<int>(cfg, "n", 1));
    return jmix::not_jm_unbounded_symmetric(fams, doubles(cfg, "a_grid", jmix::default_a_grid(fams)));
  }
  if (ex == "2.3") {
    const double a = get<double>(cfg, "a", 1.0);
    const auto F = jmix::family::bimodal_power(a, get<int>(cfg, "r", 1));
    return jmix::not_jm_bounded_symmetric({F, F, F}, a);
  }
  if (ex == "2.4") {
    const auto F = jmix::family::bimodal_moment(get<int>(cfg, "m", 1));
    return jmix::not_jm_bounded_symmetric(copies_2n1(F, get<int>(cfg, "n", 1)), 1.0);
  }
  if (ex == "3.1") {
    const auto base = jmix::family::generalized_logistic(get<double>(cfg, "alpha", 1.0),
                                                         get<double>(cfg, "beta", 1.0));
    const auto theta = doubles(cfg, "sigmas", ones);
    const auto mu = doubles(cfg, "mus", std::vector<double>(theta.size(), 0.0));
    return jmix::jm_verdict_unimodal_location_scale(base, theta, mu);
  }
  if (ex == "3.2") {
    const auto F = jmix::family::kotz(get<double>(cfg, "kotz_N", 2.0), get<double>(cfg, "m", 1.0),
                                      get<double>(cfg, "beta", 1.0));
    const auto fams = copies_2n1(F, get<int>(cfg, "n", 1));
    return jmix::not_jm_unbounded_symmetric(fams, doubles(cfg, "a_grid", jmix::default_a_grid(fams)));
  }
  throw jmix::parse_error("unknown example '" + ex + "' (expected 2.1-2.4, 3.1, 3.2)");
}

jmix::MixabilityVerdict run_check(const json& cfg) {
  if (cfg.contains("example")) return run_example(get<std::string>(cfg, "example", ""), cfg);
  if (cfg.contains("families")) return symmetric_certificate(families_from_config(cfg), cfg);

  const auto spec = require_string(cfg, "family");
  if (spec == "skew_normal") {
    return jmix::skewnormal_noncm_certificate(get<int>(cfg, "n", 3), get<double>(cfg, "lambda", 0.0));
  }
  if (spec == "ssmn") {
    return jmix::ssmn_noncm_certificate(get<int>(cfg, "n", 3), get<double>(cfg, "lambda", 0.0),
                                        discrete_law(cfg));
  }
  if (cfg.contains("sigmas")) {
    const auto sigma = doubles(cfg, "sigmas");
    const auto mu = doubles(cfg, "mus", std::vector<double>(sigma.size(), 0.0));
    if (spec == "uniform" || spec == "triangular" || spec == "logistic" || spec == "laplace") {
      return jmix::jm_verdict_unimodal_location_scale(
          jmix::family::location_scale(jmix::shape_from_string(spec), 0.0, 1.0), sigma, mu);
    }
    if (spec.rfind("generalized_logistic", 0) == 0) {
      return jmix::jm_verdict_unimodal_location_scale(jmix::parse_family_spec(spec), sigma, mu);
    }
    return jmix::jm_verdict_elliptical(sigma, mu, jmix::parse_generator_spec(spec));
  }
  return symmetric_certificate(families_from_config(cfg), cfg);
}

int cmd_check(const json& cfg) {
  jmix::MixabilityVerdict v;
  try {
    v = run_check(cfg);
  } catch (const jmix::hypothesis_violation& e) {
    v.verdict = jmix::Verdict::Unknown;
    v.note = std::string("hypothesis violated: ") + e.what();
  }
  const int oracle_m = get<int>(cfg, "oracle_m", 0);
  json out = jmix::verdict_to_json(v);
  // RA evidence applies wherever the families were checked as a list.
  const bool listed =
      cfg.contains("families") ||
      (cfg.contains("family") && !cfg.contains("example") && !cfg.contains("sigmas") &&
       cfg.at("family") != "skew_normal" && cfg.at("family") != "ssmn");
  if (oracle_m > 0 && v.verdict == jmix::Verdict::Unknown && listed) {
    jmix::RaOptions opt;
    opt.seed = get<std::uint64_t>(cfg, "seed", 42);
    const auto ev = jmix::oracle_evidence(families_from_config(cfg), oracle_m, opt);
    out["oracle_evidence"] = jmix::certificate_to_json(ev.certificate);
  }
  const std::string text = out.dump(2) + "\n";
  std::cout << text;
  if (cfg.contains("output")) {
    emit(cfg, [&](std::ostream& os) { os << text; });
  }
  switch (v.verdict) {
  case jmix::Verdict::JM:
    return 0;
  case jmix::Verdict::NotJM:
    return 1;
  default:
    return 2;
  }
}

// sample ---------------------------------------------------------------

json batch_meta(const jmix::SampleBatch& b) {
  json j{{"coupling", b.coupling},
         {"generator", b.generator},
         {"seed", b.seed},
         {"rows", b.rows()},
         {"cols", b.cols()},
         {"shared", b.shared},
         {"exact", !b.grid_m.has_value()}};
  j["joint_center"] = b.joint_center ? json(*b.joint_center) : json(nullptr);
  if (b.grid_m) j["grid_m"] = *b.grid_m;
  if (b.sum_error_bound) j["sum_error_bound"] = *b.sum_error_bound;
  return j;
}

Eigen::MatrixXd sigma_p_from_config(const json& cfg, int p) {
  Eigen::MatrixXd S = Eigen::MatrixXd::Identity(p, p);
  if (!cfg.contains("sigma_p")) return S;
  const auto& j = cfg.at("sigma_p");
  std::vector<double> flat;
  if (j.is_array() && !j.empty() && j[0].is_array()) {
    for (const auto& row : j) {
      for (const auto& x : row) flat.push_back(x.get<double>());
    }
  } else {
    flat = doubles(cfg, "sigma_p");
  }
  if (flat.size() != static_cast<std::size_t>(p) * p) {
    throw jmix::parse_error("sigma_p must have p*p entries");
  }
  for (int r = 0; r < p; ++r) {
    for (int c = 0; c < p; ++c) S(r, c) = flat[static_cast<std::size_t>(r) * p + c];
  }
  return S;
}

int cmd_sample(const json& cfg) {
  const std::string coupling = get<std::string>(cfg, "coupling", "elliptical");
  const auto seed = get<std::uint64_t>(cfg, "seed", 42);
  const long long count_raw = get<long long>(cfg, "count", 1000);
  if (count_raw <= 0) throw jmix::parse_error("-N must be positive");
  const auto count = static_cast<std::size_t>(count_raw);
  const std::string format = get<std::string>(cfg, "format", "csv");
  if (format != "csv" && format != "json") throw jmix::parse_error("format must be csv or json");

  if (coupling == "matrix") {
    const int p = get<int>(cfg, "p", 2);
    const int n = get<int>(cfg, "n", 3);
    if (p < 1) throw jmix::parse_error("p must be positive");
    const auto g = jmix::parse_generator_spec(get<std::string>(cfg, "generator", "normal"));
    const auto batch = jmix::sample_matrix_variate_cm(sigma_p_from_config(cfg, p), g, n, count, seed);
    json meta{{"coupling", "matrix"}, {"generator", batch.generator}, {"seed", seed},
              {"draws", batch.draws.size()}, {"p", p}, {"n", n}, {"shared", {"W"}},
              {"joint_center", std::vector<double>(static_cast<std::size_t>(p), 0.0)},
              {"exact", true}};
    if (format == "json") {
      json blocks = json::array();
      for (const auto& x : batch.draws) {
        json rows = json::array();
        for (Eigen::Index r = 0; r < x.rows(); ++r) {
          std::vector<double> row;
          for (Eigen::Index c = 0; c < x.cols(); ++c) row.push_back(x(r, c));
          rows.push_back(row);
        }
        blocks.push_back(rows);
      }
      json doc = meta;
      doc["draws"] = blocks;
      emit(cfg, [&](std::ostream& os) { os << doc.dump() << '\n'; });
    } else {
      emit(cfg, [&](std::ostream& os) { jmix::write_matrix_batch_csv(os, batch, n); });
    }
    write_sidecar(cfg, meta);
    return 0;
  }

  jmix::SampleBatch batch;
  if (coupling == "elliptical" || coupling == "slash") {
    const auto sigma = doubles(cfg, "sigmas", {1.0, 1.0, 1.0});
    const auto mu = doubles(cfg, "mus", std::vector<double>(sigma.size(), 0.0));
    const auto g = jmix::parse_generator_spec(get<std::string>(cfg, "generator", "normal"));
    batch = coupling == "elliptical"
                ? jmix::sample_jm_elliptical(mu, sigma, g, count, seed)
                : jmix::sample_jm_slash(mu, sigma, g, get<double>(cfg, "q", 2.0), count, seed);
  } else if (coupling == "scale_mixture") {
    const auto base = jmix::parse_family_spec(get<std::string>(cfg, "family", "normal"));
    jmix::ScaleMixtureOptions opt;
    opt.grid_m = get<int>(cfg, "grid_m", opt.grid_m);
    opt.ra.seed = seed;
    batch = jmix::sample_cm_scale_mixture(base, discrete_law(cfg), get<int>(cfg, "n", 3), count,
                                          seed, opt);
  } else {
    throw jmix::parse_error("unknown coupling '" + coupling +
                            "' (expected elliptical, slash, scale_mixture, matrix)");
  }
  const json meta = batch_meta(batch);
  if (format == "json") {
    json rows = json::array();
    for (Eigen::Index r = 0; r < batch.rows(); ++r) {
      std::vector<double> row;
      for (Eigen::Index c = 0; c < batch.cols(); ++c) row.push_back(batch.draws(r, c));
      rows.push_back(row);
    }
    json doc = meta;
    doc["draws"] = rows;
    emit(cfg, [&](std::ostream& os) { os << doc.dump() << '\n'; });
  } else {
    const bool with_sum = get<bool>(cfg, "with_sum", false);
    emit(cfg, [&](std::ostream& os) { jmix::write_batch_csv(os, batch, with_sum); });
  }
  write_sidecar(cfg, meta);
  return 0;
}

// verify ---------------------------------------------------------------

std::function<double(double)> transform_by_name(const std::string& name) {
  if (name == "square") return [](double x) { return x * x; };
  if (name == "exp") return [](double x) { return std::exp(x); };
  if (name == "abs") return [](double x) { return std::abs(x); };
  throw jmix::parse_error("unknown transform '" + name + "' (expected square, exp, abs)");
}

int cmd_verify(const json& cfg) {
  const std::string input = require_string(cfg, "input");
  if (!cfg.contains("center")) throw jmix::parse_error("missing required 'center'");
  const double center = get<double>(cfg, "center", 0.0);
  const double rel_tol = get<double>(cfg, "rel_tol", 1e-8);
  const std::string transform = get<std::string>(cfg, "transform", "");
  std::function<double(double)> f;
  if (!transform.empty()) f = transform_by_name(transform);

  Eigen::MatrixXd draws;
  try {
    std::ifstream in(input, std::ios::binary);
    if (!in) throw std::ios_base::failure("cannot read '" + input + "'");
    draws = jmix::read_batch_csv(in);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitIo;
  }
  const auto report = jmix::verify_constant_sum(draws, center, rel_tol);
  json out = jmix::constant_sum_report_to_json(report);
  bool pass = report.pass;
  if (f) {
    jmix::SampleBatch batch;
    batch.draws = std::move(draws);
    const double tol = get<double>(cfg, "transform_tol", 1e-6);
    const auto tr = jmix::verify_transformed_sum(batch, f, center, tol);
    out["transform"] = {{"name", transform},
                        {"constant", tr.target},
                        {"max_rel_deviation", tr.max_rel_deviation},
                        {"tolerance", tol},
                        {"pass", tr.pass}};
    pass = pass && tr.pass;
  }
  out["input"] = input;
  out["rel_tol"] = rel_tol;
  const std::string text = out.dump(2) + "\n";
  std::cout << text;
  if (cfg.contains("output")) emit(cfg, [&](std::ostream& os) { os << text; });
  return pass ? 0 : 1;
}

// explore --------------------------------------------------------------

std::vector<double> range(double lo, double hi, double step) {
  std::vector<double> out;
  if (!(step > 0.0)) throw jmix::parse_error("grid step must be positive");
  for (long k = 0;; ++k) {
    const double v = lo + static_cast<double>(k) * step;
    if (v > hi + 1e-9 * step) break;
    out.push_back(v);
  }
  return out;
}

int cmd_explore(const json& cfg) {
  using jmix::format_double;
  const std::string mode = get<std::string>(cfg, "mode", "skew_normal");
  const int ra_m = get<int>(cfg, "oracle_m", 0);
  jmix::RaOptions ra;
  ra.seed = get<std::uint64_t>(cfg, "seed", 42);
  ra.restarts = get<int>(cfg, "restarts", ra.restarts);
  std::ostringstream os;
  if (mode == "skew_normal") {
    const int n_min = get<int>(cfg, "n_min", 2);
    const int n_max = get<int>(cfg, "n_max", 6);
    const auto lambdas = range(get<double>(cfg, "lambda_min", 0.0), get<double>(cfg, "lambda_max", 100.0),
                               get<double>(cfg, "lambda_step", 1.0));
    os << "n,lambda,mean,cdf_at_n_mean,negative_mass,bound,fires";
    if (ra_m > 0) os << ",ra_stddev";
    os << "\r\n";
    for (int n = n_min; n <= n_max; ++n) {
      for (double l : lambdas) {
        const auto c = jmix::skew_normal_bound_terms(n, l);
        os << n << ',' << format_double(l) << ',' << format_double(c.mean) << ','
           << format_double(c.cdf_at_n_mean) << ',' << format_double(c.negative_mass) << ','
           << format_double(c.bound) << ',' << (jmix::replay(c) == jmix::Verdict::NotJM ? 1 : 0);
        if (ra_m > 0) {
          const std::vector<jmix::UnivariateFamily> fams(static_cast<std::size_t>(n),
                                                         jmix::family::skew_normal(0.0, 1.0, l));
          os << ',' << format_double(jmix::ra_minimize(jmix::discretize(fams, ra_m), ra).row_sum_stddev);
        }
        os << "\r\n";
      }
    }
  } else if (mode == "moment") {
    const int m_min = get<int>(cfg, "m_min", 0);
    const int m_max = get<int>(cfg, "m_max", 5);
    const int n_min = get<int>(cfg, "n_min", 1);
    const int n_max = get<int>(cfg, "n_max", 4);
    os << "m,n,copies,point,cdf,threshold,fires";
    if (ra_m > 0) os << ",ra_stddev";
    os << "\r\n";
    for (int m = m_min; m <= m_max; ++m) {
      for (int n = n_min; n <= n_max; ++n) {
        const auto F = jmix::family::bimodal_moment(m);
        const auto fams = copies_2n1(F, n);
        const auto v = jmix::not_jm_bounded_symmetric(fams, 1.0);
        const auto& c = std::get<jmix::BoundedSymmetricCert>(v.certificate);
        os << m << ',' << n << ',' << 2 * n + 1 << ',' << format_double(c.point) << ','
           << format_double(c.cdf_values.front()) << ',' << format_double(c.threshold) << ','
           << (v.verdict == jmix::Verdict::NotJM ? 1 : 0);
        if (ra_m > 0) {
          os << ',' << format_double(jmix::ra_minimize(jmix::discretize(fams, ra_m), ra).row_sum_stddev);
        }
        os << "\r\n";
      }
    }
  } else {
    throw jmix::parse_error("unknown explore mode '" + mode + "' (expected skew_normal, moment)");
  }
  const std::string text = os.str();
  emit(cfg, [&](std::ostream& out) { out << text; });
  write_sidecar(cfg, {{"mode", mode}, {"verdicts", "certificate outcomes only"}});
  return 0;
}

// oracle ---------------------------------------------------------------

int cmd_oracle(const json& cfg) {
  const auto fams = families_from_config(cfg);
  const int m = get<int>(cfg, "m", 64);
  jmix::RaOptions opt;
  opt.seed = get<std::uint64_t>(cfg, "seed", 42);
  opt.restarts = get<int>(cfg, "restarts", opt.restarts);
  opt.max_sweeps = get<int>(cfg, "max_sweeps", opt.max_sweeps);
  opt.tol = get<double>(cfg, "tol", opt.tol);
  const auto grid = jmix::discretize(fams, m);
  const auto ra = jmix::ra_minimize(grid, opt);
  json out = jmix::oracle_report_to_json(ra, grid.m(), grid.n());
  out["evidence_only"] = true;
  out["thresholds"] = "regression fixtures; no verdict is derived from this report";
  if (get<bool>(cfg, "brute", false)) {
    out["brute_force_spread"] = jmix::brute_force_min_spread(grid).spread;
  }
  const std::string text = out.dump(2) + "\n";
  std::cout << text;
  if (cfg.contains("output")) emit(cfg, [&](std::ostream& os) { os << text; });
  return 0;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"Joint and complete mixability: verdicts, couplings, verification"};
  app.require_subcommand(1);
  app.fallthrough();
  Global g;
  app.add_option("--seed", g.seed, "RNG seed")->capture_default_str();
  app.add_option("--config", g.config_path, "JSON config; its fields override flags");
  app.add_option("-o,--output", g.output, "output path (stdout when omitted)");
  app.add_option("--format", g.format, "csv or json (sample)");

  auto* check = app.add_subcommand("check", "decide JM / NotJM / Unknown with a certificate");
  FlagSet check_flags(check);
  check_flags.add<std::string>("--family", "family", "generator spec, shape, skew_normal, ssmn");
  check_flags.add<std::vector<double>>("--sigmas", "sigmas", "scale parameters");
  check_flags.add<std::vector<double>>("--mus", "mus", "locations");
  check_flags.add<std::string>("--example", "example", "preset: 2.1 2.2 2.3 2.4 3.1 3.2");
  check_flags.add<int>("--r", "r", "power order (bimodal_power)");
  check_flags.add<double>("--a", "a", "support half-width or probe point");
  check_flags.add<std::vector<double>>("--a-grid", "a_grid", "probe points (unbounded case)");
  check_flags.add<double>("--m", "m", "moment order, Kotz rate");
  check_flags.add<int>("--n", "n", "copies: 2n+1 (symmetric certificates) or n (skew-normal)");
  check_flags.add<int>("--copies", "copies", "copies of --family for the symmetric certificates");
  check_flags.add<double>("--lambda", "lambda", "skewness");
  check_flags.add<double>("--alpha", "alpha", "generalized logistic alpha");
  check_flags.add<double>("--beta", "beta", "generalized logistic / Kotz beta");
  check_flags.add<double>("--kotz-N", "kotz_N", "Kotz N");
  check_flags.add<std::vector<double>>("--h-values", "h_values", "mixing atoms");
  check_flags.add<std::vector<double>>("--h-weights", "h_weights", "mixing weights");
  check_flags.add<int>("--oracle-m", "oracle_m", "attach RA evidence on an m-grid when Unknown");

  auto* sample = app.add_subcommand("sample", "draw joint samples with constant sums");
  FlagSet sample_flags(sample);
  sample_flags.add<std::string>("--coupling", "coupling", "elliptical, slash, scale_mixture, matrix");
  sample_flags.add<std::vector<double>>("--mus", "mus", "locations");
  sample_flags.add<std::vector<double>>("--sigmas", "sigmas", "scales");
  sample_flags.add<std::string>("--generator", "generator", "normal, student_t:NU, cauchy, ...");
  sample_flags.add<std::string>("--family", "family", "scale-mixture base family spec");
  sample_flags.add<double>("--q", "q", "slash tail parameter");
  sample_flags.add<long long>("-N", "count", "number of draws");
  sample_flags.add<int>("--p", "p", "matrix rows");
  sample_flags.add<int>("--n", "n", "number of components");
  sample_flags.add<std::vector<double>>("--sigma-p", "sigma_p", "row-major p x p scatter");
  sample_flags.add<std::vector<double>>("--h-values", "h_values", "mixing atoms");
  sample_flags.add<std::vector<double>>("--h-weights", "h_weights", "mixing weights");
  sample_flags.add<int>("--grid-m", "grid_m", "RA grid size for non-elliptical bases");
  sample_flags.flag("--with-sum", "with_sum", "append the row sum column S");

  auto* verify = app.add_subcommand("verify", "check a sample CSV for a constant row sum");
  FlagSet verify_flags(verify);
  verify_flags.add<std::string>("--input", "input", "CSV produced by sample");
  verify_flags.add<double>("--center", "center", "claimed joint center C");
  verify_flags.add<double>("--rel-tol", "rel_tol", "relative tolerance (default 1e-8)");
  verify_flags.add<std::string>("--transform", "transform", "also check f(sum): square, exp, abs");
  verify_flags.add<double>("--transform-tol", "transform_tol", "relative tolerance for f(sum)");

  auto* explore = app.add_subcommand("explore", "tabulate certificate outcomes over a grid");
  FlagSet explore_flags(explore);
  explore_flags.add<std::string>("--mode", "mode", "skew_normal or moment");
  explore_flags.add<int>("--n-min", "n_min", "");
  explore_flags.add<int>("--n-max", "n_max", "");
  explore_flags.add<double>("--lambda-min", "lambda_min", "");
  explore_flags.add<double>("--lambda-max", "lambda_max", "");
  explore_flags.add<double>("--lambda-step", "lambda_step", "");
  explore_flags.add<int>("--m-min", "m_min", "");
  explore_flags.add<int>("--m-max", "m_max", "");
  explore_flags.add<int>("--oracle-m", "oracle_m", "add RA row-sum stddev on an m-grid");
  explore_flags.add<int>("--restarts", "restarts", "RA restarts");

  auto* oracle = app.add_subcommand("oracle", "rearrangement-algorithm evidence");
  FlagSet oracle_flags(oracle);
  oracle_flags.add<std::string>("--family", "family", "family spec");
  oracle_flags.add<int>("--copies", "copies", "number of copies (default 3)");
  oracle_flags.add<int>("--m", "m", "grid size (default 64)");
  oracle_flags.add<int>("--restarts", "restarts", "RA restarts (default 10)");
  oracle_flags.add<int>("--max-sweeps", "max_sweeps", "RA sweep cap (default 500)");
  oracle_flags.add<double>("--tol", "tol", "RA variance tolerance (default 1e-12)");
  oracle_flags.flag("--brute", "brute", "also run exhaustive search (m <= 8, n <= 3)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitMalformed;
  }

  try {
    if (check->parsed()) return cmd_check(build_config(check_flags, g));
    if (sample->parsed()) return cmd_sample(build_config(sample_flags, g));
    if (verify->parsed()) return cmd_verify(build_config(verify_flags, g));
    if (explore->parsed()) return cmd_explore(build_config(explore_flags, g));
    if (oracle->parsed()) return cmd_oracle(build_config(oracle_flags, g));
  } catch (const jmix::polygon_inequality_error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::ios_base::failure& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitIo;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitMalformed;
  }
  return kExitMalformed;
}
