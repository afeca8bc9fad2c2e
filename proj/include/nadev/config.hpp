#pragma once
// Experiment configuration: a JSON document with sections model,
// distributions, bounds and run (plus optional convex_tests and
// supermartingale). See README.md for the schema.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <initializer_list>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "nadev/errors.hpp"
#include "nadev/moments.hpp"
#include "nadev/montecarlo.hpp"
#include "nadev/sampler.hpp"

namespace nadev {

enum class YMode { Default, Scan, Fixed };

struct BoundSelection {
  std::string id;
  std::string name;  // family key, e.g. "bernstein_condition"
  std::string form;  // lower-case form key, empty for single-form families
  std::optional<double> alpha;  // nullopt: optimized
  YMode y_mode = YMode::Default;
  double y = 0.0;  // used when y_mode == Fixed
  std::optional<double> p;
  std::optional<double> a;
  double tau1_factor = 2.0;
  std::optional<double> v;  // Gaussian-family functions only
  std::map<std::string, double> overrides;  // B_n, V_n, A_p, K_n, K, M
  double scale = 1.0;  // test hook: multiplies the raw value
};

struct RunSpec {
  std::vector<double> x_grid;
  std::uint64_t reps = 100000;
  std::uint64_t seed = 1;
  unsigned threads = 1;
  std::string output;
  std::set<std::string> checks;  // empty: every configured check
};

struct ExperimentConfig {
  std::optional<NAModel> model;
  std::vector<DistributionSpec> distributions;
  std::vector<BoundSelection> bounds;
  RunSpec run;
  std::vector<ConvexTestFunction> convex_tests;
  std::optional<SupermartingaleSpec> supermartingale;
  std::uint64_t supermartingale_reps = 0;  // 0: run.reps

  const BoundSelection& bound(const std::string& id) const {
    for (const auto& b : bounds) {
      if (b.id == id) return b;
    }
    throw ConfigError("no bound with id '" + id + "'");
  }
};

inline const std::set<std::string>& known_bound_names() {
  static const std::set<std::string> names{"fuk_nagaev_h",   "bennett",         "bernstein1", "fuk_nagaev",
                                           "weak_moment",    "fuk",             "semi_exponential",
                                           "exp_moment",     "bernstein_condition", "rio", "hoeffding_azuma"};
  return names;
}

namespace detail {

using json = nlohmann::json;

inline void allow_keys(const json& j, const std::string& where, std::initializer_list<const char*> keys) {
  if (!j.is_object()) throw ConfigError(where + ": expected an object");
  for (const auto& [k, _] : j.items()) {
    if (std::none_of(keys.begin(), keys.end(), [&](const char* a) { return k == a; })) {
      throw ConfigError(where + ": unknown key '" + k + "'");
    }
  }
}

inline double get_number(const json& j, const std::string& key, const std::string& where) {
  if (!j.contains(key)) throw ConfigError(where + ": missing '" + key + "'");
  if (!j.at(key).is_number()) throw ConfigError(where + ": '" + key + "' must be a number");
  return j.at(key).get<double>();
}

inline double get_number(const json& j, const std::string& key, const std::string& where, double fallback) {
  return j.contains(key) ? get_number(j, key, where) : fallback;
}

inline std::uint64_t get_count(const json& j, const std::string& key, const std::string& where, std::uint64_t fallback) {
  if (!j.contains(key)) return fallback;
  const auto& v = j.at(key);
  if (!v.is_number_integer() || v.get<long long>() < 0) {
    throw ConfigError(where + ": '" + key + "' must be a nonnegative integer");
  }
  return v.get<std::uint64_t>();
}

inline std::vector<double> get_numbers(const json& j, const std::string& where) {
  if (!j.is_array()) throw ConfigError(where + ": expected an array of numbers");
  std::vector<double> out;
  for (const auto& v : j) {
    if (!v.is_number()) throw ConfigError(where + ": expected an array of numbers");
    out.push_back(v.get<double>());
  }
  return out;
}

inline NAModel parse_model(const json& j) {
  const std::string kind = j.value("kind", "");
  const std::string name = j.value("name", kind);
  if (kind == "without_replacement") {
    allow_keys(j, "model", {"kind", "name", "population", "n_draw"});
    std::vector<double> pop;
    const auto& p = j.at("population");
    if (p.is_object()) {
      allow_keys(p, "model.population", {"balanced"});
      const auto N = get_count(p, "balanced", "model.population", 0);
      if (N == 0 || N % 2 != 0) throw ConfigError("model.population.balanced must be a positive even integer");
      for (std::uint64_t i = 0; i < N; ++i) pop.push_back(i % 2 == 0 ? 1.0 : -1.0);
    } else {
      pop = get_numbers(p, "model.population");
    }
    const auto n_draw = get_count(j, "n_draw", "model", pop.size());
    return sampling_without_replacement(std::move(pop), n_draw, name);
  }
  if (kind == "multinomial") {
    allow_keys(j, "model", {"kind", "name", "trials", "probs"});
    std::vector<double> probs;
    const auto& p = j.at("probs");
    if (p.is_object()) {
      allow_keys(p, "model.probs", {"uniform"});
      const auto k = get_count(p, "uniform", "model.probs", 0);
      if (k == 0) throw ConfigError("model.probs.uniform must be a positive integer");
      probs.assign(k, 1.0 / static_cast<double>(k));
      double total = 0.0;
      for (std::size_t i = 0; i + 1 < k; ++i) total += probs[i];
      probs.back() = 1.0 - total;
    } else {
      probs = get_numbers(p, "model.probs");
    }
    return multinomial_counts(static_cast<long>(get_count(j, "trials", "model", 0)), std::move(probs), name);
  }
  if (kind == "gaussian_negcov") {
    allow_keys(j, "model", {"kind", "name", "covariance"});
    const auto& c = j.at("covariance");
    if (c.is_object()) {
      allow_keys(c, "model.covariance", {"dim", "variance", "offdiag"});
      const auto d = get_count(c, "dim", "model.covariance", 0);
      if (d == 0) throw ConfigError("model.covariance.dim must be a positive integer");
      const double var = get_number(c, "variance", "model.covariance", 1.0);
      const double off = get_number(c, "offdiag", "model.covariance", 0.0);
      std::vector<double> cov(d * d, off);
      for (std::size_t i = 0; i < d; ++i) cov[i * d + i] = var;
      return gaussian_neg_cov(std::move(cov), d, name);
    }
    if (!c.is_array() || c.empty()) throw ConfigError("model.covariance must be a square matrix or an object");
    const std::size_t d = c.size();
    std::vector<double> cov;
    for (const auto& row : c) {
      const auto r = get_numbers(row, "model.covariance row");
      if (r.size() != d) throw ConfigError("model.covariance must be square");
      cov.insert(cov.end(), r.begin(), r.end());
    }
    return gaussian_neg_cov(std::move(cov), d, name);
  }
  throw ConfigError("model.kind must be one of without_replacement, multinomial, gaussian_negcov");
}

inline std::vector<DistributionSpec> parse_distributions(const json& j) {
  if (!j.is_array() || j.empty()) throw ConfigError("distributions must be a nonempty array");
  std::vector<DistributionSpec> out;
  for (const auto& e : j) {
    const std::string kind = e.value("kind", "");
    DistributionSpec d;
    if (kind == "bounded_discrete") {
      allow_keys(e, "distributions[]", {"kind", "support", "count"});
      std::vector<Atom> atoms;
      for (const auto& at : e.at("support")) {
        const auto pair = get_numbers(at, "distributions[].support");
        if (pair.size() != 2) throw ConfigError("distributions[].support entries are [value, prob]");
        atoms.push_back({pair[0], pair[1]});
      }
      d = bounded_discrete(std::move(atoms));
    } else if (kind == "uniform") {
      allow_keys(e, "distributions[]", {"kind", "a", "b", "count"});
      d = uniform_law(get_number(e, "a", "uniform"), get_number(e, "b", "uniform"));
    } else if (kind == "gaussian") {
      allow_keys(e, "distributions[]", {"kind", "sigma", "count"});
      d = centered_gaussian(get_number(e, "sigma", "gaussian", 1.0));
    } else if (kind == "truncated_gaussian") {
      allow_keys(e, "distributions[]", {"kind", "sigma", "cut", "count"});
      d = truncated_gaussian(get_number(e, "sigma", "truncated_gaussian", 1.0),
                             get_number(e, "cut", "truncated_gaussian"));
    } else if (kind == "population") {
      allow_keys(e, "distributions[]", {"kind", "values", "count"});
      d = population_value(get_numbers(e.at("values"), "distributions[].values"), true);
    } else {
      throw ConfigError(
          "distributions[].kind must be one of bounded_discrete, uniform, gaussian, truncated_gaussian, population");
    }
    d.validate();
    const auto count = get_count(e, "count", "distributions[]", 1);
    if (count == 0) throw ConfigError("distributions[].count must be >= 1");
    out.insert(out.end(), count, d);
  }
  return out;
}

inline BoundSelection parse_bound(const json& j) {
  allow_keys(j, "bounds[]", {"id", "name", "form", "alpha", "y", "p", "a", "tau1_factor", "v", "B_n", "V_n", "A_p",
                             "K_n", "K", "M", "scale"});
  BoundSelection b;
  if (!j.contains("name") || !j.at("name").is_string()) throw ConfigError("bounds[]: missing 'name'");
  b.name = j.at("name").get<std::string>();
  if (!known_bound_names().count(b.name)) throw ConfigError("bounds[]: unknown bound family '" + b.name + "'");
  b.id = j.value("id", b.name);
  b.form = j.value("form", "");
  if (j.contains("alpha")) {
    const auto& a = j.at("alpha");
    if (a.is_string() && a.get<std::string>() == "auto") {
      b.alpha.reset();
    } else if (a.is_number()) {
      b.alpha = a.get<double>();
    } else {
      throw ConfigError("bounds[" + b.id + "].alpha must be a number or \"auto\"");
    }
  }
  if (j.contains("y")) {
    const auto& y = j.at("y");
    if (y.is_number()) {
      b.y_mode = YMode::Fixed;
      b.y = y.get<double>();
    } else if (y == "default") {
      b.y_mode = YMode::Default;
    } else if (y == "scan") {
      b.y_mode = YMode::Scan;
    } else {
      throw ConfigError("bounds[" + b.id + "].y must be a number, \"default\" or \"scan\"");
    }
  }
  const std::string where = "bounds[" + b.id + "]";
  if (j.contains("p")) b.p = get_number(j, "p", where);
  if (j.contains("a")) b.a = get_number(j, "a", where);
  if (j.contains("v")) b.v = get_number(j, "v", where);
  b.tau1_factor = get_number(j, "tau1_factor", where, 2.0);
  b.scale = get_number(j, "scale", where, 1.0);
  for (const char* k : {"B_n", "V_n", "A_p", "K_n", "K", "M"}) {
    if (j.contains(k)) b.overrides[k] = get_number(j, k, where);
  }
  return b;
}

inline std::vector<double> parse_x_grid(const json& j) {
  std::vector<double> xs;
  if (j.is_object()) {
    allow_keys(j, "run.x_grid", {"from", "to", "num"});
    const double from = get_number(j, "from", "run.x_grid");
    const double to = get_number(j, "to", "run.x_grid");
    const auto num = get_count(j, "num", "run.x_grid", 0);
    if (num == 0) throw ConfigError("run.x_grid.num must be >= 1");
    for (std::uint64_t i = 0; i < num; ++i) {
      xs.push_back(num == 1 ? from : from + (to - from) * static_cast<double>(i) / static_cast<double>(num - 1));
    }
  } else {
    xs = get_numbers(j, "run.x_grid");
  }
  if (xs.empty()) throw ConfigError("run.x_grid must be nonempty");
  if (!std::is_sorted(xs.begin(), xs.end())) throw ConfigError("run.x_grid must be sorted ascending");
  return xs;
}

inline ConvexTestFunction parse_convex(const json& j) {
  const std::string kind = j.value("kind", "");
  if (kind == "exponential") {
    allow_keys(j, "convex_tests[]", {"kind", "t"});
    return {ConvexTestFunction::Kind::Exponential, get_number(j, "t", "exponential")};
  }
  if (kind == "shifted_square") {
    allow_keys(j, "convex_tests[]", {"kind", "a"});
    return {ConvexTestFunction::Kind::ShiftedSquare, get_number(j, "a", "shifted_square")};
  }
  if (kind == "identity_plus") {
    allow_keys(j, "convex_tests[]", {"kind"});
    return {ConvexTestFunction::Kind::IdentityPlus, 0.0};
  }
  throw ConfigError("convex_tests[].kind must be one of exponential, shifted_square, identity_plus");
}

}  // namespace detail

inline ExperimentConfig parse_config(const std::string& text) {
  using detail::json;
  json root;
  try {
    root = json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed JSON: ") + e.what());
  }
  ExperimentConfig cfg;
  try {
    detail::allow_keys(root, "config", {"model", "distributions", "bounds", "run", "convex_tests", "supermartingale"});
    if (root.contains("model")) cfg.model = detail::parse_model(root.at("model"));
    if (root.contains("distributions")) {
      cfg.distributions = detail::parse_distributions(root.at("distributions"));
    } else if (cfg.model) {
      cfg.distributions = marginals(*cfg.model);
    } else {
      throw ConfigError("config needs a model or a distributions section");
    }
    if (cfg.model && cfg.distributions.size() != cfg.model->n()) {
      throw ConfigError("distributions describe " + std::to_string(cfg.distributions.size()) +
                        " summands but the model has " + std::to_string(cfg.model->n()));
    }
    if (root.contains("bounds")) {
      std::set<std::string> ids;
      for (const auto& b : root.at("bounds")) {
        cfg.bounds.push_back(detail::parse_bound(b));
        if (!ids.insert(cfg.bounds.back().id).second) {
          throw ConfigError("duplicate bound id '" + cfg.bounds.back().id + "'");
        }
      }
    }
    if (!root.contains("run")) throw ConfigError("config needs a run section");
    const auto& run = root.at("run");
    detail::allow_keys(run, "run", {"x_grid", "reps", "seed", "threads", "output", "checks"});
    if (!run.contains("x_grid")) throw ConfigError("run.x_grid is required");
    cfg.run.x_grid = detail::parse_x_grid(run.at("x_grid"));
    cfg.run.reps = detail::get_count(run, "reps", "run", cfg.run.reps);
    cfg.run.seed = detail::get_count(run, "seed", "run", cfg.run.seed);
    cfg.run.threads = static_cast<unsigned>(detail::get_count(run, "threads", "run", cfg.run.threads));
    cfg.run.output = run.value("output", "");
    if (run.contains("checks")) {
      for (const auto& c : run.at("checks")) {
        const auto s = c.get<std::string>();
        if (s != "domination" && s != "convex" && s != "supermartingale") {
          throw ConfigError("run.checks entries must be domination, convex or supermartingale");
        }
        cfg.run.checks.insert(s);
      }
    }
    if (root.contains("convex_tests")) {
      for (const auto& c : root.at("convex_tests")) cfg.convex_tests.push_back(detail::parse_convex(c));
    }
    if (root.contains("supermartingale")) {
      const auto& s = root.at("supermartingale");
      detail::allow_keys(s, "supermartingale", {"t", "sigma", "n", "alpha", "reps"});
      SupermartingaleSpec spec;
      spec.t = detail::get_number(s, "t", "supermartingale");
      spec.sigma = detail::get_number(s, "sigma", "supermartingale", 1.0);
      spec.n = detail::get_count(s, "n", "supermartingale", 1);
      spec.alpha = detail::get_number(s, "alpha", "supermartingale", 0.5);
      if (!(spec.alpha > 0.0 && spec.alpha < 1.0) || spec.n == 0 || !(spec.sigma > 0.0)) {
        throw ConfigError("supermartingale: need alpha in (0, 1), n >= 1, sigma > 0");
      }
      cfg.supermartingale = spec;
      cfg.supermartingale_reps = detail::get_count(s, "reps", "supermartingale", 0);
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("bad config value: ") + e.what());
  } catch (const DomainError& e) {
    throw ConfigError(std::string("invalid config: ") + e.what());
  } catch (const FactorizationError& e) {
    throw ConfigError(std::string("invalid config: ") + e.what());
  }
  return cfg;
}

inline ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

}  // namespace nadev
