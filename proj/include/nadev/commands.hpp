#pragma once
// Command implementations behind the nadev tool: eval, sweep, validate and
// compare. run_cli is the whole program minus main(), so tests can drive it
// in-process.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <limits>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "nadev/bounds.hpp"
#include "nadev/config.hpp"
#include "nadev/errors.hpp"
#include "nadev/moments.hpp"
#include "nadev/montecarlo.hpp"
#include "nadev/transforms.hpp"

namespace nadev {

enum ExitCode : int { kExitOk = 0, kExitFinding = 1, kExitConfig = 2, kExitDomain = 3 };

/// %.17g, round-trippable.
inline std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

namespace detail {

struct Evaluable {
  std::function<BoundResult(double alpha, double y)> at;
  bool uses_alpha = true;
  bool uses_y = false;
  double rule_p = 2.0;  // p in the default truncation rule
};

inline double functional(const BoundSelection& s, const char* key, const std::function<double()>& compute) {
  const auto it = s.overrides.find(key);
  return it != s.overrides.end() ? it->second : compute();
}

inline void require_form(const BoundSelection& s, std::initializer_list<const char*> forms) {
  for (const char* f : forms) {
    if (s.form == f) return;
  }
  std::string list;
  for (const char* f : forms) list += std::string(list.empty() ? "" : ", ") + f;
  throw ConfigError("bound '" + s.id + "': form must be one of " + list);
}

inline BoundResult gaussian_family_result(BoundFamily family, double x, double v, long n, double alpha,
                                          double value) {
  return finish(family, "", {{"x", x}, {"v", v}, {"n", static_cast<double>(n)}, {"alpha", alpha}},
                {alpha, std::nullopt, std::nullopt}, value);
}

inline Evaluable make_evaluable(const BoundSelection& s, const MomentCatalog& cat, double x) {
  const long n = static_cast<long>(cat.n());
  Evaluable e;
  const std::string& name = s.name;

  if (name == "fuk_nagaev_h" || name == "bennett" || name == "bernstein1") {
    if (!s.v) throw ConfigError("bound '" + s.id + "': the Gaussian-family functions need 'v'");
    const double v = *s.v;
    if (name == "fuk_nagaev_h") {
      e.at = [=](double a, double) {
        return gaussian_family_result(BoundFamily::FukNagaevH, x, v, n, a, fuk_nagaev_h({x, v, n, a}));
      };
    } else if (name == "bennett") {
      e.at = [=](double a, double) {
        return gaussian_family_result(BoundFamily::Bennett, x, v, n, a, bennett_b(x, v, a));
      };
    } else {
      e.at = [=](double a, double) {
        return gaussian_family_result(BoundFamily::Bernstein1, x, v, n, a, bernstein_b1(x, v, a));
      };
    }
    return e;
  }
  if (name == "fuk_nagaev") {
    BoundSelection t = s;
    if (t.form.empty()) t.form = "bennett";
    require_form(t, {"hn", "bennett", "bernstein"});
    const auto variant = t.form == "hn"         ? FukNagaevVariant::Hn
                         : t.form == "bennett" ? FukNagaevVariant::Bennett
                                               : FukNagaevVariant::Bernstein;
    e.uses_y = true;
    e.rule_p = s.p.value_or(2.0);
    e.at = [&cat, s, x, n, variant](double a, double y) {
      const double bny = functional(s, "B_n", [&] { return cat.B_n_of_y(y); });
      return fuk_nagaev_tail_bound(x, y, a, n, bny, cat.tail_sum(y), variant);
    };
    return e;
  }
  if (name == "weak_moment") {
    const double p = s.p.value_or(3.0);
    const double bn = functional(s, "B_n", [&] { return cat.B_n(); });
    const double ap = functional(s, "A_p", [&] { return cat.A_p(p); });
    e.uses_y = true;
    e.rule_p = p;
    e.at = [=](double a, double y) { return weak_moment_tail_bound(x, y, a, n, bn, ap, p); };
    return e;
  }
  if (name == "fuk") {
    const double p = s.p.value_or(4.0);
    const double bn = functional(s, "B_n", [&] { return cat.B_n(); });
    const double vn = functional(s, "V_n", [&] { return cat.V_n(p); });
    e.at = [=](double a, double) { return fuk_tail_bound(x, a, p, bn, vn); };
    return e;
  }
  if (name == "semi_exponential") {
    BoundSelection t = s;
    if (t.form.empty()) t.form = "piecewise";
    require_form(t, {"piecewise", "smoothed"});
    const auto form = t.form == "piecewise" ? SemiExpForm::Piecewise : SemiExpForm::Smoothed;
    const double p = s.p.value_or(0.5);
    // a derived K_n below 1 is raised to 1; an explicit one is passed through
    const double kn = functional(s, "K_n", [&] { return std::max(1.0, cat.K_n(p)); });
    e.at = [=](double a, double) { return semi_exponential_tail_bound(x, a, p, kn, form); };
    return e;
  }
  if (name == "exp_moment") {
    const double p = s.p.value_or(2.0);
    const double a_mom = s.a.value_or(0.1);
    const double K = functional(s, "K", [&] { return cat.K_exp(a_mom, p); });
    const auto c = exp_moment_constants(p, a_mom, K, s.tau1_factor);
    e.at = [=](double a, double) { return exp_moment_tail_bound(x, n, a, c); };
    return e;
  }
  if (name == "bernstein_condition") {
    BoundSelection t = s;
    if (t.form.empty()) t.form = "sharp";
    require_form(t, {"sharp", "simple"});
    const auto form = t.form == "sharp" ? BernsteinForm::Sharp : BernsteinForm::Simple;
    const double bn = functional(s, "B_n", [&] { return cat.B_n(); });
    const double M = functional(s, "M", [&] {
      const auto m = cat.bernstein_M();
      if (!m) throw DomainError("bound '" + s.id + "': no certified Bernstein M for unbounded summands; set 'M'");
      return *m;
    });
    e.at = [=](double a, double) { return bernstein_condition_tail_bound(x, a, M, bn, form); };
    return e;
  }
  if (name == "rio" || name == "hoeffding_azuma") {
    RioForm form = RioForm::HoeffdingAzuma;
    if (name == "rio") {
      BoundSelection t = s;
      if (t.form.empty()) t.form = "young";
      require_form(t, {"young", "closed", "delta"});
      form = t.form == "young" ? RioForm::YoungForm : t.form == "closed" ? RioForm::ClosedForm : RioForm::DeltaForm;
    }
    const auto range = cat.range();
    if (!range) throw DomainError("bound '" + s.id + "': range bounds need bounded summands");
    e.uses_alpha = form != RioForm::HoeffdingAzuma;
    e.at = [=](double a, double) { return rio_tail_bound(x, a, *range, form); };
    return e;
  }
  throw ConfigError("unknown bound family '" + name + "'");
}

}  // namespace detail

/// Evaluates one configured bound at deviation x, choosing alpha and y as the
/// selection asks: fixed values, the default truncation rule, or numeric search.
inline BoundResult evaluate_selection(const BoundSelection& s, const MomentCatalog& cat, double x) {
  const auto e = detail::make_evaluable(s, cat, x);
  auto with_alpha = [&](double y) {
    if (!e.uses_alpha) return e.at(0.5, y);
    if (s.alpha) return e.at(*s.alpha, y);
    const auto best = minimize_over_alpha([&](double a) { return e.at(a, y).raw_value; });
    return e.at(best.argopt, y);
  };
  BoundResult r;
  if (!e.uses_y) {
    r = with_alpha(std::numeric_limits<double>::quiet_NaN());
  } else {
    const TruncationArgs args{x / static_cast<double>(cat.n()), static_cast<double>(cat.n()), e.rule_p};
    switch (s.y_mode) {
      case YMode::Fixed: r = with_alpha(s.y); break;
      case YMode::Default: r = with_alpha(default_truncation_y(args)); break;
      case YMode::Scan: {
        const auto best =
            optimize_truncation_y([&](double y) { return with_alpha(y).raw_value; }, args, TruncationMode::NumericScan);
        r = with_alpha(best.argopt);
        break;
      }
    }
  }
  if (s.scale != 1.0) {
    r.raw_value *= s.scale;
    r.clipped_value = std::min(1.0, r.raw_value);
    r.note += (r.note.empty() ? "" : "; ") + std::string("raw value scaled by ") + fmt17(s.scale);
  }
  return r;
}

/// True for bounds on P(max S_k >= x) or P(S_n >= x); false for the bare
/// Gaussian-family functions.
inline bool is_tail_bound(const BoundSelection& s) {
  return s.name != "fuk_nagaev_h" && s.name != "bennett" && s.name != "bernstein1";
}

/// What to look at first when a bound fails a domination check.
inline std::string finding_hint(const BoundResult& b) {
  switch (b.family) {
    case BoundFamily::FukNagaevH:
    case BoundFamily::Bennett:
    case BoundFamily::Bernstein1:
    case BoundFamily::FukNagaevTail:
    case BoundFamily::WeakMoment:
      return "placement of alpha in the exponent of the Gaussian-family functions";
    case BoundFamily::BernsteinCond:
      return b.form == "Sharp" ? "sharp-form denominator B_n(1 + sqrt(2xM/B_n)) + xM"
                               : "Bernstein-condition constant M";
    case BoundFamily::Rio:
      return b.form == "YoungForm" ? "range-bound Young transform" : "missing (1 - alpha)^{-1} prefactor";
    case BoundFamily::ExpMoment: return "exponential-moment constants A, B";
    case BoundFamily::SemiExp: return "semi-exponential constant K_n";
    case BoundFamily::FukPth: return "Fuk-type constants";
    case BoundFamily::HoeffdingAzuma: return "final-sum statistic";
  }
  return "";
}

inline std::string describe_result(const std::string& id, const BoundResult& r, double x) {
  std::ostringstream os;
  auto opt = [](const std::optional<double>& v) { return v ? fmt17(*v) : std::string("-"); };
  os << "bound          " << id << "\n"
     << "family         " << to_string(r.family) << "\n"
     << "form           " << (r.form.empty() ? "-" : r.form) << "\n"
     << "x              " << fmt17(x) << "\n"
     << "alpha          " << opt(r.chosen.alpha) << "\n"
     << "y              " << opt(r.chosen.y) << "\n"
     << "t              " << opt(r.chosen.t) << "\n"
     << "raw_value      " << fmt17(r.raw_value) << "\n"
     << "clipped_value  " << fmt17(r.clipped_value) << "\n";
  if (r.degenerate) os << "degenerate     true\n";
  if (!r.note.empty()) os << "note           " << r.note << "\n";
  for (const auto& [k, v] : r.inputs) os << "input." << k << std::string(k.size() < 9 ? 9 - k.size() : 1, ' ') << fmt17(v) << "\n";
  for (const auto& [k, v] : r.extras) os << "extra." << k << " " << fmt17(v) << "\n";
  return os.str();
}

inline std::string cmd_eval(const ExperimentConfig& cfg, const std::string& bound_id, double x) {
  const MomentCatalog cat(cfg.distributions);
  const auto& sel = cfg.bound(bound_id);
  return describe_result(sel.id, evaluate_selection(sel, cat, x), x);
}

inline std::string cmd_sweep(const ExperimentConfig& cfg) {
  if (cfg.bounds.empty()) throw ConfigError("sweep needs at least one bound");
  const MomentCatalog cat(cfg.distributions);
  std::ostringstream os;
  os << "x,bound,alpha,y,raw_value,clipped_value\n";
  for (double x : cfg.run.x_grid) {
    for (const auto& sel : cfg.bounds) {
      const auto r = evaluate_selection(sel, cat, x);
      os << fmt17(x) << ',' << sel.id << ',' << (r.chosen.alpha ? fmt17(*r.chosen.alpha) : "") << ','
         << (r.chosen.y ? fmt17(*r.chosen.y) : "") << ',' << fmt17(r.raw_value) << ',' << fmt17(r.clipped_value)
         << '\n';
    }
  }
  return os.str();
}

struct ValidationOutcome {
  std::string csv;
  std::vector<std::string> findings;
  std::vector<std::string> skips;
  std::size_t checks = 0;
};

inline ValidationOutcome cmd_validate(const ExperimentConfig& cfg) {
  if (!cfg.model) throw ConfigError("validate needs a model section");
  if (cfg.run.reps < 1000) throw ConfigError("validate needs run.reps >= 1000");
  const auto wants = [&](const char* c, bool configured) {
    if (cfg.run.checks.empty()) return configured;
    if (!cfg.run.checks.count(c)) return false;
    if (!configured) throw ConfigError(std::string("check '") + c + "' requested but not configured");
    return true;
  };
  const bool do_dom = wants("domination", !cfg.bounds.empty());
  const bool do_convex = wants("convex", !cfg.convex_tests.empty());
  const bool do_sm = wants("supermartingale", cfg.supermartingale.has_value());

  const NAModel& model = *cfg.model;
  const MomentCatalog cat(cfg.distributions);
  const auto seed = cfg.run.seed;
  const auto threads = cfg.run.threads;
  ValidationOutcome out;
  std::ostringstream os;
  os << "check,model,x,bound,p_hat,ci_high,bound_raw,dominated,margin\n";
  auto row = [&](const std::string& check, const std::string& x, const std::string& bound, double p_hat,
                 double ci_high, double raw, bool ok, double margin) {
    os << check << ',' << model.name << ',' << x << ',' << bound << ',' << fmt17(p_hat) << ',' << fmt17(ci_high) << ','
       << fmt17(raw) << ',' << (ok ? "true" : "false") << ',' << fmt17(margin) << '\n';
    ++out.checks;
  };

  if (do_dom) {
    bool need_final = false;
    for (const auto& s : cfg.bounds) need_final |= s.name == "hoeffding_azuma";
    const auto max_est = estimate_tails(model, cfg.run.x_grid, cfg.run.reps, seed, Statistic::MaxPrefix, threads);
    std::vector<TailEstimate> fin_est;
    if (need_final) fin_est = estimate_tails(model, cfg.run.x_grid, cfg.run.reps, seed, Statistic::FinalSum, threads);
    for (std::size_t i = 0; i < cfg.run.x_grid.size(); ++i) {
      const double x = cfg.run.x_grid[i];
      for (const auto& sel : cfg.bounds) {
        if (!is_tail_bound(sel)) {
          out.skips.push_back(sel.id + ": not a tail bound");
          os << "skip," << model.name << ',' << fmt17(x) << ',' << sel.id << ",,,,,\n";
          continue;
        }
        BoundResult r;
        try {
          r = evaluate_selection(sel, cat, x);
        } catch (const DomainError& e) {
          out.skips.push_back(sel.id + " at x=" + fmt17(x) + ": " + e.what());
          os << "skip," << model.name << ',' << fmt17(x) << ',' << sel.id << ",,,,,\n";
          continue;
        } catch (const DivergenceError& e) {
          out.skips.push_back(sel.id + " at x=" + fmt17(x) + ": " + e.what());
          os << "skip," << model.name << ',' << fmt17(x) << ',' << sel.id << ",,,,,\n";
          continue;
        }
        const TailEstimate& est = statistic_for(r) == Statistic::FinalSum ? fin_est[i] : max_est[i];
        const auto v = domination_report({r}, est).front();
        row("domination", fmt17(x), sel.id, est.p_hat, est.ci_high_3sigma, r.raw_value, v.dominated, v.margin);
        if (!v.dominated) {
          out.findings.push_back("bound '" + sel.id + "' (" + v.bound + ") not dominated at x=" + fmt17(x) +
                                 ": p_hat + 3 se = " + fmt17(est.ci_high_3sigma) + " > " + fmt17(r.raw_value) +
                                 "; check " + finding_hint(r));
        }
      }
    }
  }

  if (do_convex) {
    const std::uint64_t cseed = detail::splitmix(seed ^ 0x636F6E766578ULL);
    for (const auto& f : cfg.convex_tests) {
      for (bool use_max : {false, true}) {
        if (use_max && !f.nondecreasing()) {
          out.skips.push_back(f.name() + ": maximum version needs nondecreasing f");
          continue;
        }
        const auto c = convex_comparison(model, f, cfg.run.reps, cseed, use_max, threads);
        // ci_high holds the value compared with bound_raw: lhs - 3 se of the paired difference
        row(use_max ? "convex_max" : "convex_sum", "", f.name(), c.lhs_hat, c.lhs_hat - 3.0 * c.diff_se, c.rhs_hat,
            c.pass, c.rhs_hat - c.lhs_hat);
        if (!c.pass) {
          out.findings.push_back(std::string(use_max ? "convex_max" : "convex_sum") + " " + f.name() +
                                 ": E f under NA exceeds the independent copy by more than 3 se");
        }
      }
    }
  }

  if (do_sm) {
    const std::uint64_t sseed = detail::splitmix(seed ^ 0x7375706572ULL);
    const auto reps = cfg.supermartingale_reps ? cfg.supermartingale_reps : cfg.run.reps;
    const auto r = supermartingale_max_moment(*cfg.supermartingale, reps, sseed, threads);
    row("supermartingale", "", "max_moment", r.lhs_hat, r.lhs_hat + 3.0 * r.lhs_se, r.rhs_exact, r.pass,
        r.rhs_exact - r.lhs_hat);
    if (!r.pass) out.findings.push_back("supermartingale maximal moment exceeds (E T_1)^alpha / (1 - alpha)");
  }
  out.csv = os.str();
  return out;
}

inline std::string cmd_compare(const ExperimentConfig& cfg) {
  if (cfg.bounds.size() < 2) throw ConfigError("compare needs at least two bounds");
  const MomentCatalog cat(cfg.distributions);
  std::ostringstream os;
  os << "x,rank,bound,family,raw_value,tightest,tie\n";
  struct Entry {
    std::string id;
    BoundResult r;
    std::size_t order;
  };
  for (double x : cfg.run.x_grid) {
    std::vector<Entry> entries;
    for (std::size_t i = 0; i < cfg.bounds.size(); ++i) {
      try {
        entries.push_back({cfg.bounds[i].id, evaluate_selection(cfg.bounds[i], cat, x), i});
      } catch (const DomainError&) {
        os << fmt17(x) << ",," << cfg.bounds[i].id << ",,,,\n";
      }
    }
    auto same = [](double a, double b) { return a == b || std::abs(a - b) <= 1e-12 * std::max(std::abs(a), std::abs(b)); };
    std::stable_sort(entries.begin(), entries.end(), [&](const Entry& a, const Entry& b) {
      if (!same(a.r.raw_value, b.r.raw_value)) return a.r.raw_value < b.r.raw_value;
      if (a.r.family != b.r.family) return a.r.family < b.r.family;
      return a.order < b.order;
    });
    for (std::size_t k = 0; k < entries.size(); ++k) {
      const auto& e = entries[k];
      const bool tie = (k > 0 && same(entries[k - 1].r.raw_value, e.r.raw_value)) ||
                       (k + 1 < entries.size() && same(entries[k + 1].r.raw_value, e.r.raw_value));
      std::string fam{to_string(e.r.family)};
      if (!e.r.form.empty()) fam += ":" + e.r.form;
      os << fmt17(x) << ',' << k + 1 << ',' << e.id << ',' << fam << ',' << fmt17(e.r.raw_value) << ','
         << (k == 0 ? "true" : "false") << ',' << (tie ? "true" : "false") << '\n';
    }
  }
  return os.str();
}

/// Writes via a temporary file and a rename, so a failed run leaves nothing behind.
inline void write_file_atomically(const std::string& path, const std::string& content) {
  const std::string tmp = path + ".partial";
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    if (!f) throw ConfigError("cannot open output '" + path + "'");
    f << content;
    f.flush();
    if (!f) {
      f.close();
      std::filesystem::remove(tmp);
      throw ConfigError("failed writing output '" + path + "'");
    }
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp);
    throw ConfigError("failed writing output '" + path + "': " + ec.message());
  }
}

inline int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"nadev: deviation bounds for sums of negatively associated variables"};
  app.require_subcommand(1, 1);
  std::string config_path, bound_id, out_path;
  std::optional<double> x;
  std::optional<std::uint64_t> reps, seed;
  std::optional<unsigned> threads;

  auto common = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "experiment configuration (JSON)")->required();
    sub->add_option("--out", out_path, "output file (default: run.output, else stdout)");
    sub->add_option("--reps", reps, "Monte Carlo replicates");
    sub->add_option("--seed", seed, "master seed");
    sub->add_option("--threads", threads, "worker threads (0 = all cores); never changes outputs");
  };
  auto* eval = app.add_subcommand("eval", "evaluate one bound at one x");
  common(eval);
  eval->add_option("--bound", bound_id, "bound id from the config")->required();
  eval->add_option("--x", x, "deviation level")->required();
  auto* sweep = app.add_subcommand("sweep", "write bound values over the x grid as CSV");
  common(sweep);
  auto* validate = app.add_subcommand("validate", "Monte Carlo validation of the configured bounds and checks");
  common(validate);
  auto* compare = app.add_subcommand("compare", "rank the configured bounds at each x");
  common(compare);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "nadev: usage error: " << e.what() << "\n";
    return kExitConfig;
  }

  try {
    auto cfg = load_config(config_path);
    if (reps) cfg.run.reps = *reps;
    if (seed) cfg.run.seed = *seed;
    if (threads) cfg.run.threads = *threads;
    if (!out_path.empty()) cfg.run.output = out_path;
    auto emit = [&](const std::string& text) {
      if (cfg.run.output.empty()) {
        out << text;
      } else {
        write_file_atomically(cfg.run.output, text);
      }
    };
    if (*eval) {
      out << cmd_eval(cfg, bound_id, *x);
    } else if (*sweep) {
      emit(cmd_sweep(cfg));
    } else if (*compare) {
      emit(cmd_compare(cfg));
    } else {
      const auto v = cmd_validate(cfg);
      emit(v.csv);
      for (const auto& s : v.skips) err << "nadev: skipped " << s << "\n";
      for (const auto& f : v.findings) err << "nadev: finding: " << f << "\n";
      err << "nadev: " << v.checks << " checks, " << v.findings.size() << " findings, " << v.skips.size()
          << " skipped\n";
      return v.findings.empty() ? kExitOk : kExitFinding;
    }
    return kExitOk;
  } catch (const ConfigError& e) {
    err << "nadev: config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const DomainError& e) {
    err << "nadev: domain error: " << e.what() << "\n";
  } catch (const DegenerateError& e) {
    err << "nadev: degenerate input: " << e.what() << "\n";
  } catch (const DivergenceError& e) {
    err << "nadev: divergent functional: " << e.what() << "\n";
  } catch (const ConvergenceError& e) {
    err << "nadev: no convergence: " << e.what() << "\n";
  } catch (const FactorizationError& e) {
    err << "nadev: factorization failed: " << e.what() << "\n";
  } catch (const MismatchError& e) {
    err << "nadev: mismatch: " << e.what() << "\n";
  } catch (const std::exception& e) {
    err << "nadev: error: " << e.what() << "\n";
  }
  return kExitDomain;
}

}  // namespace nadev
