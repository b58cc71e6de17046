#ifndef RENORMLAB_CLI_HPP
#define RENORMLAB_CLI_HPP

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "error.hpp"
#include "families.hpp"
#include "geometry.hpp"
#include "io.hpp"
#include "loperator.hpp"
#include "maps.hpp"
#include "renorm.hpp"
#include "solver.hpp"
#include "version.hpp"

namespace renormlab::cli {

struct RunConfig {
  int degree = 24;
  double tol = 1e-10;
  int tower_depth = 8;
  int grid = 512;
  int seed = 0;
  std::string output_dir = "renormlab-out";
};

inline nlohmann::json to_json(const RunConfig& c) {
  return {{"degree", c.degree},
          {"tol", c.tol},
          {"tower_depth", c.tower_depth},
          {"grid", c.grid},
          {"seed", c.seed},
          {"output_dir", c.output_dir}};
}

// Bad option combinations found after parsing; exit code 1.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// "0,1;1,2,0" -> two permutations.
inline std::vector<Permutation> parse_permutations(const std::string& s) {
  std::vector<Permutation> out;
  std::stringstream outer(s);
  std::string item;
  while (std::getline(outer, item, ';')) {
    Permutation p;
    std::stringstream inner(item);
    std::string v;
    while (std::getline(inner, v, ',')) {
      try {
        p.image.push_back(std::stoi(v));
      } catch (const std::exception&) {
        throw UsageError("bad permutation entry '" + v + "'");
      }
    }
    std::vector<int> sorted = p.image;
    std::sort(sorted.begin(), sorted.end());
    for (std::size_t i = 0; i < sorted.size(); ++i)
      if (sorted[i] != static_cast<int>(i)) throw UsageError("'" + item + "' is not a permutation");
    if (p.period() < 2) throw UsageError("permutations need at least two entries");
    out.push_back(std::move(p));
  }
  if (out.empty()) throw UsageError("empty permutation list");
  return out;
}

/// The combinatorics of the widest period-p window of the quadratic family.
inline Permutation standard_permutation(std::size_t p) {
  if (p == 2) return period_doubling_permutation();
  const auto ws = find_windows(QuadraticFamily{}, p, 0.0, QuadraticFamily::kMax, 20000);
  if (ws.empty()) throw WindowNotFound("no primitive period-" + std::to_string(p) + " window");
  return std::max_element(ws.begin(), ws.end(),
                          [](const Window& a, const Window& b) { return a.width() < b.width(); })
      ->theta;
}

inline std::vector<Permutation> parse_periods(const std::string& s) {
  std::vector<Permutation> out;
  std::stringstream ss(s);
  std::string v;
  while (std::getline(ss, v, ',')) {
    int p = 0;
    try {
      p = std::stoi(v);
    } catch (const std::exception&) {
      throw UsageError("bad period '" + v + "'");
    }
    if (p < 2 || p > 16) throw UsageError("periods must lie in [2, 16]");
    out.push_back(standard_permutation(static_cast<std::size_t>(p)));
  }
  if (out.empty()) throw UsageError("empty period list");
  return out;
}

struct Report {
  std::string command;
  nlohmann::json results = nlohmann::json::object();
  std::vector<std::string> diagnostics;
  std::map<std::string, std::string> csv;  // file name -> contents
  std::string summary;
};

inline std::string coeffs_csv(const std::vector<UnimodalMap>& maps) {
  std::ostringstream os;
  os << "element,j,coeff\n";
  for (std::size_t i = 0; i < maps.size(); ++i)
    for (std::size_t j = 0; j < maps[i].coeffs().size(); ++j)
      os << i << ',' << j << ',' << format_double(maps[i].coeffs()[j]) << '\n';
  return os.str();
}

inline std::string short_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

struct Options {
  RunConfig cfg;
  // feigenbaum / spectrum / orbit / converge
  int period = 2;
  std::string theta;
  std::string thetas;
  std::string periods;
  std::string map_file;
  // tower / geometry / sums / dimension
  std::string family = "feigenbaum";
  std::optional<double> c;
  double t = 3.0;
  double s = 0.9;
  double gamma = 3.0;
  int powers = 4;
  std::string parameter;
  // cascade / windows / converge
  int n = 10;
  bool bifurcation = false;
  int p = 2;
  double a = 0.0;
  double b = 2.0;
};

inline SolveOptions solve_options(const RunConfig& c) {
  SolveOptions o;
  o.degree = static_cast<std::size_t>(c.degree);
  o.tol = c.tol;
  return o;
}

inline Permutation single_theta(const Options& o) {
  if (!o.theta.empty()) {
    auto v = parse_permutations(o.theta);
    if (v.size() != 1) throw UsageError("--theta takes a single permutation");
    return v.front();
  }
  if (o.period < 2 || o.period > 16) throw UsageError("--period must lie in [2, 16]");
  return standard_permutation(static_cast<std::size_t>(o.period));
}

// The map a tower-style command works on.
struct Subject {
  std::optional<UnimodalMap> map;
  std::optional<QuadraticMap> quad;
  std::string label;
};

inline Subject subject(const Options& o, Report& rep) {
  Subject s;
  if (o.family == "quadratic") {
    if (!o.c) throw UsageError("--family quadratic needs --c");
    s.map = QuadraticFamily{}.member(*o.c);
    s.quad = QuadraticMap{*o.c};
    s.label = "quadratic c=" + short_double(*o.c);
  } else if (o.family == "feigenbaum") {
    auto fp = solve_fixed_point(single_theta(o), solve_options(o.cfg));
    rep.results["fixed_point"] = {{"lambda_star", fp.lambda_star}, {"residual", fp.residual}};
    s.map = std::move(fp.g);
    s.label = "fixed point";
  } else {
    throw UsageError("--family must be 'quadratic' or 'feigenbaum'");
  }
  return s;
}

inline IntervalTower subject_tower(const Subject& s, std::size_t depth) {
  return s.quad ? tower(*s.quad, depth) : tower(*s.map, depth);
}

// ---------------------------------------------------------------------------
// Commands

inline void cmd_feigenbaum(const Options& o, Report& rep) {
  const auto fp = solve_fixed_point(single_theta(o), solve_options(o.cfg));
  const auto sp = spectrum(fp.g);
  rep.results["fixed_point"] = to_json(fp);
  rep.results["alpha"] = 1.0 / fp.lambda_star;
  rep.results["delta"] = sp.delta;
  rep.results["gap"] = sp.gap;
  rep.results["unstable_count"] = sp.unstable_count;
  rep.results["hyperbolic"] = sp.hyperbolic;
  rep.results["quadratic_tail_constant"] = quadratic_tail_constant(fp.residual_history);
  if (!sp.hyperbolic) rep.diagnostics.push_back("hyperbolicity flag: unstable count != 1");
  rep.csv["feigenbaum_coeffs.csv"] = coeffs_csv({fp.g});
  rep.csv["eigenvalues.csv"] = eigenvalue_csv(sp);
  rep.summary = "lambda=" + short_double(fp.lambda_star) + " delta=" + short_double(sp.delta) +
                " residual=" + short_double(fp.residual) + " iters=" + std::to_string(fp.newton_iters);
}

inline void cmd_spectrum(const Options& o, Report& rep) {
  std::optional<UnimodalMap> f;
  if (!o.map_file.empty()) {
    std::ifstream is(o.map_file);
    if (!is) throw UsageError("cannot read map file '" + o.map_file + "'");
    nlohmann::json j;
    try {
      is >> j;
    } catch (const std::exception& e) {
      throw UsageError(std::string("bad map file: ") + e.what());
    }
    f = map_from_json(j);
  } else {
    auto fp = solve_fixed_point(single_theta(o), solve_options(o.cfg));
    rep.results["fixed_point"] = to_json(fp);
    f = std::move(fp.g);
  }
  const auto sp = spectrum(*f);
  rep.results["spectrum"] = to_json(sp);
  if (!sp.hyperbolic) rep.diagnostics.push_back("hyperbolicity flag: unstable count != 1");
  rep.csv["eigenvalues.csv"] = eigenvalue_csv(sp);
  rep.summary = "delta=" + short_double(sp.delta) + " gap=" + short_double(sp.gap) +
                " unstable=" + std::to_string(sp.unstable_count);
}

inline void cmd_orbit(const Options& o, Report& rep) {
  std::vector<Permutation> th;
  if (!o.thetas.empty())
    th = parse_permutations(o.thetas);
  else
    th = parse_periods(o.periods.empty() ? "2,3" : o.periods);
  const auto r = solve_periodic_orbit(th, solve_options(o.cfg));
  rep.results["orbit"] = to_json(r);
  rep.results["quadratic_tail_constant"] = quadratic_tail_constant(r.residual_history);
  rep.csv["orbit_coeffs.csv"] = coeffs_csv(r.cycle);
  rep.csv["eigenvalues.csv"] = eigenvalue_csv(r.multipliers);
  rep.summary = "m=" + std::to_string(th.size()) + " residual=" + short_double(r.residual) +
                " multiplier=" + short_double(r.multipliers.delta);
}

inline void cmd_tower(const Options& o, Report& rep) {
  const auto s = subject(o, rep);
  const auto t = subject_tower(s, static_cast<std::size_t>(o.cfg.tower_depth));
  rep.results["tower"] = tower_header_json(t);
  rep.results["largest_interval_constants"] = largest_interval_constants(t);
  if (t.truncated) rep.diagnostics.push_back("tower truncated: " + t.truncation_reason);
  rep.csv["tower.csv"] = tower_csv(t);
  rep.summary = s.label + " depth=" + std::to_string(t.depth()) + (t.truncated ? " (truncated)" : "");
}

inline void cmd_geometry(const Options& o, Report& rep) {
  const auto s = subject(o, rep);
  const auto t = subject_tower(s, static_cast<std::size_t>(o.cfg.tower_depth));
  const auto g = bounded_geometry(t);
  rep.results["geometry"] = to_json(g);
  if (g.near_degenerate) rep.diagnostics.push_back("near-degenerate geometry: tau < 0.01");
  std::ostringstream os;
  os << "k,kind,index,ratio\n";
  for (const auto& lr : g.levels) {
    for (std::size_t i = 0; i < lr.child.size(); ++i)
      os << lr.k << ",child," << i << ',' << format_double(lr.child[i]) << '\n';
    for (std::size_t i = 0; i < lr.gap.size(); ++i)
      os << lr.k << ",gap," << i << ',' << format_double(lr.gap[i]) << '\n';
  }
  rep.csv["geometry.csv"] = os.str();
  rep.summary = s.label + " tau=" + short_double(g.tau);
}

inline void cmd_sums(const Options& o, Report& rep) {
  const auto s = subject(o, rep);
  const auto t = subject_tower(s, static_cast<std::size_t>(o.cfg.tower_depth));
  const auto fit = spectral_sum(t, o.t);
  const auto ps = partition_sum(t, o.s);
  rep.results["spectral_sum"] = to_json(fit);
  rep.results["partition_sum"] = {{"s", o.s}, {"sums", ps}};
  rep.csv["spectral_sums.csv"] = sums_csv(fit.sums);
  rep.csv["partition_sums.csv"] = sums_csv(ps);

  // Norm growth of powers of the principal part of DT at the subject.
  const auto& f = *s.map;
  const auto L = renorm_derivative_as_loperator(f, detect(f));
  std::ostringstream os;
  os << "m,gamma_norm\n";
  std::vector<double> norms;
  for (int m = 1; m <= o.powers; ++m) {
    norms.push_back(gamma_norm(associated(power(L, static_cast<std::size_t>(m)), o.gamma),
                               static_cast<std::size_t>(o.cfg.grid)));
    os << m << ',' << format_double(norms.back()) << '\n';
  }
  rep.results["norm_growth"] = {{"gamma", o.gamma}, {"norms", norms}};
  rep.csv["norm_growth.csv"] = os.str();
  rep.summary = s.label + " mu(t=" + short_double(o.t) + ")=" + short_double(fit.mu);
}

inline void cmd_dimension(const Options& o, Report& rep) {
  DimensionReport d;
  if (!o.parameter.empty()) {
    const auto Theta = parse_permutations(o.parameter);
    const auto pc = parameter_cantor_dimension(QuadraticFamily{}, Theta,
                                               static_cast<std::size_t>(o.cfg.tower_depth));
    d = pc.dimension;
    rep.results["tower"] = tower_header_json(pc.tower);
    rep.csv["tower.csv"] = tower_csv(pc.tower);
    rep.summary = "parameter set";
  } else {
    const auto s = subject(o, rep);
    const auto t = subject_tower(s, static_cast<std::size_t>(o.cfg.tower_depth));
    d = hausdorff_dimension(t);
    rep.summary = s.label;
  }
  rep.results["dimension"] = to_json(d);
  rep.csv["partition_sums.csv"] = sums_csv(d.partition_sums);
  rep.summary += " s=" + short_double(d.s_estimate) + " stability=" + short_double(d.stability);
}

inline void cmd_cascade(const Options& o, Report& rep) {
  if (o.n < 4) throw UsageError("--n must be at least 4");
  const auto c = cascade(QuadraticFamily{}, static_cast<std::size_t>(o.n),
                         o.bifurcation ? CascadeKind::Bifurcation : CascadeKind::Superstable);
  rep.results["cascade"] = to_json(c);
  rep.csv["cascade.csv"] = cascade_csv(c);
  rep.summary = "delta=" + short_double(c.delta_estimate) + " c_inf=" + short_double(c.c_infinity);
}

inline void cmd_windows(const Options& o, Report& rep) {
  if (o.cfg.grid < 100) throw UsageError("--grid must be at least 100 for window scans");
  if (o.p < 2 || o.p > 16) throw UsageError("--p must lie in [2, 16]");
  const auto ws = find_windows(QuadraticFamily{}, static_cast<std::size_t>(o.p), o.a, o.b,
                               static_cast<std::size_t>(o.cfg.grid));
  nlohmann::json arr = nlohmann::json::array();
  std::ostringstream os;
  os << "p,theta,lo,hi,superstable_c\n";
  for (const auto& w : ws) {
    arr.push_back(to_json(w));
    std::string th = w.theta.to_string();
    std::replace(th.begin(), th.end(), ',', ' ');
    os << w.p << ',' << th << ',' << format_double(w.lo) << ',' << format_double(w.hi) << ','
       << format_double(w.superstable_c) << '\n';
  }
  rep.results["windows"] = std::move(arr);
  rep.csv["windows.csv"] = os.str();
  rep.summary = std::to_string(ws.size()) + " window(s) of period " + std::to_string(o.p);
}

inline void cmd_converge(const Options& o, Report& rep) {
  const double c = o.c ? *o.c : cascade(QuadraticFamily{}, 10).c_infinity;
  const auto fp = solve_fixed_point(period_doubling_permutation(), solve_options(o.cfg));
  const auto r = convergence_experiment(QuadraticMap{c}, fp.g, static_cast<std::size_t>(o.n));
  rep.results["c"] = c;
  rep.results["convergence"] = to_json(r);
  std::ostringstream os;
  os << "n,d_n\n";
  for (std::size_t i = 0; i < r.distances.size(); ++i) os << i << ',' << format_double(r.distances[i]) << '\n';
  rep.csv["converge.csv"] = os.str();
  rep.summary = "slope=" + short_double(r.slope) + " r2=" + short_double(r.r_squared);
}

// ---------------------------------------------------------------------------

inline void write_report(const Options& o, const Report& rep, const std::string& status,
                         const nlohmann::json& error) {
  nlohmann::json j{{"command", rep.command},
                   {"config", to_json(o.cfg)},
                   {"status", status},
                   {"results", rep.results},
                   {"diagnostics", rep.diagnostics},
                   {"version", kVersion}};
  if (!error.is_null()) j["error"] = error;
  const std::filesystem::path dir(o.cfg.output_dir);
  write_text_file(dir / (rep.command + ".json"), j.dump(2) + "\n");
  for (const auto& [name, text] : rep.csv) write_text_file(dir / name, text);
}

/// Parse argv, run one subcommand, write its report. Returns the exit code.
inline int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  Options o;
  CLI::App app{"renormlab: renormalization of unimodal maps"};
  app.set_config("--config", "", "flat key=value file; flags override it");
  app.set_version_flag("--version", std::string(kVersion));
  app.require_subcommand(1);
  app.allow_config_extras(CLI::config_extras_mode::error);
  app.add_option("--degree", o.cfg.degree, "polynomial degree of phi")->check(CLI::Range(10, 64));
  app.add_option("--tol", o.cfg.tol, "residual tolerance")->check(CLI::Range(1e-14, 1e-6));
  app.add_option("--tower-depth,--tower_depth,--depth", o.cfg.tower_depth, "tower depth")->check(CLI::Range(1, 12));
  app.add_option("--grid", o.cfg.grid, "scan or norm grid size")->check(CLI::PositiveNumber);
  app.add_option("--seed", o.cfg.seed, "seed for randomized instances");
  app.add_option("--output-dir,--output_dir,-o", o.cfg.output_dir, "directory for reports");

  std::map<std::string, std::function<void(const Options&, Report&)>> handlers;
  auto sub = [&](const std::string& name, const std::string& help, auto handler) {
    auto* s = app.add_subcommand(name, help);
    s->fallthrough();
    handlers[name] = handler;
    return s;
  };
  auto add_theta = [&](CLI::App* s) {
    s->add_option("--period", o.period, "renormalization period");
    s->add_option("--theta", o.theta, "explicit permutation, e.g. 1,2,0");
  };
  auto add_family = [&](CLI::App* s) {
    s->add_option("--family", o.family, "quadratic or feigenbaum")
        ->check(CLI::IsMember({"quadratic", "feigenbaum"}));
    s->add_option("--c", o.c, "quadratic parameter");
    add_theta(s);
  };

  auto* fe = sub("feigenbaum", "solve the fixed point and its spectrum", cmd_feigenbaum);
  add_theta(fe);
  auto* sp = sub("spectrum", "spectrum of DT at a map (default: the fixed point)", cmd_spectrum);
  add_theta(sp);
  sp->add_option("--map", o.map_file, "map JSON file");
  auto* orb = sub("orbit", "periodic orbit of R with given combinatorics", cmd_orbit);
  orb->add_option("--thetas", o.thetas, "permutations, ';'-separated");
  orb->add_option("--periods", o.periods, "periods, ','-separated (default 2,3)");
  add_family(sub("tower", "renormalization interval tower", cmd_tower));
  add_family(sub("geometry", "bounded-geometry ratios of the tower", cmd_geometry));
  auto* su = sub("sums", "interval sums and L-operator norm growth", cmd_sums);
  add_family(su);
  su->add_option("--t", o.t, "spectral-sum exponent")->check(CLI::Range(1.0 + 1e-12, 100.0));
  su->add_option("--s", o.s, "partition-sum exponent")->check(CLI::Range(1e-12, 1.0));
  su->add_option("--gamma", o.gamma, "positive-operator exponent")->check(CLI::PositiveNumber);
  su->add_option("--powers", o.powers, "largest operator power")->check(CLI::Range(1, 8));
  auto* di = sub("dimension", "Hausdorff dimension of the tower limit set", cmd_dimension);
  add_family(di);
  di->add_option("--parameter", o.parameter, "parameter-space set for these permutations");
  auto* ca = sub("cascade", "period-doubling cascade ratios", cmd_cascade);
  ca->add_option("--n", o.n, "number of doublings");
  ca->add_flag("--bifurcation", o.bifurcation, "bifurcation instead of superstable parameters");
  auto* wi = sub("windows", "renormalization windows of the quadratic family", cmd_windows);
  wi->add_option("--p", o.p, "period");
  wi->add_option("--a", o.a, "range start");
  wi->add_option("--b", o.b, "range end");
  auto* co = sub("converge", "distance of R^n f_c to the fixed point", cmd_converge);
  co->add_option("--c", o.c, "quadratic parameter (default: cascade accumulation)");
  co->add_option("--n", o.n, "number of renormalizations")->default_val(8);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::CallForVersion&) {
    out << kVersion << '\n';
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }

  Report rep;
  const auto* chosen = app.get_subcommands().front();
  rep.command = chosen->get_name();
  const auto t0 = std::chrono::steady_clock::now();
  try {
    handlers.at(rep.command)(o, rep);
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  } catch (const Error& e) {
    rep.diagnostics.push_back(e.what());
    write_report(o, rep, "error", {{"name", e.name()}, {"message", e.what()}});
    out << rep.command << ": " << e.name() << '\n';
    return 2;
  } catch (const std::exception& e) {
    rep.diagnostics.push_back(e.what());
    write_report(o, rep, "error", {{"name", "InternalError"}, {"message", e.what()}});
    out << rep.command << ": InternalError\n";
    return 2;
  }
  write_report(o, rep, "ok", nullptr);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  out << rep.command << ": " << rep.summary << " (" << short_double(secs) << " s)\n";
  return 0;
}

}  // namespace renormlab::cli

#endif  // RENORMLAB_CLI_HPP
