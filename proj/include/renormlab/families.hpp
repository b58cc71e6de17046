#ifndef RENORMLAB_FAMILIES_HPP
#define RENORMLAB_FAMILIES_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "error.hpp"
#include "geometry.hpp"
#include "io.hpp"
#include "maps.hpp"
#include "parallel.hpp"
#include "renorm.hpp"

namespace renormlab {

// ---------------------------------------------------------------------------
// Superstable parameters: roots of c -> f_c^q(0)

struct SuperstableParameter {
  std::size_t q = 0;
  double c = 0.0;
  double residual = 0.0;  // |f_c^q(0)|
};

struct ScanOptions {
  double lo = 0.0;
  double hi = QuadraticFamily::kMax;
  std::size_t grid = 2000;
};

namespace detail {

inline double critical_orbit(double c, std::size_t q) { return iterate(QuadraticMap{c}, 0.0, q); }

inline bool has_smaller_period(double c, std::size_t q) {
  for (std::size_t d = 1; d < q; ++d)
    if (q % d == 0 && std::abs(critical_orbit(c, d)) < 1e-6) return true;
  return false;
}

// Bisection to the floating-point limit on a sign-changing bracket.
template <class F>
double bisect(F&& h, double a, double b) {
  double fa = h(a);
  for (int it = 0; it < 200; ++it) {
    const double m = 0.5 * (a + b);
    if (m <= a || m >= b) break;
    const double fm = h(m);
    if (fm == 0.0) return m;
    if ((fm < 0.0) == (fa < 0.0)) {
      a = m;
      fa = fm;
    } else {
      b = m;
    }
  }
  return std::abs(h(a)) <= std::abs(h(b)) ? a : b;
}

// First root of f_c^q(0) with exact period q when stepping upward from `from`.
inline std::optional<SuperstableParameter> first_superstable(std::size_t q, double from, double to,
                                                             double step) {
  auto h = [q](double c) { return critical_orbit(c, q); };
  double a = from, fa = h(a);
  while (a < to) {
    const double b = std::min(a + step, to);
    const double fb = h(b);
    double root = std::numeric_limits<double>::quiet_NaN();
    if (fb == 0.0)
      root = b;
    else if ((fa < 0.0) != (fb < 0.0) && fa != 0.0)
      root = bisect(h, a, b);
    if (!std::isnan(root) && !has_smaller_period(root, q))
      return SuperstableParameter{q, root, std::abs(h(root))};
    a = b;
    fa = fb;
    if (b >= to) break;
  }
  return std::nullopt;
}

}  // namespace detail

/// Superstable parameters for increasing periods q_1 < q_2 < ...: each is the
/// first exact-period root above the previous one.
inline std::vector<SuperstableParameter> superstable_parameters(const QuadraticFamily&,
                                                                const std::vector<std::size_t>& periods,
                                                                const ScanOptions& opt = {}) {
  std::vector<SuperstableParameter> out;
  double from = opt.lo;
  for (std::size_t q : periods) {
    double step = (opt.hi - from) / static_cast<double>(opt.grid);
    if (out.size() >= 2) step = std::min(step, (out.back().c - out[out.size() - 2].c) / 64.0);
    const double start = out.empty() ? from : from + 1e-3 * step;
    auto r = detail::first_superstable(q, start, opt.hi, step);
    if (!r) throw BracketNotFound("no superstable parameter of period " + std::to_string(q));
    out.push_back(*r);
    from = r->c;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Period-doubling cascade

enum class CascadeKind { Superstable, Bifurcation };

struct CascadeReport {
  CascadeKind kind = CascadeKind::Superstable;
  std::vector<std::size_t> periods;  // 2^n
  std::vector<double> params;        // c_n, n = 1..n_max
  std::vector<double> residuals;
  std::vector<double> ratios;  // (c_n - c_{n-1}) / (c_{n+1} - c_n), n = 2..n_max-1
  double delta_estimate = 0.0;
  double c_infinity = 0.0;
};

namespace detail {

inline double aitken(const std::vector<double>& r) {
  const std::size_t n = r.size();
  if (n < 3) return r.back();
  const double a = r[n - 3], b = r[n - 2], c = r[n - 1];
  const double den = c - 2.0 * b + a;
  if (std::abs(den) < 1e-300) return c;
  return c - (c - b) * (c - b) / den;
}

// Period-doubling bifurcation of the 2^(n-1) cycle: solve f^q(x) = x and
// (f^q)'(x) = -1 in (x, c) by Newton, with forward-mode derivatives.
inline double bifurcation_parameter(std::size_t q, double c_lo, double c_hi) {
  double c = c_lo + 0.25 * (c_hi - c_lo);
  // Attracting cycle point near the critical value.
  double x = iterate(QuadraticMap{c}, 0.0, 64 * q + 1);
  for (int it = 0; it < 100; ++it) {
    double y = x, a = 1.0, b = 0.0, e = 0.0, g = 0.0;
    for (std::size_t m = 0; m < q; ++m) {
      const double yn = 1.0 - c * y * y;
      const double an = -2.0 * c * y * a;
      const double bn = -y * y - 2.0 * c * y * b;
      const double en = -2.0 * c * (a * a + y * e);
      const double gn = -2.0 * y * a - 2.0 * c * (b * a + y * g);
      y = yn;
      a = an;
      b = bn;
      e = en;
      g = gn;
    }
    const double F1 = y - x, F2 = a + 1.0;
    const double J11 = a - 1.0, J12 = b, J21 = e, J22 = g;
    const double det = J11 * J22 - J12 * J21;
    if (det == 0.0) break;
    const double dx = (-F1 * J22 + F2 * J12) / det;
    const double dc = (-F2 * J11 + F1 * J21) / det;
    x += dx;
    c += dc;
    if (std::abs(dx) + std::abs(dc) < 1e-15) break;
  }
  return c;
}

}  // namespace detail

/// Superstable (default) or bifurcation parameters of the doubling cascade,
/// ratio sequence, Aitken-extrapolated delta and the accumulation point.
inline CascadeReport cascade(const QuadraticFamily& fam, std::size_t n_max,
                             CascadeKind kind = CascadeKind::Superstable) {
  if (n_max < 4) throw DomainError("cascade needs n_max >= 4");
  CascadeReport rep;
  rep.kind = kind;
  std::vector<std::size_t> q;
  for (std::size_t n = 1; n <= n_max; ++n) q.push_back(std::size_t{1} << n);
  const auto ss = superstable_parameters(fam, q);
  for (const auto& s : ss) {
    rep.periods.push_back(s.q);
    if (kind == CascadeKind::Superstable) {
      rep.params.push_back(s.c);
      rep.residuals.push_back(s.residual);
    }
  }
  if (kind == CascadeKind::Bifurcation) {
    // b_1 = 3/4 bounds the fixed point's doubling; b_n lies between c_{n-1} and c_n.
    rep.params.push_back(0.75);
    rep.residuals.push_back(0.0);
    for (std::size_t n = 2; n <= n_max; ++n) {
      const double b = detail::bifurcation_parameter(q[n - 2], ss[n - 2].c, ss[n - 1].c);
      rep.params.push_back(b);
      rep.residuals.push_back(0.0);
    }
  }
  for (std::size_t i = 1; i + 1 < rep.params.size(); ++i)
    rep.ratios.push_back((rep.params[i] - rep.params[i - 1]) /
                         (rep.params[i + 1] - rep.params[i]));
  rep.delta_estimate = detail::aitken(rep.ratios);
  const std::size_t N = rep.params.size();
  rep.c_infinity =
      rep.params[N - 1] + (rep.params[N - 1] - rep.params[N - 2]) / (rep.delta_estimate - 1.0);
  return rep;
}

inline std::string cascade_csv(const CascadeReport& r) {
  std::ostringstream os;
  os << "n,c_n,ratio\n";
  for (std::size_t i = 0; i < r.params.size(); ++i) {
    os << (i + 1) << ',' << format_double(r.params[i]) << ',';
    if (i >= 1 && i - 1 < r.ratios.size()) os << format_double(r.ratios[i - 1]);
    os << '\n';
  }
  return os.str();
}

inline nlohmann::json to_json(const CascadeReport& r) {
  return {{"kind", r.kind == CascadeKind::Superstable ? "superstable" : "bifurcation"},
          {"periods", r.periods},
          {"params", r.params},
          {"residuals", r.residuals},
          {"ratios", r.ratios},
          {"delta_estimate", r.delta_estimate},
          {"c_infinity", r.c_infinity}};
}

// ---------------------------------------------------------------------------
// Windows

struct Window {
  std::size_t p = 0;
  Permutation theta;
  double lo = 0.0;
  double hi = 0.0;
  double superstable_c = std::numeric_limits<double>::quiet_NaN();
  std::size_t superstable_period = 0;

  double width() const { return hi - lo; }
  bool contains(double c) const { return c >= lo && c <= hi; }
};

inline constexpr double kWindowEdgeTol = 1e-8;

/// True when f_c renormalizes with the combinatorics thetas[0], ...,
/// thetas[depth-1] in turn, each with minimal period.
inline bool has_itinerary(double c, const std::vector<Permutation>& thetas, std::size_t depth) {
  if (!(c > 0.0 && c <= QuadraticFamily::kMax)) return false;
  const QuadraticMap f{c};
  std::size_t pk = 1;
  double lk = 1.0;
  for (std::size_t j = 0; j < depth; ++j) {
    const Permutation& th = thetas[j % thetas.size()];
    const RenormalizedView<QuadraticMap> view(f, pk, lk);
    for (std::size_t q = 2; q < th.period(); ++q)
      if (test_period(view, q).status != DetectStatus::NotRenormalizable) return false;
    const Detection d = test_period(view, th.period());
    if (!d || d.step->perm != th) return false;
    pk *= d.step->p;
    lk *= d.step->lambda;
    if (2.0 * std::abs(lk) < kLengthFloor) return false;
  }
  return true;
}

namespace detail {

// Refine the flip of `pred` between a point inside and one outside.
template <class Pred>
double refine_edge(Pred&& pred, double inside, double outside, double tol) {
  while (std::abs(outside - inside) > tol) {
    const double m = 0.5 * (inside + outside);
    if (m == inside || m == outside) break;
    (pred(m) ? inside : outside) = m;
  }
  return inside;
}

// Maximal runs of grid points in [lo, hi] where pred holds, edges refined.
template <class Pred>
std::vector<Interval> scan_runs(Pred&& pred, double lo, double hi, std::size_t grid, double tol) {
  std::vector<double> cs(grid + 1);
  for (std::size_t i = 0; i <= grid; ++i)
    cs[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(grid);
  std::vector<char> in(grid + 1, 0);
  parallel_for(grid + 1, [&](std::size_t i) { in[i] = pred(cs[i]) ? 1 : 0; });
  std::vector<Interval> runs;
  for (std::size_t i = 0; i <= grid;) {
    if (!in[i]) {
      ++i;
      continue;
    }
    std::size_t j = i;
    while (j + 1 <= grid && in[j + 1]) ++j;
    const double a = i == 0 ? cs[0] : refine_edge(pred, cs[i], cs[i - 1], tol);
    const double b = j == grid ? cs[grid] : refine_edge(pred, cs[j], cs[j + 1], tol);
    runs.push_back({a, b});
    i = j + 1;
  }
  return runs;
}

inline double edge_tolerance(double lo, double hi) {
  return std::max(std::min(kWindowEdgeTol, 1e-6 * (hi - lo)), 4e-16 * std::max(1.0, std::abs(hi)));
}

}  // namespace detail

/// Maximal parameter runs in [a, b] where f_c renormalizes with period p and
/// a constant permutation, annotated with the period-2p superstable parameter
/// inside (the period-p one sits on the window's lower edge).
inline std::vector<Window> find_windows(const QuadraticFamily&, std::size_t p, double a, double b,
                                        std::size_t grid = 2000) {
  if (grid < 100) throw DomainError("find_windows needs grid >= 100");
  a = std::max(a, 1e-12);
  b = std::min(b, QuadraticFamily::kMax);
  std::vector<double> cs(grid + 1);
  std::vector<std::optional<Permutation>> perms(grid + 1);
  for (std::size_t i = 0; i <= grid; ++i)
    cs[i] = a + (b - a) * static_cast<double>(i) / static_cast<double>(grid);
  parallel_for(grid + 1, [&](std::size_t i) {
    const Detection d = detect_status(QuadraticMap{cs[i]});
    if (d && d.step->p == p) perms[i] = d.step->perm;
  });
  std::vector<Window> out;
  for (std::size_t i = 0; i <= grid;) {
    if (!perms[i]) {
      ++i;
      continue;
    }
    const Permutation th = *perms[i];
    std::size_t j = i;
    while (j + 1 <= grid && perms[j + 1] && *perms[j + 1] == th) ++j;
    auto pred = [&](double c) { return has_itinerary(c, {th}, 1); };
    Window w;
    w.p = p;
    w.theta = th;
    w.lo = i == 0 ? cs[0] : detail::refine_edge(pred, cs[i], cs[i - 1], kWindowEdgeTol);
    w.hi = j == grid ? cs[grid] : detail::refine_edge(pred, cs[j], cs[j + 1], kWindowEdgeTol);
    w.superstable_period = 2 * p;
    const double step = std::max(w.width() / 2000.0, 1e-15);
    if (auto s = detail::first_superstable(2 * p, w.lo, w.hi, step)) w.superstable_c = s->c;
    out.push_back(std::move(w));
    i = j + 1;
  }
  return out;
}

/// The parameter window of a single permutation in (0, 2].
inline Window window_of(const QuadraticFamily& fam, const Permutation& theta,
                        std::size_t grid = 20000) {
  for (auto& w : find_windows(fam, theta.period(), 0.0, QuadraticFamily::kMax, grid))
    if (w.theta == theta) return w;
  throw WindowNotFound("no window for permutation " + theta.to_string());
}

inline nlohmann::json to_json(const Window& w) {
  return {{"p", w.p},
          {"theta", w.theta.image},
          {"interval", {w.lo, w.hi}},
          {"superstable_c", w.superstable_c},
          {"superstable_period", w.superstable_period}};
}

// ---------------------------------------------------------------------------
// Infinitely renormalizable parameters by nested windows

struct NestedBracket {
  double c = 0.0;
  double lo = 0.0;
  double hi = 0.0;
  std::vector<Interval> brackets;  // depth 1..K
  bool truncated = false;

  double width() const { return hi - lo; }
};

namespace detail {

// Longest sub-window of [lo, hi] whose itinerary extends to `depth`.
inline std::optional<Interval> sub_window(const std::vector<Permutation>& thetas, std::size_t depth,
                                          double lo, double hi, std::size_t grid) {
  auto pred = [&](double c) { return has_itinerary(c, thetas, depth); };
  auto runs = scan_runs(pred, lo, hi, grid, edge_tolerance(lo, hi));
  if (runs.empty()) return std::nullopt;
  return *std::max_element(runs.begin(), runs.end(), [](const Interval& a, const Interval& b) {
    return a.length() < b.length();
  });
}

}  // namespace detail

/// Nested-window bisection for the itinerary thetas (cycled to `depth`).
inline NestedBracket infinitely_renormalizable_parameter(const QuadraticFamily&,
                                                         const std::vector<Permutation>& thetas,
                                                         std::size_t depth,
                                                         std::size_t grid = 2000) {
  if (thetas.empty()) throw DomainError("empty itinerary");
  if (depth == 0) throw DomainError("depth must be positive");
  NestedBracket out;
  double lo = 1e-12, hi = QuadraticFamily::kMax;
  for (std::size_t k = 1; k <= depth; ++k) {
    auto w = detail::sub_window(thetas, k, lo, hi, grid);
    if (!w) throw WindowNotFound("itinerary window missing at depth " + std::to_string(k));
    out.brackets.push_back(*w);
    lo = w->lo;
    hi = w->hi;
    if (hi - lo < 4e-16 * hi) {
      out.truncated = true;
      break;
    }
  }
  out.lo = lo;
  out.hi = hi;
  out.c = 0.5 * (lo + hi);
  return out;
}

// ---------------------------------------------------------------------------
// Parameter-space Cantor set

struct ParameterCantorReport {
  IntervalTower tower;
  DimensionReport dimension;
  std::vector<std::vector<std::vector<int>>> itineraries;  // per level, per window: period sequence
};

inline ParameterCantorReport parameter_cantor_dimension(const QuadraticFamily&,
                                                        const std::vector<Permutation>& Theta,
                                                        std::size_t depth,
                                                        std::size_t grid = 2000) {
  if (Theta.size() < 2)
    throw SingleItinerary("a single itinerary gives a point; need at least two permutations");
  if (depth < 3 || depth > 6) throw DomainError("parameter tower depth must be in [3, 6]");

  struct Node {
    std::vector<Permutation> word;
    Interval iv;
  };
  std::vector<std::vector<Interval>> levels{{{0.0, QuadraticFamily::kMax}}};
  ParameterCantorReport rep;
  rep.itineraries.push_back({{}});
  std::vector<Node> frontier{{{}, {1e-12, QuadraticFamily::kMax}}};
  for (std::size_t k = 1; k <= depth; ++k) {
    std::vector<Node> next;
    for (const Node& n : frontier) {
      for (const Permutation& th : Theta) {
        auto word = n.word;
        word.push_back(th);
        auto w = detail::sub_window(word, k, n.iv.lo, n.iv.hi, grid);
        if (!w)
          throw WindowNotFound("no parameter window at depth " + std::to_string(k));
        next.push_back({std::move(word), *w});
      }
    }
    std::sort(next.begin(), next.end(), [](const Node& a, const Node& b) { return a.iv.lo < b.iv.lo; });
    std::vector<Interval> lv;
    std::vector<std::vector<int>> its;
    for (const auto& n : next) {
      lv.push_back(n.iv);
      std::vector<int> ps;
      for (const auto& th : n.word) ps.push_back(static_cast<int>(th.period()));
      its.push_back(std::move(ps));
    }
    levels.push_back(std::move(lv));
    rep.itineraries.push_back(std::move(its));
    frontier = std::move(next);
  }
  rep.tower = tower_from_levels(std::move(levels));
  DimensionOptions opt;
  opt.min_depth = 3;
  rep.dimension = hausdorff_dimension(rep.tower, opt);
  return rep;
}

}  // namespace renormlab

#endif  // RENORMLAB_FAMILIES_HPP
