#ifndef RENORMLAB_GEOMETRY_HPP
#define RENORMLAB_GEOMETRY_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "error.hpp"
#include "io.hpp"
#include "renorm.hpp"

namespace renormlab {

// ---------------------------------------------------------------------------
// Bounded geometry

struct LevelRatios {
  std::size_t k = 0;  // parent level
  std::vector<double> child;
  std::vector<double> gap;
};

struct GeometryReport {
  std::vector<LevelRatios> levels;
  double tau = 0.0;
  std::size_t levels_checked = 0;
  bool all_interior = false;
  bool near_degenerate = false;  // tau below kNearDegenerateTau
};

inline constexpr double kNearDegenerateTau = 0.01;
inline constexpr double kNestingTol = 1e-10;
inline constexpr double kMinGap = 1e-14;

/// Child/parent and gap/parent length ratios for parents at levels 1..K-1.
/// Children are the next-level intervals inside a parent; gaps are the
/// components of the parent left uncovered by them.
inline GeometryReport bounded_geometry(const IntervalTower& t) {
  if (t.depth() < 2) throw DomainError("bounded_geometry needs tower depth >= 2");
  for (const auto& lv : t.levels)
    if (lv.intervals.empty()) throw EmptyLevel("level " + std::to_string(lv.k) + " is empty");

  GeometryReport rep;
  double tau = 0.5;
  bool interior = true;
  auto take = [&](double r) {
    if (!(r > 0.0 && r < 1.0)) interior = false;
    tau = std::min(tau, std::min(r, 1.0 - r));
  };
  for (std::size_t k = 1; k < t.depth(); ++k) {
    LevelRatios lr;
    lr.k = k;
    std::vector<Interval> kids = t.levels[k + 1].intervals;
    std::sort(kids.begin(), kids.end(), [](const Interval& a, const Interval& b) { return a.lo < b.lo; });
    for (const Interval& parent : t.levels[k].intervals) {
      const double len = parent.length();
      double cursor = parent.lo;
      for (const Interval& c : kids) {
        if (!parent.contains(c, kNestingTol)) continue;
        lr.child.push_back(c.length() / len);
        if (c.lo - cursor > kMinGap) lr.gap.push_back((c.lo - cursor) / len);
        cursor = std::max(cursor, c.hi);
      }
      if (parent.hi - cursor > kMinGap) lr.gap.push_back((parent.hi - cursor) / len);
    }
    for (double r : lr.child) take(r);
    for (double r : lr.gap) take(r);
    rep.levels.push_back(std::move(lr));
  }
  rep.levels_checked = rep.levels.size();
  rep.all_interior = interior;
  rep.tau = std::max(0.0, tau);
  rep.near_degenerate = rep.tau < kNearDegenerateTau;
  return rep;
}

/// max_i |Delta_{i,k}| / |Delta_{0,k}| per level.
inline std::vector<double> largest_interval_constants(const IntervalTower& t) {
  std::vector<double> c;
  for (const auto& lv : t.levels)
    if (!lv.intervals.empty()) c.push_back(lv.max_ratio_to_central());
  return c;
}

// ---------------------------------------------------------------------------
// Interval sums

struct DecayFit {
  double exponent_t = 0.0;
  std::vector<double> sums;    // S_k, k = 0..K
  std::vector<double> ratios;  // S_{k+1} / S_k
  double mu = 0.0;
  double c0 = 0.0;
};

/// S_k = sum_i |Delta_{i,k}|^t / |Delta_{i+1,k}| with the index read cyclically.
/// mu is the geometric mean of S_{k+1}/S_k for k >= 2.
inline DecayFit spectral_sum(const IntervalTower& t, double exponent) {
  if (!(exponent > 1.0)) throw DomainError("spectral_sum needs t > 1");
  if (t.depth() < 3) throw DomainError("spectral_sum needs tower depth >= 3");
  DecayFit fit;
  fit.exponent_t = exponent;
  for (const auto& lv : t.levels) {
    const auto& iv = lv.intervals;
    double s = 0.0;
    for (std::size_t i = 0; i < iv.size(); ++i)
      s += std::pow(iv[i].length(), exponent) / iv[(i + 1) % iv.size()].length();
    fit.sums.push_back(s);
  }
  for (std::size_t k = 0; k + 1 < fit.sums.size(); ++k)
    fit.ratios.push_back(fit.sums[k + 1] / fit.sums[k]);
  const std::size_t K = fit.sums.size() - 1;
  fit.mu = std::pow(fit.sums[K] / fit.sums[2], 1.0 / static_cast<double>(K - 2));
  for (std::size_t k = 0; k <= K; ++k)
    fit.c0 = std::max(fit.c0, fit.sums[k] / std::pow(fit.mu, static_cast<double>(k)));
  return fit;
}

/// Sigma_j |Delta_{j,k}|^s for k = 0..K.
inline std::vector<double> partition_sum(const IntervalTower& t, double s) {
  if (!(s > 0.0 && s <= 1.0)) throw DomainError("partition_sum needs 0 < s <= 1");
  std::vector<double> out;
  for (const auto& lv : t.levels) {
    double acc = 0.0;
    for (const auto& iv : lv.intervals) acc += std::pow(iv.length(), s);
    out.push_back(acc);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Dimension

struct DimensionOptions {
  std::size_t min_depth = 5;
  double lo = 0.01;
  double hi = 0.99;
  double tol = 1e-12;
};

struct DimensionReport {
  double s_estimate = 0.0;
  double bracket_lo = 0.0;
  double bracket_hi = 0.0;
  std::size_t first_level = 0;  // main fit uses levels first_level..last_level
  std::size_t last_level = 0;
  double s_early = 0.0;  // levels first..last-1
  double s_late = 0.0;   // levels first+1..last
  double stability = 0.0;
  std::vector<double> partition_sums;  // at s_estimate
  double eta = 0.0;                    // decay ratio at eta_s
  double eta_s = 0.0;

  double bracket_width() const { return bracket_hi - bracket_lo; }
};

namespace detail {

// Mean log-ratio of the level-b and level-a partition sums.
inline double log_ratio(const IntervalTower& t, double s, std::size_t a, std::size_t b) {
  auto sum = [&](std::size_t k) {
    double acc = 0.0;
    for (const auto& iv : t.levels[k].intervals) acc += std::pow(iv.length(), s);
    return acc;
  };
  return std::log(sum(b) / sum(a)) / static_cast<double>(b - a);
}

inline std::pair<double, double> critical_exponent(const IntervalTower& t, std::size_t a,
                                                   std::size_t b, const DimensionOptions& opt) {
  double lo = opt.lo, hi = opt.hi;
  double flo = log_ratio(t, lo, a, b), fhi = log_ratio(t, hi, a, b);
  if (!(flo > 0.0 && fhi < 0.0))
    throw NoBracket("partition-sum ratio does not change sign on (" + format_double(opt.lo) + ", " +
                    format_double(opt.hi) + ") over levels " + std::to_string(a) + ".." +
                    std::to_string(b));
  while (hi - lo > opt.tol) {
    const double m = 0.5 * (lo + hi);
    (log_ratio(t, m, a, b) > 0.0 ? lo : hi) = m;
  }
  return {lo, hi};
}

}  // namespace detail

/// Critical exponent of the partition sums: zero in s of the level-averaged
/// log(Sigma_{k+1}/Sigma_k), by bisection.
inline DimensionReport hausdorff_dimension(const IntervalTower& t, const DimensionOptions& opt = {}) {
  const std::size_t K = t.depth();
  if (K < opt.min_depth || K < 3)
    throw DomainError("hausdorff_dimension needs tower depth >= " +
                      std::to_string(std::max<std::size_t>(opt.min_depth, 3)));
  for (const auto& lv : t.levels)
    if (lv.intervals.empty()) throw EmptyLevel("level " + std::to_string(lv.k) + " is empty");
  const std::size_t a = std::max<std::size_t>(1, std::min<std::size_t>(3, K - 2));
  DimensionReport rep;
  rep.first_level = a;
  rep.last_level = K;
  const auto [lo, hi] = detail::critical_exponent(t, a, K, opt);
  rep.bracket_lo = lo;
  rep.bracket_hi = hi;
  rep.s_estimate = 0.5 * (lo + hi);
  auto early = detail::critical_exponent(t, a, K - 1, opt);
  auto late = detail::critical_exponent(t, a + 1, K, opt);
  rep.s_early = 0.5 * (early.first + early.second);
  rep.s_late = 0.5 * (late.first + late.second);
  rep.stability = std::abs(rep.s_early - rep.s_late);
  rep.partition_sums = partition_sum(t, rep.s_estimate);
  rep.eta_s = std::min(1.0, rep.s_estimate + 0.1);
  rep.eta = std::exp(detail::log_ratio(t, rep.eta_s, a, K));
  return rep;
}

// ---------------------------------------------------------------------------
// Synthetic towers

/// n equal children of relative length r per parent, equally spaced with the
/// outer ones flush to the parent ends. Level 0 is [0, 1].
inline IntervalTower self_similar_tower(std::size_t n, double r, std::size_t K) {
  if (n < 2 || !(r > 0.0) || !(static_cast<double>(n) * r < 1.0))
    throw DomainError("self-similar tower needs n >= 2 and 0 < n r < 1");
  const double gap = (1.0 - static_cast<double>(n) * r) / static_cast<double>(n - 1);
  std::vector<std::vector<Interval>> levels{{{0.0, 1.0}}};
  for (std::size_t k = 1; k <= K; ++k) {
    std::vector<Interval> next;
    for (const Interval& p : levels.back()) {
      const double L = p.length();
      for (std::size_t j = 0; j < n; ++j) {
        const double lo = p.lo + static_cast<double>(j) * (r + gap) * L;
        next.push_back({lo, lo + r * L});
      }
    }
    levels.push_back(std::move(next));
  }
  return tower_from_levels(std::move(levels));
}

inline IntervalTower middle_thirds_tower(std::size_t K) { return self_similar_tower(2, 1.0 / 3.0, K); }

// ---------------------------------------------------------------------------
// Export

inline std::string sums_csv(const std::vector<double>& sums) {
  std::ostringstream os;
  os << "k,S_k\n";
  for (std::size_t k = 0; k < sums.size(); ++k) os << k << ',' << format_double(sums[k]) << '\n';
  return os.str();
}

inline nlohmann::json to_json(const GeometryReport& g) {
  nlohmann::json levels = nlohmann::json::array();
  for (const auto& lr : g.levels) {
    auto mn = [](const std::vector<double>& v) {
      return v.empty() ? 0.0 : *std::min_element(v.begin(), v.end());
    };
    auto mx = [](const std::vector<double>& v) {
      return v.empty() ? 0.0 : *std::max_element(v.begin(), v.end());
    };
    levels.push_back({{"k", lr.k},
                      {"child_min", mn(lr.child)},
                      {"child_max", mx(lr.child)},
                      {"gap_min", mn(lr.gap)},
                      {"gap_max", mx(lr.gap)},
                      {"children", lr.child.size()},
                      {"gaps", lr.gap.size()}});
  }
  return {{"tau", g.tau},
          {"levels_checked", g.levels_checked},
          {"all_interior", g.all_interior},
          {"near_degenerate", g.near_degenerate},
          {"levels", std::move(levels)}};
}

inline nlohmann::json to_json(const DecayFit& f) {
  return {{"exponent_t", f.exponent_t},
          {"sums", f.sums},
          {"ratios", f.ratios},
          {"mu", f.mu},
          {"c0", f.c0}};
}

inline nlohmann::json to_json(const DimensionReport& d) {
  return {{"s_estimate", d.s_estimate},
          {"bracket", {d.bracket_lo, d.bracket_hi}},
          {"levels", {d.first_level, d.last_level}},
          {"s_early", d.s_early},
          {"s_late", d.s_late},
          {"stability", d.stability},
          {"partition_sums", d.partition_sums},
          {"eta", d.eta},
          {"eta_s", d.eta_s}};
}

}  // namespace renormlab

#endif  // RENORMLAB_GEOMETRY_HPP
