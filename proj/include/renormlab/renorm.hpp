#ifndef RENORMLAB_RENORM_HPP
#define RENORMLAB_RENORM_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "error.hpp"
#include "io.hpp"
#include "maps.hpp"

namespace renormlab {

struct Interval {
  double lo = 0.0;
  double hi = 0.0;

  double length() const { return hi - lo; }
  double mid() const { return 0.5 * (lo + hi); }
  bool contains(double x, double tol = 0.0) const { return x >= lo - tol && x <= hi + tol; }
  bool contains(const Interval& o, double tol = 0.0) const {
    return o.lo >= lo - tol && o.hi <= hi + tol;
  }
};

/// Unimodal permutation: image[i] is the left-to-right rank of the i-th
/// interval of the renormalization cycle.
struct Permutation {
  std::vector<int> image;

  std::size_t period() const { return image.size(); }
  friend bool operator==(const Permutation&, const Permutation&) = default;

  std::string to_string() const {
    std::string s;
    for (std::size_t i = 0; i < image.size(); ++i) {
      if (i) s += ',';
      s += std::to_string(image[i]);
    }
    return s;
  }
};

inline Permutation period_doubling_permutation() { return Permutation{{0, 1}}; }

/// One renormalization: period, scaling f^p(0), spatial order, and the
/// first-level cycle of intervals f^i([-|lambda|, |lambda|]).
struct RenormStep {
  std::size_t p = 0;
  double lambda = 0.0;
  Permutation perm;
  std::vector<Interval> intervals;
};

enum class DetectStatus { Renormalizable, NotRenormalizable, DegenerateScaling };

struct Detection {
  DetectStatus status = DetectStatus::NotRenormalizable;
  std::optional<RenormStep> step;
  std::string reason;

  explicit operator bool() const { return status == DetectStatus::Renormalizable; }
};

struct DetectOptions {
  std::size_t p_max = 16;
  std::size_t grid = 64;  // uniform subintervals of the central interval
};

inline constexpr double kDegenerateScaling = 1e-8;

namespace detail {

// Hull of f over an interval, from both endpoints, the midpoint and the
// critical point when it lies inside. Exact when f is monotone off 0.
template <UnimodalLike M>
Interval image_hull(const M& f, const Interval& iv) {
  double lo = std::min(f.eval(iv.lo), f.eval(iv.hi));
  double hi = std::max(f.eval(iv.lo), f.eval(iv.hi));
  const double m = f.eval(iv.mid());
  lo = std::min(lo, m);
  hi = std::max(hi, m);
  if (iv.contains(0.0)) {
    const double c = f.eval(0.0);
    lo = std::min(lo, c);
    hi = std::max(hi, c);
  }
  return {lo, hi};
}

inline std::optional<Permutation> ranks(const std::vector<Interval>& ivs) {
  std::vector<std::size_t> order(ivs.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return ivs[a].lo < ivs[b].lo; });
  for (std::size_t r = 1; r < order.size(); ++r)
    if (!(ivs[order[r - 1]].hi < ivs[order[r]].lo)) return std::nullopt;
  Permutation perm;
  perm.image.assign(ivs.size(), 0);
  for (std::size_t r = 0; r < order.size(); ++r) perm.image[order[r]] = static_cast<int>(r);
  return perm;
}

}  // namespace detail

/// Grid test of renormalizability with a single candidate period p.
template <UnimodalLike M>
Detection test_period(const M& f, std::size_t p, std::size_t grid = 64) {
  Detection out;
  const double lambda = iterate(f, 0.0, p);
  const double L = std::abs(lambda);
  if (L <= kDegenerateScaling) {
    out.status = DetectStatus::DegenerateScaling;
    out.reason = "|f^" + std::to_string(p) + "(0)| <= 1e-8";
    return out;
  }
  if (L >= 1.0 - kDegenerateScaling) {
    out.reason = "p=" + std::to_string(p) + ": |lambda| too close to 1";
    return out;
  }

  // Invariance and unimodality of f^p on [-L, L].
  if (grid % 2) ++grid;
  const double slack = 1e-12 * L;
  int sign_changes = 0;
  int last_sign = 0;
  for (std::size_t i = 0; i <= grid; ++i) {
    double x = -L + 2.0 * L * static_cast<double>(i) / static_cast<double>(grid);
    if (2 * i == grid) x = 0.0;
    if (i == grid) x = L;
    double y = x, d = 1.0;
    for (std::size_t m = 0; m < p; ++m) {
      d *= f.derivative(y);
      y = f.eval(y);
    }
    if (std::abs(y) > L + slack) {
      out.reason = "p=" + std::to_string(p) + ": central interval not invariant";
      return out;
    }
    const int s = (d > 0.0) - (d < 0.0);
    if (s != 0) {
      if (last_sign != 0 && s != last_sign) ++sign_changes;
      last_sign = s;
    }
  }
  if (sign_changes != 1) {
    out.reason = "p=" + std::to_string(p) + ": f^p not unimodal on central interval";
    return out;
  }

  std::vector<Interval> ivs;
  ivs.reserve(p);
  ivs.push_back({-L, L});
  for (std::size_t i = 1; i < p; ++i) {
    ivs.push_back(detail::image_hull(f, ivs.back()));
    if (ivs.back().contains(0.0)) {
      out.reason = "p=" + std::to_string(p) + ": orbit interval returns to the critical point";
      return out;
    }
  }
  auto perm = detail::ranks(ivs);
  if (!perm) {
    out.reason = "p=" + std::to_string(p) + ": orbit intervals overlap";
    return out;
  }
  out.status = DetectStatus::Renormalizable;
  out.step = RenormStep{p, lambda, std::move(*perm), std::move(ivs)};
  return out;
}

/// Smallest renormalization period up to p_max, without throwing.
template <UnimodalLike M>
Detection detect_status(const M& f, const DetectOptions& opt = {}) {
  Detection last;
  last.reason = "no period in [2, " + std::to_string(opt.p_max) + "]";
  for (std::size_t p = 2; p <= opt.p_max; ++p) {
    Detection d = test_period(f, p, opt.grid);
    if (d.status != DetectStatus::NotRenormalizable) return d;
  }
  return last;
}

template <UnimodalLike M>
RenormStep detect(const M& f, std::size_t p_max = 16) {
  Detection d = detect_status(f, DetectOptions{p_max, 64});
  if (d.status == DetectStatus::DegenerateScaling) throw DegenerateScaling(d.reason);
  if (!d) throw NotRenormalizable(d.reason);
  return std::move(*d.step);
}

/// x -> base^p(lambda x) / lambda, evaluated by iteration (no re-projection).
template <UnimodalLike M>
class RenormalizedView {
 public:
  RenormalizedView(M base, std::size_t p, double lambda)
      : base_(std::move(base)), p_(p), lambda_(lambda) {}

  double eval(double x) const {
    x = std::clamp(x, -1.0, 1.0);
    return iterate(base_, lambda_ * x, p_) / lambda_;
  }
  double derivative(double x) const {
    x = std::clamp(x, -1.0, 1.0);
    double y = lambda_ * x, d = 1.0;
    for (std::size_t m = 0; m < p_; ++m) {
      d *= base_.derivative(y);
      y = base_.eval(y);
    }
    return d;
  }

  const M& base() const { return base_; }
  std::size_t period() const { return p_; }
  double scaling() const { return lambda_; }

 private:
  M base_;
  std::size_t p_;
  double lambda_;
};

struct RenormResult {
  UnimodalMap map;
  RenormStep step;
  double residual = 0.0;
};

/// R f(x) = f^p(lambda x) / lambda re-projected to `degree` (default: the
/// degree of f, at least 24).
inline RenormResult renormalize(const UnimodalMap& f, std::size_t degree = 0,
                                Basis basis = Basis::OrthogonalU) {
  if (degree == 0) degree = std::max<std::size_t>(f.degree(), 24);
  RenormStep step = detect(f);
  const RenormalizedView<UnimodalMap> view(f, step.p, step.lambda);
  Projection pr = project_even([&](double x) { return view.eval(x); }, degree, basis);
  // Pin phi(0) = 1 exactly; the correction is bounded by the fit error.
  const auto ell = value_at_zero_functional(basis, degree);
  double at0 = 0.0;
  for (std::size_t j = 0; j <= degree; ++j) at0 += ell[j] * pr.coeffs[j];
  pr.coeffs[0] += 1.0 - at0;
  pr.residual = std::max(pr.residual, std::abs(1.0 - at0));
  if (!(pr.residual < kProjectionTol))
    throw TruncationLoss("renormalization projection residual " + format_double(pr.residual));
  return RenormResult{UnimodalMap(basis, std::move(pr.coeffs)), std::move(step), pr.residual};
}

inline Permutation permutation_of(const RenormStep& step) {
  auto perm = detail::ranks(step.intervals);
  if (!perm) throw OverlapError("renormalization intervals are not strictly ordered");
  return *perm;
}

// ---------------------------------------------------------------------------
// Towers

struct TowerLevel {
  std::size_t k = 0;
  std::size_t period = 1;  // p_k
  double lambda = 1.0;     // lambda_k
  std::vector<Interval> intervals;
  std::optional<Permutation> perm;  // combinatorics of the step leading here
  double nesting_defect = 0.0;      // max excess of a child over its parent

  double max_ratio_to_central() const {
    double m = 0.0;
    for (const auto& iv : intervals) m = std::max(m, iv.length() / intervals.front().length());
    return m;
  }
};

/// Nested cycles C_k = {Delta_{0,k}, ..., Delta_{p_k - 1, k}}, k = 0..depth.
/// Level 0 is the whole interval.
struct IntervalTower {
  std::vector<TowerLevel> levels;
  bool truncated = false;
  std::string truncation_reason;

  std::size_t depth() const { return levels.empty() ? 0 : levels.size() - 1; }
  const TowerLevel& level(std::size_t k) const { return levels.at(k); }
};

inline constexpr double kLengthFloor = 1e-13;

template <UnimodalLike M>
IntervalTower tower(const M& f, std::size_t K, const DetectOptions& opt = {}) {
  IntervalTower t;
  t.levels.push_back(TowerLevel{0, 1, 1.0, {{-1.0, 1.0}}, std::nullopt, 0.0});
  for (std::size_t k = 0; k < K; ++k) {
    const TowerLevel& cur = t.levels.back();
    const RenormalizedView<M> view(f, cur.period, cur.lambda);
    Detection d = detect_status(view, opt);
    if (!d) {
      t.truncated = true;
      t.truncation_reason = "level " + std::to_string(k + 1) + ": " + d.reason;
      break;
    }
    TowerLevel next;
    next.k = k + 1;
    next.period = cur.period * d.step->p;
    next.lambda = cur.lambda * d.step->lambda;
    next.perm = d.step->perm;
    const double L = std::abs(next.lambda);
    if (2.0 * L < kLengthFloor) {
      t.truncated = true;
      t.truncation_reason = "level " + std::to_string(k + 1) + ": below floating-point floor";
      break;
    }
    next.intervals.reserve(next.period);
    next.intervals.push_back({-L, L});
    for (std::size_t i = 1; i < next.period; ++i)
      next.intervals.push_back(detail::image_hull(f, next.intervals.back()));
    for (std::size_t i = 0; i < next.period; ++i) {
      const Interval& parent = cur.intervals[i % cur.period];
      const Interval& child = next.intervals[i];
      next.nesting_defect = std::max(
          {next.nesting_defect, parent.lo - child.lo, child.hi - parent.hi});
    }
    const bool small = std::any_of(next.intervals.begin(), next.intervals.end(),
                                   [](const Interval& iv) { return iv.length() < kLengthFloor; });
    t.levels.push_back(std::move(next));
    if (small) {
      t.truncated = true;
      t.truncation_reason = "level " + std::to_string(k + 1) + ": interval below floor";
      break;
    }
  }
  return t;
}

/// Tower built from explicit interval collections (synthetic Cantor sets,
/// parameter-space windows). Level 0 must be the single ambient interval.
inline IntervalTower tower_from_levels(std::vector<std::vector<Interval>> levels) {
  IntervalTower t;
  for (std::size_t k = 0; k < levels.size(); ++k) {
    TowerLevel lv;
    lv.k = k;
    lv.period = levels[k].size();
    lv.lambda = levels[k].empty() ? 0.0 : 0.5 * levels[k].front().length();
    lv.intervals = std::move(levels[k]);
    t.levels.push_back(std::move(lv));
  }
  return t;
}

inline std::string tower_csv(const IntervalTower& t) {
  std::ostringstream os;
  os << "level,index,left,right,length\n";
  for (const auto& lv : t.levels)
    for (std::size_t i = 0; i < lv.intervals.size(); ++i)
      os << lv.k << ',' << i << ',' << format_double(lv.intervals[i].lo) << ','
         << format_double(lv.intervals[i].hi) << ',' << format_double(lv.intervals[i].length())
         << '\n';
  return os.str();
}

inline nlohmann::json tower_header_json(const IntervalTower& t) {
  nlohmann::json levels = nlohmann::json::array();
  for (const auto& lv : t.levels) {
    nlohmann::json j{{"k", lv.k}, {"p_k", lv.period}, {"lambda_k", lv.lambda},
                     {"nesting_defect", lv.nesting_defect}};
    if (lv.perm) j["permutation"] = lv.perm->image;
    levels.push_back(std::move(j));
  }
  return {{"depth", t.depth()},
          {"truncated", t.truncated},
          {"truncation_reason", t.truncation_reason},
          {"levels", std::move(levels)}};
}

}  // namespace renormlab

#endif  // RENORMLAB_RENORM_HPP
