#ifndef RENORMLAB_MAPS_HPP
#define RENORMLAB_MAPS_HPP

#include <algorithm>
#include <cmath>
#include <concepts>
#include <cstddef>
#include <functional>
#include <limits>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "chebyshev.hpp"
#include "error.hpp"

namespace renormlab {

enum class Basis { MonomialU, OrthogonalU };

inline const char* to_string(Basis b) {
  return b == Basis::MonomialU ? "MonomialU" : "OrthogonalU";
}

inline Basis basis_from_string(const std::string& s) {
  if (s == "MonomialU") return Basis::MonomialU;
  if (s == "OrthogonalU") return Basis::OrthogonalU;
  throw DomainError("unknown basis '" + s + "'");
}

inline constexpr double kNormalizationTol = 1e-12;
inline constexpr std::size_t kMaxMonomialDegree = 20;
inline constexpr double kProjectionTol = 1e-10;

/// Anything that can be iterated as an even unimodal map of [-1, 1].
template <class M>
concept UnimodalLike = requires(const M& m, double x) {
  { m.eval(x) } -> std::convertible_to<double>;
  { m.derivative(x) } -> std::convertible_to<double>;
};

/// Even map f(x) = phi(x^2) with phi a polynomial on u in [0, 1].
///
/// In the orthogonal basis phi(u) = sum_j c_j T_j(2u - 1); in the monomial
/// basis phi(u) = sum_j c_j u^j. Immutable; construction enforces f(0) = 1.
class UnimodalMap {
 public:
  UnimodalMap(Basis basis, std::vector<double> coeffs) : basis_(basis), c_(std::move(coeffs)) {
    if (c_.empty()) throw DomainError("empty coefficient vector");
    if (basis_ == Basis::MonomialU && degree() > kMaxMonomialDegree)
      throw DomainError("monomial basis limited to degree " + std::to_string(kMaxMonomialDegree));
    for (double v : c_)
      if (!std::isfinite(v)) throw DomainError("non-finite coefficient");
    build_derivatives();
    const double r = std::abs(phi(0.0) - 1.0);
    if (!(r <= kNormalizationTol))
      throw DomainError("normalization f(0)=1 violated by " + std::to_string(r));
  }

  Basis basis() const noexcept { return basis_; }
  std::size_t degree() const noexcept { return c_.size() - 1; }
  std::span<const double> coeffs() const noexcept { return c_; }

  double phi(double u) const { return series(c_, u); }
  double phi_prime(double u) const { return series(d1_, u) * dscale(); }
  double phi_second(double u) const { return series(d2_, u) * dscale() * dscale(); }

  double eval(double x) const {
    x = std::clamp(x, -1.0, 1.0);
    return phi(x * x);
  }
  double derivative(double x) const {
    x = std::clamp(x, -1.0, 1.0);
    return 2.0 * x * phi_prime(x * x);
  }
  double second_derivative(double x) const {
    x = std::clamp(x, -1.0, 1.0);
    const double u = x * x;
    return 2.0 * phi_prime(u) + 4.0 * u * phi_second(u);
  }

  friend bool operator==(const UnimodalMap& a, const UnimodalMap& b) {
    return a.basis_ == b.basis_ && a.c_ == b.c_;
  }

 private:
  // For the orthogonal basis the stored derivative series is in t, and
  // du = dt / 2.
  double dscale() const noexcept { return basis_ == Basis::OrthogonalU ? 2.0 : 1.0; }

  double series(const std::vector<double>& c, double u) const {
    if (basis_ == Basis::OrthogonalU) return cheb::clenshaw(c, 2.0 * u - 1.0);
    double acc = 0.0;
    for (std::size_t j = c.size(); j-- > 0;) acc = acc * u + c[j];
    return acc;
  }

  void build_derivatives() {
    if (basis_ == Basis::OrthogonalU) {
      d1_ = cheb::derivative(c_);
      d2_ = cheb::derivative(d1_);
      return;
    }
    auto mono_der = [](const std::vector<double>& c) {
      if (c.size() <= 1) return std::vector<double>{0.0};
      std::vector<double> d(c.size() - 1);
      for (std::size_t j = 1; j < c.size(); ++j) d[j - 1] = static_cast<double>(j) * c[j];
      return d;
    };
    d1_ = mono_der(c_);
    d2_ = mono_der(d1_);
  }

  Basis basis_;
  std::vector<double> c_;
  std::vector<double> d1_, d2_;
};

inline double eval(const UnimodalMap& f, double x) { return f.eval(x); }

inline double deriv(const UnimodalMap& f, double x, int order) {
  if (order == 1) return f.derivative(x);
  if (order == 2) return f.second_derivative(x);
  throw UnsupportedOrder("order " + std::to_string(order) + " (supported: 1, 2)");
}

template <UnimodalLike M>
double iterate(const M& f, double x, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) x = f.eval(x);
  return x;
}

struct OrbitResult {
  std::vector<double> points;
  double clamp_total = 0.0;  // sum of out-of-range amounts removed by clamping
};

template <UnimodalLike M>
OrbitResult orbit(const M& f, double x0, std::size_t n) {
  OrbitResult r;
  r.points.reserve(n + 1);
  auto push = [&r](double x) {
    const double c = std::clamp(x, -1.0, 1.0);
    r.clamp_total += std::abs(x - c);
    r.points.push_back(c);
  };
  push(x0);
  for (std::size_t i = 0; i < n; ++i) push(f.eval(r.points.back()));
  return r;
}

// ---------------------------------------------------------------------------
// Validation

struct MapDiagnostics {
  double normalization_residual = 0.0;
  double monotonicity_margin = 0.0;  // min of -phi' over the sample grid
  double range_violation = 0.0;
  double second_derivative_at_zero = 0.0;

  bool normalized() const { return normalization_residual <= kNormalizationTol; }
  bool monotone() const { return monotonicity_margin > 0.0; }
  bool in_range() const { return range_violation <= kNormalizationTol; }
  bool quadratic_critical_point() const { return second_derivative_at_zero < 0.0; }
  bool ok() const { return normalized() && monotone() && in_range() && quadratic_critical_point(); }
};

inline MapDiagnostics validate(const UnimodalMap& f) {
  MapDiagnostics d;
  d.normalization_residual = std::abs(f.phi(0.0) - 1.0);
  const std::size_t n = std::max<std::size_t>(4 * f.degree(), 64);
  double margin = std::numeric_limits<double>::infinity();
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k <= n; ++k) {
    const double u = static_cast<double>(k) / static_cast<double>(n);
    margin = std::min(margin, -f.phi_prime(u));
    const double v = f.phi(u);
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  d.monotonicity_margin = margin;
  d.range_violation = std::max(0.0, -1.0 - lo) + std::max(0.0, hi - 1.0);
  d.second_derivative_at_zero = f.second_derivative(0.0);
  return d;
}

// ---------------------------------------------------------------------------
// Quadratic family f_c(x) = 1 - c x^2

struct QuadraticFamily {
  static constexpr double kMin = 0.0;
  static constexpr double kMax = 2.0;

  UnimodalMap member(double c) const {
    if (!(c > kMin && c <= kMax)) throw DomainError("quadratic parameter outside (0, 2]");
    return UnimodalMap(Basis::MonomialU, {1.0, -c});
  }
};

inline UnimodalMap member(const QuadraticFamily& fam, double c) { return fam.member(c); }

/// f_c as a bare closure for hot parameter scans; agrees with member(c).
struct QuadraticMap {
  double c;
  double eval(double x) const {
    x = std::clamp(x, -1.0, 1.0);
    return 1.0 - c * (x * x);
  }
  double derivative(double x) const {
    x = std::clamp(x, -1.0, 1.0);
    return -2.0 * c * x;
  }
};

// ---------------------------------------------------------------------------
// Basis conversion and re-projection

/// Exact change of basis for the polynomial phi, padded/truncated to `degree`.
/// Truncation (degree below the current one) is only exact when the dropped
/// coefficients vanish.
inline std::vector<double> convert_coeffs(const UnimodalMap& f, Basis target) {
  const auto c = f.coeffs();
  if (f.basis() == target) return {c.begin(), c.end()};
  if (target == Basis::OrthogonalU) {
    // Horner in u over Chebyshev series.
    std::vector<double> acc{c.back()};
    for (std::size_t j = c.size() - 1; j-- > 0;) {
      acc = cheb::times_u(acc);
      acc[0] += c[j];
    }
    acc.resize(c.size());
    return acc;
  }
  // Chebyshev in t = 2u - 1 to powers of u via T_{j+1} = 2 t T_j - T_{j-1}.
  const std::size_t n = c.size();
  std::vector<std::vector<double>> T(n, std::vector<double>(n, 0.0));
  T[0][0] = 1.0;
  if (n > 1) {
    T[1][0] = -1.0;
    T[1][1] = 2.0;
  }
  for (std::size_t j = 2; j < n; ++j) {
    for (std::size_t k = 0; k < n; ++k) {
      double v = -T[j - 2][k] - 2.0 * T[j - 1][k];
      if (k > 0) v += 4.0 * T[j - 1][k - 1];
      T[j][k] = v;
    }
  }
  std::vector<double> m(n, 0.0);
  for (std::size_t j = 0; j < n; ++j)
    for (std::size_t k = 0; k < n; ++k) m[k] += c[j] * T[j][k];
  return m;
}

inline UnimodalMap to_basis(const UnimodalMap& f, Basis target, std::size_t degree) {
  auto c = convert_coeffs(f, target);
  if (degree + 1 < c.size())
    for (std::size_t j = degree + 1; j < c.size(); ++j)
      if (c[j] != 0.0) throw TruncationLoss("basis conversion would drop nonzero coefficients");
  c.resize(degree + 1, 0.0);
  return UnimodalMap(target, std::move(c));
}

struct Projection {
  std::vector<double> coeffs;
  double residual = 0.0;  // max abs misfit at the collocation nodes
};

/// Collocation grid in x = sqrt(u) for 2(D+1) Gauss-Chebyshev nodes in u.
struct CollocationGrid {
  std::vector<double> t;  // Chebyshev variable
  std::vector<double> x;

  explicit CollocationGrid(std::size_t degree) : t(cheb::gauss_nodes(2 * (degree + 1))) {
    x.reserve(t.size());
    for (double tk : t) x.push_back(std::sqrt(0.5 * (tk + 1.0)));
  }
};

/// Fit values sampled at a CollocationGrid to a degree-D series in `basis`.
inline Projection fit_samples(const CollocationGrid& grid, std::span<const double> values,
                              std::size_t degree, Basis basis) {
  Projection p;
  if (basis == Basis::OrthogonalU) {
    p.coeffs = cheb::fit(grid.t, values, degree);
    for (std::size_t k = 0; k < values.size(); ++k)
      p.residual = std::max(p.residual, std::abs(cheb::clenshaw(p.coeffs, grid.t[k]) - values[k]));
    return p;
  }
  if (degree > kMaxMonomialDegree) throw DomainError("monomial fit degree too high");
  const auto n = static_cast<Eigen::Index>(values.size());
  Eigen::MatrixXd V(n, static_cast<Eigen::Index>(degree + 1));
  Eigen::VectorXd b(n);
  for (Eigen::Index k = 0; k < n; ++k) {
    const double u = grid.x[static_cast<std::size_t>(k)] * grid.x[static_cast<std::size_t>(k)];
    double pw = 1.0;
    for (Eigen::Index j = 0; j <= static_cast<Eigen::Index>(degree); ++j) {
      V(k, j) = pw;
      pw *= u;
    }
    b(k) = values[static_cast<std::size_t>(k)];
  }
  Eigen::VectorXd sol = V.colPivHouseholderQr().solve(b);
  p.coeffs.assign(sol.data(), sol.data() + sol.size());
  p.residual = (V * sol - b).cwiseAbs().maxCoeff();
  return p;
}

/// Re-project an even function F(x), sampled for x in [0, 1], onto degree D.
template <class F>
  requires std::invocable<F, double>
Projection project_even(F&& fn, std::size_t degree, Basis basis = Basis::OrthogonalU) {
  const CollocationGrid grid(degree);
  std::vector<double> values(grid.x.size());
  for (std::size_t k = 0; k < values.size(); ++k) values[k] = fn(grid.x[k]);
  return fit_samples(grid, values, degree, basis);
}

/// Evaluate a perturbation v(x) = sum_j c_j b_j(x^2) in the same basis as maps.
inline double eval_series(Basis basis, std::span<const double> c, double x) {
  const double u = x * x;
  if (basis == Basis::OrthogonalU) return cheb::clenshaw(c, 2.0 * u - 1.0);
  double acc = 0.0;
  for (std::size_t j = c.size(); j-- > 0;) acc = acc * u + c[j];
  return acc;
}

/// Coefficients of the quadratic-family direction d/dc (1 - c x^2) = -x^2.
inline std::vector<double> family_direction(Basis basis, std::size_t degree) {
  std::vector<double> w(degree + 1, 0.0);
  if (basis == Basis::OrthogonalU) {
    w[0] = -0.5;
    if (degree >= 1) w[1] = -0.5;
  } else if (degree >= 1) {
    w[1] = -1.0;
  }
  return w;
}

/// Value functional v -> v(0) on coefficient vectors.
inline std::vector<double> value_at_zero_functional(Basis basis, std::size_t degree) {
  std::vector<double> l(degree + 1, 0.0);
  if (basis == Basis::OrthogonalU) {
    for (std::size_t j = 0; j <= degree; ++j) l[j] = (j % 2 == 0) ? 1.0 : -1.0;
  } else {
    l[0] = 1.0;
  }
  return l;
}

inline double sup_distance(const std::function<double(double)>& a,
                           const std::function<double(double)>& b, std::size_t points = 200) {
  double d = 0.0;
  for (std::size_t k = 0; k < points; ++k) {
    const double x = -1.0 + 2.0 * static_cast<double>(k) / static_cast<double>(points - 1);
    d = std::max(d, std::abs(a(x) - b(x)));
  }
  return d;
}

// ---------------------------------------------------------------------------
// JSON {"basis", "degree", "coeffs"}

inline void to_json(nlohmann::json& j, const UnimodalMap& f) {
  j = nlohmann::json{{"basis", to_string(f.basis())},
                     {"degree", f.degree()},
                     {"coeffs", std::vector<double>(f.coeffs().begin(), f.coeffs().end())}};
}

inline UnimodalMap map_from_json(const nlohmann::json& j) {
  auto coeffs = j.at("coeffs").get<std::vector<double>>();
  const auto degree = j.at("degree").get<std::size_t>();
  if (coeffs.size() != degree + 1) throw DomainError("degree does not match coefficient count");
  return UnimodalMap(basis_from_string(j.at("basis").get<std::string>()), std::move(coeffs));
}

}  // namespace renormlab

#endif  // RENORMLAB_MAPS_HPP
