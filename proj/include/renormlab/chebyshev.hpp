#ifndef RENORMLAB_CHEBYSHEV_HPP
#define RENORMLAB_CHEBYSHEV_HPP

#include <cmath>
#include <cstddef>
#include <numbers>
#include <span>
#include <vector>

// Chebyshev series on t in [-1, 1]. Maps use them through t = 2u - 1, u = x^2.
namespace renormlab::cheb {

inline double clenshaw(std::span<const double> c, double t) {
  double b1 = 0.0, b2 = 0.0;
  for (std::size_t j = c.size(); j-- > 1;) {
    const double b0 = 2.0 * t * b1 - b2 + c[j];
    b2 = b1;
    b1 = b0;
  }
  return (c.empty() ? 0.0 : c[0]) + t * b1 - b2;
}

/// Coefficients of d/dt of a Chebyshev series (one degree lower).
inline std::vector<double> derivative(std::span<const double> c) {
  const std::size_t n = c.size();
  if (n <= 1) return {0.0};
  std::vector<double> d(n - 1, 0.0);
  // d_{j-1} = d_{j+1} + 2 j c_j, run downward.
  double next = 0.0, next2 = 0.0;
  for (std::size_t j = n - 1; j >= 1; --j) {
    const double dj = next2 + 2.0 * static_cast<double>(j) * c[j];
    d[j - 1] = dj;
    next2 = next;
    next = dj;
  }
  d[0] *= 0.5;
  return d;
}

/// Values T_0(t) .. T_n(t).
inline void basis_values(double t, std::span<double> out) {
  if (out.empty()) return;
  out[0] = 1.0;
  if (out.size() > 1) out[1] = t;
  for (std::size_t j = 2; j < out.size(); ++j) out[j] = 2.0 * t * out[j - 1] - out[j - 2];
}

/// Gauss-Chebyshev points t_k = cos(pi (k + 1/2) / n).
inline std::vector<double> gauss_nodes(std::size_t n) {
  std::vector<double> t(n);
  for (std::size_t k = 0; k < n; ++k)
    t[k] = std::cos(std::numbers::pi * (static_cast<double>(k) + 0.5) / static_cast<double>(n));
  return t;
}

/// Least-squares fit of degree `degree` to samples at gauss_nodes(n), n > degree.
/// The columns are discretely orthogonal on these nodes, so the normal
/// equations are diagonal.
inline std::vector<double> fit(std::span<const double> t, std::span<const double> values,
                               std::size_t degree) {
  const std::size_t n = t.size();
  std::vector<double> c(degree + 1, 0.0);
  std::vector<double> tv(degree + 1);
  for (std::size_t k = 0; k < n; ++k) {
    basis_values(t[k], tv);
    for (std::size_t j = 0; j <= degree; ++j) c[j] += values[k] * tv[j];
  }
  const double scale = 2.0 / static_cast<double>(n);
  for (std::size_t j = 0; j <= degree; ++j) c[j] *= scale;
  c[0] *= 0.5;
  return c;
}

/// Multiply a Chebyshev series by u = (t + 1) / 2.
inline std::vector<double> times_u(std::span<const double> c) {
  std::vector<double> r(c.size() + 1, 0.0);
  for (std::size_t j = 0; j < c.size(); ++j) {
    r[j] += 0.5 * c[j];
    // t T_j = (T_{j+1} + T_{|j-1|}) / 2, with t T_0 = T_1.
    if (j == 0) {
      r[1] += 0.5 * c[0];
    } else {
      r[j + 1] += 0.25 * c[j];
      r[j - 1] += 0.25 * c[j];
    }
  }
  return r;
}

}  // namespace renormlab::cheb

#endif  // RENORMLAB_CHEBYSHEV_HPP
