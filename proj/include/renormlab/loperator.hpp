#ifndef RENORMLAB_LOPERATOR_HPP
#define RENORMLAB_LOPERATOR_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <numbers>
#include <string>
#include <utility>
#include <vector>

#include "error.hpp"
#include "maps.hpp"
#include "parallel.hpp"
#include "renorm.hpp"

namespace renormlab {

using Fn = std::function<double(double)>;

/// One term phi(x) v(psi(x)); dpsi is the analytic derivative of psi.
struct LTerm {
  Fn phi;
  Fn psi;
  Fn dpsi;
};

/// Rank-one addition w(x) * ell(v).
struct RankOneTail {
  Fn w;
  std::function<double(const Fn&)> functional;
};

inline constexpr std::size_t kContainmentGrid = 128;
inline constexpr double kContainmentTol = 1e-10;
inline constexpr std::size_t kNormGrid = 512;
inline constexpr std::size_t kDefaultTermCap = 4096;

/// Lv(x) = sum_i phi_i(x) v(psi_i(x)), plus optional rank-one tails kept
/// outside the term list.
class LOperator {
 public:
  explicit LOperator(std::vector<LTerm> terms, std::vector<RankOneTail> tails = {})
      : terms_(std::move(terms)), tails_(std::move(tails)) {
    for (std::size_t i = 0; i < terms_.size(); ++i) {
      for (std::size_t k = 0; k < kContainmentGrid; ++k) {
        const double x = -1.0 + 2.0 * static_cast<double>(k) / static_cast<double>(kContainmentGrid - 1);
        const double y = terms_[i].psi(x);
        if (!(std::abs(y) <= 1.0 + kContainmentTol))
          throw DomainError("term " + std::to_string(i) + ": psi leaves [-1, 1] at x = " + std::to_string(x));
      }
    }
  }

  const std::vector<LTerm>& terms() const { return terms_; }
  const std::vector<RankOneTail>& tails() const { return tails_; }
  std::size_t size() const { return terms_.size(); }

  double principal(const Fn& v, double x) const {
    double s = 0.0;
    for (const auto& t : terms_) s += t.phi(x) * v(t.psi(x));
    return s;
  }
  double operator()(const Fn& v, double x) const {
    double s = principal(v, x);
    for (const auto& t : tails_) s += t.w(x) * t.functional(v);
    return s;
  }

 private:
  std::vector<LTerm> terms_;
  std::vector<RankOneTail> tails_;
};

inline LOperator identity_operator() {
  return LOperator({LTerm{[](double) { return 1.0; }, [](double x) { return x; }, [](double) { return 1.0; }}});
}

/// Full operator (terms plus tails) on a grid.
inline std::vector<double> apply(const LOperator& L, const Fn& v, const std::vector<double>& grid) {
  std::vector<double> out(grid.size());
  // Tail functionals do not depend on x.
  std::vector<double> tv;
  for (const auto& t : L.tails()) tv.push_back(t.functional(v));
  parallel_for(grid.size(), [&](std::size_t k) {
    double s = L.principal(v, grid[k]);
    for (std::size_t i = 0; i < tv.size(); ++i) s += L.tails()[i].w(grid[k]) * tv[i];
    out[k] = s;
  });
  return out;
}

inline std::vector<double> apply_principal(const LOperator& L, const Fn& v, const std::vector<double>& grid) {
  std::vector<double> out(grid.size());
  parallel_for(grid.size(), [&](std::size_t k) { out[k] = L.principal(v, grid[k]); });
  return out;
}

/// L_gamma v(x) = sum_i |phi_i(x)| |Dpsi_i(x)|^gamma v(psi_i(x)).
class PositiveOperator {
 public:
  PositiveOperator(LOperator source, double gamma) : source_(std::move(source)), gamma_(gamma) {
    if (!(gamma > 0.0)) throw DomainError("gamma must be positive");
  }
  const LOperator& source() const { return source_; }
  double gamma() const { return gamma_; }

  double operator()(const Fn& v, double x) const {
    double s = 0.0;
    for (const auto& t : source_.terms())
      s += std::abs(t.phi(x)) * std::pow(std::abs(t.dpsi(x)), gamma_) * v(t.psi(x));
    return s;
  }

 private:
  LOperator source_;
  double gamma_;
};

inline PositiveOperator associated(const LOperator& L, double gamma) { return PositiveOperator(L, gamma); }

inline std::vector<double> apply(const PositiveOperator& P, const Fn& v, const std::vector<double>& grid) {
  std::vector<double> out(grid.size());
  parallel_for(grid.size(), [&](std::size_t k) { out[k] = P(v, grid[k]); });
  return out;
}

/// Chebyshev-distributed points on [-1, 1].
inline std::vector<double> chebyshev_grid(std::size_t n = kNormGrid) {
  std::vector<double> g(n);
  for (std::size_t k = 0; k < n; ++k)
    g[k] = std::cos(std::numbers::pi * (static_cast<double>(k) + 0.5) / static_cast<double>(n));
  return g;
}

/// sup of L_gamma 1 over the norm grid; the C^0 norm of a positive operator.
inline double gamma_norm(const PositiveOperator& P, std::size_t points = kNormGrid) {
  const auto vals = apply(P, [](double) { return 1.0; }, chebyshev_grid(points));
  return *std::max_element(vals.begin(), vals.end());
}

/// (L1 o L2) v = L1(L2 v), expanded term by term: phi_i(x) phi_j(psi_i(x))
/// against psi_j(psi_i(x)). Tails of L2 push through L1 as tails.
inline LOperator compose(const LOperator& L1, const LOperator& L2, std::size_t cap = kDefaultTermCap) {
  const std::size_t n = L1.size() * L2.size();
  if (n > cap) throw TermBlowup(std::to_string(n) + " terms exceed the cap of " + std::to_string(cap));
  std::vector<LTerm> terms;
  terms.reserve(n);
  for (const auto& a : L1.terms()) {
    for (const auto& b : L2.terms()) {
      terms.push_back(LTerm{
          [pa = a.phi, pb = b.phi, sa = a.psi](double x) { return pa(x) * pb(sa(x)); },
          [sa = a.psi, sb = b.psi](double x) { return sb(sa(x)); },
          [sa = a.psi, da = a.dpsi, db = b.dpsi](double x) { return db(sa(x)) * da(x); }});
    }
  }
  std::vector<RankOneTail> tails;
  // L1's own tails act on L2 v.
  for (const auto& t : L1.tails()) {
    tails.push_back(RankOneTail{t.w, [f = t.functional, L2](const Fn& v) {
                                  return f([&](double y) { return L2(v, y); });
                                }});
  }
  // L2's tail w2 * ell2(v) maps to (L1 w2) * ell2(v) through L1's principal part.
  for (const auto& t : L2.tails()) {
    tails.push_back(RankOneTail{[w = t.w, L1](double x) { return L1.principal(w, x); }, t.functional});
  }
  return LOperator(std::move(terms), std::move(tails));
}

inline LOperator power(const LOperator& L, std::size_t m, std::size_t cap = kDefaultTermCap) {
  if (m == 0) return identity_operator();
  LOperator acc = L;
  for (std::size_t i = 1; i < m; ++i) acc = compose(acc, L, cap);
  return acc;
}

/// DT(f) as p terms phi_j(x) = Df^j(f^{p-j}(lambda x)) / lambda,
/// psi_j(x) = f^{p-j-1}(lambda x), plus the rank-one tail
/// [x (Tf)'(x) - Tf(x)] (L v)(0).
template <UnimodalLike M>
LOperator renorm_derivative_as_loperator(const M& f, const RenormStep& step) {
  const std::size_t p = step.p;
  const double lambda = iterate(f, 0.0, p);
  std::vector<LTerm> terms;
  for (std::size_t j = 0; j < p; ++j) {
    const std::size_t q = p - j - 1;  // psi_j = f^q(lambda x)
    terms.push_back(LTerm{
        [f, lambda, q, j](double x) {
          double y = iterate(f, lambda * x, q + 1), d = 1.0;
          for (std::size_t i = 0; i < j; ++i) {
            d *= f.derivative(y);
            y = f.eval(y);
          }
          return d / lambda;
        },
        [f, lambda, q](double x) { return iterate(f, lambda * x, q); },
        [f, lambda, q](double x) {
          double y = lambda * x, d = lambda;
          for (std::size_t i = 0; i < q; ++i) {
            d *= f.derivative(y);
            y = f.eval(y);
          }
          return d;
        }});
  }
  LOperator principal(terms);
  auto w = [f, lambda, p](double x) {
    double y = lambda * x, d = 1.0;
    for (std::size_t m = 0; m < p; ++m) {
      d *= f.derivative(y);
      y = f.eval(y);
    }
    return x * d - y / lambda;
  };
  RankOneTail tail{w, [principal](const Fn& v) { return principal.principal(v, 0.0); }};
  return LOperator(std::move(terms), {std::move(tail)});
}

}  // namespace renormlab

#endif  // RENORMLAB_LOPERATOR_HPP
