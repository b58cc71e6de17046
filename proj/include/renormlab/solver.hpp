#ifndef RENORMLAB_SOLVER_HPP
#define RENORMLAB_SOLVER_HPP

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <limits>
#include <numeric>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "error.hpp"
#include "families.hpp"
#include "io.hpp"
#include "maps.hpp"
#include "renorm.hpp"

namespace renormlab {

inline constexpr std::size_t kResidualGrid = 200;
inline constexpr double kColumnTol = 1e-8;
// The top columns of a degree-24 matrix at the fixed point already miss by
// ~3e-6 (the image of T_24 needs more modes). Spectra record the misfit
// instead of refusing.
inline constexpr double kSpectrumColumnTol = std::numeric_limits<double>::infinity();

namespace detail {

// Raw coefficient map without the normalization check (finite-difference
// perturbations move f(0) off 1). No clamping: a perturbed f(0) slightly
// above 1 must still feed through to lambda.
struct CoeffMap {
  Basis basis;
  std::vector<double> c, d1;

  CoeffMap(Basis b, std::vector<double> coeffs) : basis(b), c(std::move(coeffs)) {
    if (basis == Basis::OrthogonalU) {
      d1 = cheb::derivative(c);
      for (double& v : d1) v *= 2.0;
    } else {
      d1.assign(std::max<std::size_t>(c.size(), 2) - 1, 0.0);
      for (std::size_t j = 1; j < c.size(); ++j) d1[j - 1] = static_cast<double>(j) * c[j];
    }
  }
  double eval(double x) const { return eval_series(basis, c, x); }
  double derivative(double x) const { return 2.0 * x * eval_series(basis, d1, x); }
};

inline Eigen::VectorXd to_vec(std::span<const double> c) {
  return Eigen::Map<const Eigen::VectorXd>(c.data(), static_cast<Eigen::Index>(c.size()));
}

inline std::vector<double> to_std(const Eigen::VectorXd& v) {
  return {v.data(), v.data() + v.size()};
}

// T f = f^p(lambda x) / lambda at the collocation nodes, lambda = f^p(0).
template <UnimodalLike M>
Projection project_renormalized(const M& f, std::size_t p, std::size_t degree, Basis basis) {
  const double lambda = iterate(f, 0.0, p);
  return project_even([&](double x) { return iterate(f, lambda * x, p) / lambda; }, degree, basis);
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Derivative of the renormalization operator

/// Matrix of DT(f) in the coefficient basis of f: column j is the projection
/// of DT(f) e_j. The period is the one in `step`; lambda is recomputed from f.
template <UnimodalLike M>
Eigen::MatrixXd derivative_matrix_of(const M& f, std::size_t p, Basis basis, std::size_t degree,
                                     double column_tol = kColumnTol, double* worst = nullptr) {
  const CollocationGrid grid(degree);
  const std::size_t n = grid.x.size(), dim = degree + 1;
  const double lambda = iterate(f, 0.0, p);

  // sum_j Df^j(y_{p-j}) v(y_{p-j-1}) along the orbit y_0 = y.
  struct Weights {
    std::vector<double> w;    // weight of v at pts[i]
    std::vector<double> pts;  // y_{p-1-i}
  };
  auto weights = [&](double y0) {
    std::vector<double> y(p + 1), d(p);
    y[0] = y0;
    for (std::size_t m = 0; m < p; ++m) {
      d[m] = f.derivative(y[m]);
      y[m + 1] = f.eval(y[m]);
    }
    Weights out;
    double prod = 1.0;
    for (std::size_t j = 0; j < p; ++j) {
      if (j > 0) prod *= d[p - j];
      out.w.push_back(prod);
      out.pts.push_back(y[p - j - 1]);
    }
    return out;
  };

  const Weights at0 = weights(0.0);
  std::vector<Weights> at_nodes;
  std::vector<double> tail(n);
  at_nodes.reserve(n);
  for (std::size_t k = 0; k < n; ++k) {
    const double x = grid.x[k], z = lambda * x;
    at_nodes.push_back(weights(z));
    double y = z, dTf = 1.0;
    for (std::size_t m = 0; m < p; ++m) {
      dTf *= f.derivative(y);
      y = f.eval(y);
    }
    tail[k] = x * dTf - y / lambda;
  }

  Eigen::MatrixXd Md(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim));
  std::vector<double> e(dim, 0.0), values(n);
  for (std::size_t j = 0; j < dim; ++j) {
    std::fill(e.begin(), e.end(), 0.0);
    e[j] = 1.0;
    double s0 = 0.0;
    for (std::size_t i = 0; i < p; ++i) s0 += at0.w[i] * eval_series(basis, e, at0.pts[i]);
    for (std::size_t k = 0; k < n; ++k) {
      double s = 0.0;
      for (std::size_t i = 0; i < p; ++i)
        s += at_nodes[k].w[i] * eval_series(basis, e, at_nodes[k].pts[i]);
      values[k] = (s + tail[k] * s0) / lambda;
    }
    Projection pr = fit_samples(grid, values, degree, basis);
    if (worst) *worst = std::max(*worst, pr.residual);
    if (!(pr.residual < column_tol))
      throw TruncationLoss("derivative column " + std::to_string(j) + " projection residual " +
                           format_double(pr.residual));
    for (std::size_t i = 0; i < dim; ++i)
      Md(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = pr.coeffs[i];
  }
  return Md;
}

inline Eigen::MatrixXd derivative_matrix(const UnimodalMap& f, const RenormStep& step,
                                         double column_tol = kColumnTol, double* worst = nullptr) {
  return derivative_matrix_of(f, step.p, f.basis(), f.degree(), column_tol, worst);
}

// Newton iterates far from the solution may carry large truncation tails;
// the Jacobian there only needs to be a good direction.
inline Eigen::MatrixXd newton_jacobian(const UnimodalMap& f, const RenormStep& step) {
  return derivative_matrix_of(f, step.p, f.basis(), f.degree(),
                              std::numeric_limits<double>::infinity());
}

/// Central differences of the projected T(f + h e_j); cross-check only.
inline Eigen::MatrixXd fd_derivative_matrix(const UnimodalMap& f, const RenormStep& step,
                                            double h = 1e-6) {
  const std::size_t dim = f.degree() + 1;
  Eigen::MatrixXd Md(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim));
  std::vector<double> base(f.coeffs().begin(), f.coeffs().end());
  for (std::size_t j = 0; j < dim; ++j) {
    auto cp = base, cm = base;
    cp[j] += h;
    cm[j] -= h;
    const auto Pp = detail::project_renormalized(detail::CoeffMap(f.basis(), cp), step.p, f.degree(), f.basis());
    const auto Pm = detail::project_renormalized(detail::CoeffMap(f.basis(), cm), step.p, f.degree(), f.basis());
    for (std::size_t i = 0; i < dim; ++i)
      Md(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
          (Pp.coeffs[i] - Pm.coeffs[i]) / (2.0 * h);
  }
  return Md;
}

// ---------------------------------------------------------------------------
// Spectrum

struct SpectralReport {
  std::size_t matrix_dim = 0;
  std::vector<std::complex<double>> eigenvalues;  // descending modulus, then real part
  double delta = 0.0;
  std::vector<double> unstable_vector;    // sup-norm 1
  std::vector<double> stable_functional;  // sigma(u) = 1
  double gap = 0.0;
  std::size_t unstable_count = 0;
  bool hyperbolic = false;  // exactly one eigenvalue outside the unit disk
  double right_residual = 0.0;  // |M u - delta u|_inf / |delta|
  double left_residual = 0.0;   // |sigma^T M - delta sigma^T|_inf / (|delta| |sigma|_inf)
  double column_residual = 0.0;  // worst column projection misfit
};

inline constexpr double kUnstableThreshold = 1.0 + 1e-6;

namespace detail {

inline void sort_eigen(std::vector<std::complex<double>>& ev, std::vector<Eigen::Index>* order = nullptr,
                       const Eigen::VectorXcd* raw = nullptr) {
  std::vector<Eigen::Index> idx(ev.size());
  std::iota(idx.begin(), idx.end(), Eigen::Index{0});
  auto key = [&](Eigen::Index i) { return raw ? (*raw)(i) : ev[static_cast<std::size_t>(i)]; };
  std::stable_sort(idx.begin(), idx.end(), [&](Eigen::Index a, Eigen::Index b) {
    const double ma = std::abs(key(a)), mb = std::abs(key(b));
    const double scale = std::max({ma, mb, 1e-300});
    if (std::abs(ma - mb) > 1e-12 * scale) return ma > mb;
    if (key(a).real() != key(b).real()) return key(a).real() > key(b).real();
    return key(a).imag() > key(b).imag();
  });
  std::vector<std::complex<double>> sorted;
  for (auto i : idx) sorted.push_back(key(i));
  ev = std::move(sorted);
  if (order) *order = std::move(idx);
}

}  // namespace detail

/// Eigen-decomposition of a derivative matrix. The sign of u is fixed so that
/// sigma pairs positively with the quadratic-family direction d/dc f_c.
inline SpectralReport spectrum_of_matrix(const Eigen::MatrixXd& Md, Basis basis) {
  SpectralReport rep;
  const auto dim = Md.rows();
  rep.matrix_dim = static_cast<std::size_t>(dim);
  Eigen::EigenSolver<Eigen::MatrixXd> es(Md, true);
  if (es.info() != Eigen::Success) throw NoConvergence("eigen-decomposition failed");
  const Eigen::VectorXcd raw = es.eigenvalues();
  std::vector<std::complex<double>> ev(raw.data(), raw.data() + raw.size());
  std::vector<Eigen::Index> order;
  detail::sort_eigen(ev, &order, &raw);
  rep.eigenvalues = ev;
  for (const auto& z : ev)
    if (std::abs(z) > kUnstableThreshold) ++rep.unstable_count;
  rep.hyperbolic = rep.unstable_count == 1;
  rep.delta = ev.front().real();
  rep.gap = ev.size() > 1 ? std::abs(ev[1]) : 0.0;

  Eigen::VectorXd u = es.eigenvectors().col(order.front()).real();
  u /= u.cwiseAbs().maxCoeff();

  Eigen::EigenSolver<Eigen::MatrixXd> lt(Md.transpose(), true);
  Eigen::Index best = 0;
  for (Eigen::Index i = 0; i < dim; ++i)
    if (std::abs(lt.eigenvalues()(i) - ev.front()) < std::abs(lt.eigenvalues()(best) - ev.front()))
      best = i;
  Eigen::VectorXd s = lt.eigenvectors().col(best).real();
  s /= s.dot(u);

  const auto w = detail::to_vec(family_direction(basis, static_cast<std::size_t>(dim - 1)));
  if (s.dot(w) < 0.0) {
    u = -u;
    s = -s;
  }
  rep.unstable_vector = detail::to_std(u);
  rep.stable_functional = detail::to_std(s);
  const double ad = std::abs(rep.delta);
  rep.right_residual = (Md * u - rep.delta * u).cwiseAbs().maxCoeff() / ad;
  rep.left_residual = (Md.transpose() * s - rep.delta * s).cwiseAbs().maxCoeff() /
                      (ad * s.cwiseAbs().maxCoeff());
  return rep;
}

inline SpectralReport spectrum(const UnimodalMap& f, const RenormStep& step) {
  double worst = 0.0;
  const auto Md = derivative_matrix(f, step, kSpectrumColumnTol, &worst);
  auto rep = spectrum_of_matrix(Md, f.basis());
  rep.column_residual = worst;
  return rep;
}

inline SpectralReport spectrum(const UnimodalMap& f) { return spectrum(f, detect(f)); }

inline std::string eigenvalue_csv(const SpectralReport& r) {
  std::ostringstream os;
  os << "index,re,im,modulus\n";
  for (std::size_t i = 0; i < r.eigenvalues.size(); ++i)
    os << i << ',' << format_double(r.eigenvalues[i].real()) << ','
       << format_double(r.eigenvalues[i].imag()) << ',' << format_double(std::abs(r.eigenvalues[i]))
       << '\n';
  return os.str();
}

inline nlohmann::json to_json(const SpectralReport& r) {
  nlohmann::json ev = nlohmann::json::array();
  for (const auto& z : r.eigenvalues) ev.push_back({z.real(), z.imag()});
  return {{"matrix_dim", r.matrix_dim},
          {"eigenvalues", std::move(ev)},
          {"delta", r.delta},
          {"gap", r.gap},
          {"unstable_count", r.unstable_count},
          {"hyperbolic", r.hyperbolic},
          {"unstable_vector", r.unstable_vector},
          {"stable_functional", r.stable_functional},
          {"right_residual", r.right_residual},
          {"left_residual", r.left_residual},
          {"column_residual", r.column_residual}};
}

// ---------------------------------------------------------------------------
// Newton for periodic orbits of R

struct SolveOptions {
  std::size_t degree = 24;
  double tol = 1e-10;
  std::size_t max_iters = 50;
  std::size_t max_halvings = 8;
  bool finite_difference_jacobian = false;
  Basis basis = Basis::OrthogonalU;
};

struct PeriodicOrbitResult {
  std::vector<UnimodalMap> cycle;
  std::vector<Permutation> combinatorics;
  std::vector<double> lambdas;
  double residual = 0.0;  // sup-grid |R g_i - g_{i+1}|
  std::size_t newton_iters = 0;
  std::vector<double> residual_history;  // coefficient residual before each step and at exit
  SpectralReport multipliers;
};

struct FixedPointResult {
  UnimodalMap g;
  Permutation theta;
  double residual = 0.0;
  double lambda_star = 0.0;
  std::size_t newton_iters = 0;
  std::vector<double> residual_history;
};

namespace detail {

// Quadratic truncation of R: the x^2 coefficient of R f_c's leading part,
// c' = -(f^p)''(0) lambda / 2.
inline double quadratic_truncation(double c, std::size_t p) {
  double x = 1.0, prod = -2.0 * c;
  for (std::size_t m = 1; m < p; ++m) {
    prod *= -2.0 * c * x;
    x = 1.0 - c * x * x;
  }
  return -prod * x / 2.0;
}

// Seed chain c_0 -> c_1 -> ... -> c_m = c_0 of the truncated operator with
// each c_i in the window of thetas[i].
inline std::vector<double> quadratic_seed(const std::vector<Permutation>& thetas) {
  auto chain = [&](double c0, std::vector<double>* out) -> std::optional<double> {
    double c = c0;
    for (const auto& th : thetas) {
      if (!(c > 0.0 && c <= QuadraticFamily::kMax)) return std::nullopt;
      if (!has_itinerary(c, {th}, 1)) return std::nullopt;
      if (out) out->push_back(c);
      c = quadratic_truncation(c, th.period());
    }
    return c - c0;
  };
  const std::size_t grid = 20000;
  double prev_c = 0.0;
  std::optional<double> prev;
  for (std::size_t i = 1; i <= grid; ++i) {
    const double c = QuadraticFamily::kMax * static_cast<double>(i) / static_cast<double>(grid);
    const auto h = chain(c, nullptr);
    if (h && prev && ((*h < 0.0) != (*prev < 0.0))) {
      double a = prev_c, b = c, fa = *prev;
      for (int it = 0; it < 200 && b - a > 1e-15; ++it) {
        const double m = 0.5 * (a + b);
        const auto fm = chain(m, nullptr);
        if (!fm) break;
        if ((*fm < 0.0) == (fa < 0.0)) {
          a = m;
          fa = *fm;
        } else {
          b = m;
        }
      }
      std::vector<double> cs;
      if (chain(0.5 * (a + b), &cs)) return cs;
    }
    prev = h;
    prev_c = c;
  }
  throw NoConvergence("no quadratic seed for the requested combinatorics");
}

inline bool renormalizable_with(const UnimodalMap& f, std::size_t p) {
  return static_cast<bool>(test_period(f, p));
}

inline double grid_residual(const std::vector<UnimodalMap>& cyc, const std::vector<std::size_t>& ps) {
  double r = 0.0;
  const std::size_t m = cyc.size();
  for (std::size_t i = 0; i < m; ++i) {
    const double lambda = iterate(cyc[i], 0.0, ps[i]);
    const RenormalizedView<UnimodalMap> v(cyc[i], ps[i], lambda);
    const auto& nxt = cyc[(i + 1) % m];
    r = std::max(r, sup_distance([&](double x) { return v.eval(x); },
                                 [&](double x) { return nxt.eval(x); }, kResidualGrid));
  }
  return r;
}

inline std::vector<double> pinned(std::vector<double> c, Basis basis) {
  const auto ell = value_at_zero_functional(basis, c.size() - 1);
  double at0 = 0.0;
  for (std::size_t j = 0; j < c.size(); ++j) at0 += ell[j] * c[j];
  c[0] += 1.0 - at0;
  return c;
}

}  // namespace detail

/// Newton on (R g_0 - g_1, ..., R g_{m-1} - g_0) with one normalization row
/// per block, from explicit seeds.
inline PeriodicOrbitResult solve_periodic_orbit_from(std::vector<UnimodalMap> seeds,
                                                     const std::vector<Permutation>& thetas,
                                                     const SolveOptions& opt = {}) {
  const std::size_t m = thetas.size();
  if (m == 0 || seeds.size() != m) throw DomainError("need one seed per permutation");
  const std::size_t D = opt.degree, n = D + 1;
  std::vector<std::size_t> ps;
  for (const auto& th : thetas) ps.push_back(th.period());
  const auto ell = detail::to_vec(value_at_zero_functional(opt.basis, D));

  std::vector<UnimodalMap> g;
  for (auto& s : seeds) g.push_back(s.basis() == opt.basis && s.degree() == D ? s : to_basis(s, opt.basis, D));

  auto residual = [&](const std::vector<UnimodalMap>& cur, Eigen::VectorXd& F) {
    F.resize(static_cast<Eigen::Index>(m * n));
    for (std::size_t i = 0; i < m; ++i) {
      const auto pr = detail::project_renormalized(cur[i], ps[i], D, opt.basis);
      const auto& nxt = cur[(i + 1) % m].coeffs();
      for (std::size_t r = 0; r < n; ++r)
        F(static_cast<Eigen::Index>(i * n + r)) = pr.coeffs[r] - nxt[r];
      F(static_cast<Eigen::Index>(i * n)) = ell.dot(detail::to_vec(cur[i].coeffs())) - 1.0;
    }
    return F.cwiseAbs().maxCoeff();
  };

  PeriodicOrbitResult out;
  Eigen::VectorXd F;
  double norm = residual(g, F);
  out.residual_history.push_back(norm);
  const double stop = std::min(1e-2 * opt.tol, 1e-12);
  std::size_t it = 0;
  for (; it < opt.max_iters && norm > stop; ++it) {
    const auto N = static_cast<Eigen::Index>(m * n);
    Eigen::MatrixXd J = Eigen::MatrixXd::Zero(N, N);
    for (std::size_t i = 0; i < m; ++i) {
      const RenormStep step{ps[i], iterate(g[i], 0.0, ps[i]), thetas[i], {}};
      const auto Mi = opt.finite_difference_jacobian ? fd_derivative_matrix(g[i], step)
                                                     : newton_jacobian(g[i], step);
      const auto bi = static_cast<Eigen::Index>(i * n), bn = static_cast<Eigen::Index>(((i + 1) % m) * n);
      J.block(bi, bi, static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n)) += Mi;
      J.block(bi, bn, static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n)) -=
          Eigen::MatrixXd::Identity(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
      J.row(bi).setZero();
      J.block(bi, bi, 1, static_cast<Eigen::Index>(n)) = ell.transpose();
    }
    const Eigen::VectorXd dx = J.partialPivLu().solve(-F);
    if (!dx.allFinite()) throw NoConvergence("singular Newton system");

    double t = 1.0;
    bool accepted = false;
    for (std::size_t h = 0; h <= opt.max_halvings; ++h, t *= 0.5) {
      std::vector<UnimodalMap> trial;
      bool ok = true;
      try {
        for (std::size_t i = 0; i < m; ++i) {
          Eigen::VectorXd c = detail::to_vec(g[i].coeffs()) + t * dx.segment(static_cast<Eigen::Index>(i * n), static_cast<Eigen::Index>(n));
          trial.emplace_back(opt.basis, detail::pinned(detail::to_std(c), opt.basis));
          if (!detail::renormalizable_with(trial.back(), ps[i])) ok = false;
        }
      } catch (const DomainError&) {
        ok = false;
      }
      if (!ok) continue;
      Eigen::VectorXd Ft;
      const double nt = residual(trial, Ft);
      if (std::isfinite(nt) && nt < norm) {
        g = std::move(trial);
        F = std::move(Ft);
        norm = nt;
        accepted = true;
        break;
      }
    }
    if (!accepted) {
      if (norm <= opt.tol) break;
      throw NoConvergence("Newton step rejected after " + std::to_string(opt.max_halvings) +
                          " halvings at residual " + format_double(norm));
    }
    out.residual_history.push_back(norm);
  }
  out.newton_iters = it;
  out.residual = detail::grid_residual(g, ps);
  if (!(out.residual < opt.tol))
    throw NoConvergence("residual " + format_double(out.residual) + " after " + std::to_string(it) +
                        " Newton iterations");

  for (std::size_t i = 0; i < m; ++i) {
    const Detection d = detect_status(g[i]);
    if (!d || d.step->p != ps[i] || d.step->perm != thetas[i])
      throw CombinatoricsMismatch("cycle element " + std::to_string(i) + " does not renormalize with " +
                                  thetas[i].to_string());
    out.lambdas.push_back(d.step->lambda);
  }
  Eigen::MatrixXd P = Eigen::MatrixXd::Identity(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  double worst = 0.0;
  for (std::size_t i = 0; i < m; ++i)
    P = derivative_matrix(g[i], RenormStep{ps[i], out.lambdas[i], thetas[i], {}}, kSpectrumColumnTol,
                          &worst) *
        P;
  out.multipliers = spectrum_of_matrix(P, opt.basis);
  out.multipliers.column_residual = worst;
  out.cycle = std::move(g);
  out.combinatorics = thetas;
  return out;
}

inline constexpr double kPeriodDoublingSeed = 1.52763;

/// Default seeds: 1 - 1.52763 x^2 for pure period doubling, otherwise the
/// periodic orbit of the quadratic truncation of R inside the family windows.
inline std::vector<UnimodalMap> default_seeds(const std::vector<Permutation>& thetas) {
  const QuadraticFamily fam;
  std::vector<UnimodalMap> s;
  if (thetas.size() == 1 && thetas[0] == period_doubling_permutation()) {
    s.push_back(fam.member(kPeriodDoublingSeed));
    return s;
  }
  for (double c : detail::quadratic_seed(thetas)) s.push_back(fam.member(c));
  return s;
}

inline PeriodicOrbitResult solve_periodic_orbit(const std::vector<Permutation>& thetas,
                                                const SolveOptions& opt = {}) {
  return solve_periodic_orbit_from(default_seeds(thetas), thetas, opt);
}

inline FixedPointResult solve_fixed_point(const Permutation& theta = period_doubling_permutation(),
                                          const SolveOptions& opt = {}) {
  if (opt.degree < 10) throw DomainError("degree must be at least 10");
  auto r = solve_periodic_orbit({theta}, opt);
  return FixedPointResult{std::move(r.cycle.front()), theta, r.residual, r.lambdas.front(),
                          r.newton_iters, std::move(r.residual_history)};
}

inline nlohmann::json to_json(const FixedPointResult& r) {
  return {{"g", r.g},
          {"theta", r.theta.image},
          {"residual", r.residual},
          {"lambda_star", r.lambda_star},
          {"newton_iters", r.newton_iters},
          {"residual_history", r.residual_history}};
}

inline nlohmann::json to_json(const PeriodicOrbitResult& r) {
  nlohmann::json cyc = nlohmann::json::array(), th = nlohmann::json::array();
  for (const auto& g : r.cycle) cyc.push_back(g);
  for (const auto& t : r.combinatorics) th.push_back(t.image);
  return {{"cycle", std::move(cyc)},
          {"combinatorics", std::move(th)},
          {"lambdas", r.lambdas},
          {"residual", r.residual},
          {"newton_iters", r.newton_iters},
          {"residual_history", r.residual_history},
          {"multipliers", to_json(r.multipliers)}};
}

/// Largest C with r_{i+1} = C r_i^2 over the last three recorded residuals.
inline double quadratic_tail_constant(const std::vector<double>& h) {
  double C = 0.0;
  const std::size_t n = h.size();
  for (std::size_t i = n >= 3 ? n - 3 : 0; i + 1 < n; ++i)
    if (h[i] > 0.0) C = std::max(C, h[i + 1] / (h[i] * h[i]));
  return C;
}

// ---------------------------------------------------------------------------
// Convergence of R^n f towards R^n g

struct ConvergenceReport {
  std::vector<double> distances;  // d_n, n = 0..n_max
  std::vector<Permutation> combinatorics;
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
  bool fit_valid = false;
};

/// Least-squares line through (n, log d_n).
inline void fit_log_linear(ConvergenceReport& r) {
  const std::size_t N = r.distances.size();
  r.fit_valid = N >= 2 && std::all_of(r.distances.begin(), r.distances.end(),
                                      [](double d) { return d > 0.0 && std::isfinite(d); });
  if (!r.fit_valid) return;
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < N; ++i) {
    const double x = static_cast<double>(i), y = std::log(r.distances[i]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  const double dn = static_cast<double>(N);
  r.slope = (dn * sxy - sx * sy) / (dn * sxx - sx * sx);
  r.intercept = (sy - r.slope * sx) / dn;
  double ss_res = 0, ss_tot = 0;
  const double ybar = sy / dn;
  for (std::size_t i = 0; i < N; ++i) {
    const double y = std::log(r.distances[i]);
    const double e = y - (r.intercept + r.slope * static_cast<double>(i));
    ss_res += e * e;
    ss_tot += (y - ybar) * (y - ybar);
  }
  r.r_squared = ss_tot > 0.0 ? 1.0 - ss_res / ss_tot : 1.0;
}

/// d_n = sup-grid |R^n f - R^n g| for n = 0..n_max, with R^n applied by
/// direct iteration of f and g.
template <UnimodalLike F, UnimodalLike G>
ConvergenceReport convergence_experiment(const F& f, const G& g, std::size_t n_max) {
  ConvergenceReport rep;
  std::size_t pf = 1, pg = 1;
  double lf = 1.0, lg = 1.0;
  for (std::size_t n = 0; n <= n_max; ++n) {
    const RenormalizedView<F> vf(f, pf, lf);
    const RenormalizedView<G> vg(g, pg, lg);
    rep.distances.push_back(sup_distance([&](double x) { return vf.eval(x); },
                                         [&](double x) { return vg.eval(x); }, kResidualGrid));
    if (n == n_max) break;
    const Detection df = detect_status(vf), dg = detect_status(vg);
    if (!df || !dg || df.step->perm != dg.step->perm)
      throw CombinatoricsMismatch("combinatorics differ at level " + std::to_string(n + 1));
    rep.combinatorics.push_back(df.step->perm);
    pf *= df.step->p;
    pg *= dg.step->p;
    lf *= df.step->lambda;
    lg *= dg.step->lambda;
  }
  fit_log_linear(rep);
  return rep;
}

inline nlohmann::json to_json(const ConvergenceReport& r) {
  nlohmann::json th = nlohmann::json::array();
  for (const auto& t : r.combinatorics) th.push_back(t.image);
  return {{"distances", r.distances},
          {"combinatorics", std::move(th)},
          {"slope", r.slope},
          {"intercept", r.intercept},
          {"r_squared", r.r_squared},
          {"fit_valid", r.fit_valid}};
}

}  // namespace renormlab

#endif  // RENORMLAB_SOLVER_HPP
