#ifndef RENORMLAB_TESTS_FIXTURES_HPP
#define RENORMLAB_TESTS_FIXTURES_HPP

#include <map>

#include <renormlab/renormlab.hpp>

// Solved once per test binary.
namespace fixtures {

inline const renormlab::FixedPointResult& feigenbaum(std::size_t degree = 24) {
  static std::map<std::size_t, renormlab::FixedPointResult> cache;
  auto it = cache.find(degree);
  if (it == cache.end()) {
    renormlab::SolveOptions o;
    o.degree = degree;
    it = cache.emplace(degree, renormlab::solve_fixed_point(renormlab::period_doubling_permutation(), o)).first;
  }
  return it->second;
}

inline const renormlab::FixedPointResult& period3(std::size_t degree = 24) {
  static std::map<std::size_t, renormlab::FixedPointResult> cache;
  auto it = cache.find(degree);
  if (it == cache.end()) {
    renormlab::SolveOptions o;
    o.degree = degree;
    it = cache.emplace(degree, renormlab::solve_fixed_point(renormlab::Permutation{{1, 2, 0}}, o)).first;
  }
  return it->second;
}

inline const renormlab::CascadeReport& cascade10() {
  static const auto r = renormlab::cascade(renormlab::QuadraticFamily{}, 10);
  return r;
}

inline renormlab::Permutation theta2() { return renormlab::period_doubling_permutation(); }
inline renormlab::Permutation theta3() { return renormlab::Permutation{{1, 2, 0}}; }

}  // namespace fixtures

#endif  // RENORMLAB_TESTS_FIXTURES_HPP
