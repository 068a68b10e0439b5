#pragma once

// Sampled functions on the torus T = R / 2piZ.
//
// A function is stored by its values on the uniform grid z_p = 2 pi p / m.
// Integrals use the normalized Haar measure dt / 2pi evaluated with the
// m-point rectangle rule, which is exact for trigonometric polynomials of
// degree < m / 2.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <numbers>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "spectrunc/error.hpp"

namespace spectrunc {

using cplx = std::complex<double>;

inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

class TorusGrid {
 public:
  explicit TorusGrid(std::size_t m) : m_(m) {
    if (m < 2) throw std::invalid_argument("TorusGrid needs at least 2 points");
  }

  std::size_t size() const noexcept { return m_; }
  double spacing() const noexcept { return kTwoPi / static_cast<double>(m_); }
  double point(std::size_t p) const noexcept {
    return kTwoPi * static_cast<double>(p) / static_cast<double>(m_);
  }

  /// e^{i k z_p}, computed from the exact root of unity index (k p mod m).
  cplx character(long k, std::size_t p) const noexcept {
    const long mm = static_cast<long>(m_);
    long r = (k % mm) * static_cast<long>(p % m_) % mm;
    if (r < 0) r += mm;
    return std::polar(1.0, kTwoPi * static_cast<double>(r) / static_cast<double>(m_));
  }

  friend bool operator==(const TorusGrid&, const TorusGrid&) = default;

 private:
  std::size_t m_;
};

class SampledFunction {
 public:
  explicit SampledFunction(TorusGrid grid) : grid_(grid), values_(grid.size()) {}

  SampledFunction(TorusGrid grid, std::vector<cplx> values)
      : grid_(grid), values_(std::move(values)) {
    if (values_.size() != grid_.size())
      throw std::invalid_argument("SampledFunction: " + std::to_string(values_.size()) +
                                  " values for a grid of " + std::to_string(grid_.size()));
  }

  /// Samples a callable z -> complex on the grid.
  template <class F>
  static SampledFunction from(TorusGrid grid, F&& f) {
    std::vector<cplx> v(grid.size());
    for (std::size_t p = 0; p < v.size(); ++p) v[p] = cplx(f(grid.point(p)));
    return SampledFunction(grid, std::move(v));
  }

  static SampledFunction constant(TorusGrid grid, cplx c) {
    return SampledFunction(grid, std::vector<cplx>(grid.size(), c));
  }

  const TorusGrid& grid() const noexcept { return grid_; }
  std::size_t size() const noexcept { return values_.size(); }
  std::span<const cplx> values() const noexcept { return values_; }
  std::span<cplx> values() noexcept { return values_; }
  const cplx& operator[](std::size_t p) const { return values_[p]; }
  cplx& operator[](std::size_t p) { return values_[p]; }

  SampledFunction conj() const {
    SampledFunction out(grid_);
    for (std::size_t p = 0; p < size(); ++p) out[p] = std::conj(values_[p]);
    return out;
  }

  double max_imag() const noexcept {
    double worst = 0.0;
    for (const auto& v : values_) worst = std::max(worst, std::abs(v.imag()));
    return worst;
  }

  bool is_real(double tol = 1e-10) const noexcept { return max_imag() <= tol; }

 private:
  TorusGrid grid_;
  std::vector<cplx> values_;
};

/// An element of A^d: d sampled functions on one grid.
class FunctionTuple {
 public:
  explicit FunctionTuple(std::vector<SampledFunction> components)
      : components_(std::move(components)) {
    if (components_.empty()) throw std::invalid_argument("FunctionTuple needs d >= 1");
    for (const auto& c : components_)
      if (!(c.grid() == components_.front().grid()))
        throw GridMismatch("FunctionTuple components use different grids");
  }

  std::size_t dim() const noexcept { return components_.size(); }
  const TorusGrid& grid() const noexcept { return components_.front().grid(); }
  const SampledFunction& operator[](std::size_t i) const { return components_[i]; }
  SampledFunction& operator[](std::size_t i) { return components_[i]; }
  const std::vector<SampledFunction>& components() const noexcept { return components_; }

  /// Pointwise evaluation x(z_p) as a vector in C^d.
  std::vector<cplx> at(std::size_t p) const {
    std::vector<cplx> v(dim());
    for (std::size_t i = 0; i < dim(); ++i) v[i] = components_[i][p];
    return v;
  }

 private:
  std::vector<SampledFunction> components_;
};

inline void require_same_grid(const SampledFunction& f, const SampledFunction& g) {
  if (!(f.grid() == g.grid()))
    throw GridMismatch(std::to_string(f.grid().size()) + " vs " +
                       std::to_string(g.grid().size()) + " points");
}

/// (1/m) sum_p f(z_p).
inline cplx integrate(const SampledFunction& f) {
  cplx s{0.0, 0.0};
  for (const auto& v : f.values()) s += v;
  return s / static_cast<double>(f.size());
}

/// e^{2 pi i r / m} for r = 0..m-1, cached per thread for the last m used.
inline const std::vector<cplx>& unit_roots(std::size_t m) {
  thread_local std::vector<cplx> table;
  if (table.size() != m) {
    table.resize(m);
    for (std::size_t r = 0; r < m; ++r)
      table[r] = std::polar(1.0, kTwoPi * static_cast<double>(r) / static_cast<double>(m));
  }
  return table;
}

namespace detail {
// sum_p f(z_p) e^{-ikz_p}
inline cplx character_sum(const SampledFunction& f, long k) {
  const auto& roots = unit_roots(f.size());
  const long m = static_cast<long>(f.size());
  long step = (-k) % m;
  if (step < 0) step += m;
  cplx s{0.0, 0.0};
  long idx = 0;
  for (std::size_t p = 0; p < f.size(); ++p) {
    s += f[p] * roots[static_cast<std::size_t>(idx)];
    idx += step;
    if (idx >= m) idx -= m;
  }
  return s;
}
}  // namespace detail

/// k-th Fourier coefficient; |k| must stay below m/2.
inline cplx fourier_coeff(const SampledFunction& f, long k) {
  const auto m = static_cast<long>(f.size());
  if (2 * std::abs(k) >= m)
    throw AliasingError("fourier_coeff: |k| = " + std::to_string(std::abs(k)) +
                        " aliases on a grid of " + std::to_string(m) + " points");
  return detail::character_sum(f, k) / static_cast<double>(m);
}

/// Fourier coefficient of the trigonometric interpolant of the samples.
/// Below the Nyquist index this equals fourier_coeff; at |k| = m/2 (even m)
/// the aliased coefficient is split evenly between +k and -k; beyond it is 0.
inline cplx interpolant_coeff(const SampledFunction& f, long k) {
  const auto m = static_cast<long>(f.size());
  const long twice = 2 * std::abs(k);
  if (twice < m) return fourier_coeff(f, k);
  if (twice > m) return {0.0, 0.0};
  return 0.5 * detail::character_sum(f, k) / static_cast<double>(m);
}

inline double l2_distance(const SampledFunction& f, const SampledFunction& g) {
  require_same_grid(f, g);
  double s = 0.0;
  for (std::size_t p = 0; p < f.size(); ++p) s += std::norm(f[p] - g[p]);
  return std::sqrt(s / static_cast<double>(f.size()));
}

inline double l2_norm(const SampledFunction& f) {
  double s = 0.0;
  for (const auto& v : f.values()) s += std::norm(v);
  return std::sqrt(s / static_cast<double>(f.size()));
}

inline double sup_distance(const SampledFunction& f, const SampledFunction& g) {
  require_same_grid(f, g);
  double worst = 0.0;
  for (std::size_t p = 0; p < f.size(); ++p) worst = std::max(worst, std::abs(f[p] - g[p]));
  return worst;
}

/// Shortest distance between two angles on the circle, in [0, pi].
inline double circular_distance(double a, double b) {
  double d = std::fmod(std::abs(a - b), kTwoPi);
  return std::min(d, kTwoPi - d);
}

/// Unnormalized rectangle-rule integral of f over the closed arc [z - delta, z + delta].
inline cplx window_integral(const SampledFunction& f, double z, double delta) {
  if (!(delta > 0.0) || !(delta < std::numbers::pi))
    throw std::domain_error("window_integral: need 0 < delta < pi");
  // Grid points sit at exact multiples of the spacing; a relative slack keeps
  // points at distance exactly delta inside the closed window.
  const double tol = 1e-12 * kTwoPi;
  cplx s{0.0, 0.0};
  for (std::size_t p = 0; p < f.size(); ++p)
    if (circular_distance(f.grid().point(p), z) <= delta + tol) s += f[p];
  return s * f.grid().spacing();
}

}  // namespace spectrunc
