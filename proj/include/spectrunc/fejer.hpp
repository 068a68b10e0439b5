#pragma once

// Dirichlet and Fejer kernels on T and the Fejer kernel on T^{2q} attached to
// the polyhedron P = { r in R^{2q} : |r_l + ... + r_k| <= 1 for all l <= k }.
//
// The multidimensional kernel is F(t) = (1/n) sum_{j=0}^{n-1} sum_{r in jP cap Z^{2q}} e^{i r.t}.
// Summing over lattice paths 0 <= r_0..r_{2q} <= n-1 instead of difference
// vectors turns it into a product of 2q+1 one-dimensional geometric sums,
// which is what fejer_multi evaluates. fejer_multi_oracle keeps the lattice
// form and is only meant for small n, q.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <random>
#include <set>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "spectrunc/torus.hpp"

namespace spectrunc {

/// sum_{r=0}^{n-1} e^{i r s}.
inline cplx dirichlet(std::size_t n, double s) {
  const double half = 0.5 * s;
  const double den = std::sin(half);
  if (std::abs(den) < 1e-7) {
    cplx acc{0.0, 0.0};
    for (std::size_t r = 0; r < n; ++r) acc += std::polar(1.0, double(r) * s);
    return acc;
  }
  const double nd = static_cast<double>(n);
  return std::polar(std::sin(nd * half) / den, (nd - 1.0) * half);
}

inline double fejer_1d(std::size_t n, double t) {
  if (n == 0) throw std::invalid_argument("fejer_1d: n must be positive");
  return std::norm(dirichlet(n, t)) / static_cast<double>(n);
}

/// Complex value of the chain product; its imaginary part is round-off.
inline cplx fejer_multi_complex(std::size_t n, std::span<const double> t) {
  if (n == 0) throw std::invalid_argument("fejer_multi: n must be positive");
  if (t.empty() || t.size() % 2 != 0)
    throw std::invalid_argument("fejer_multi: expected 2q coordinates");
  cplx v = dirichlet(n, t.front());
  for (std::size_t k = 0; k + 1 < t.size(); ++k) v *= dirichlet(n, t[k + 1] - t[k]);
  v *= dirichlet(n, -t.back());
  return v / static_cast<double>(n);
}

inline double fejer_multi(std::size_t n, std::span<const double> t) {
  return fejer_multi_complex(n, t).real();
}

inline double fejer_peak(std::size_t n, std::size_t q) {
  return std::pow(static_cast<double>(n), 2.0 * static_cast<double>(q));
}

// ---------------------------------------------------------------------------
// Lattice side.

using LatticePoint = std::vector<long>;
using LatticeSet = std::set<LatticePoint>;

/// Largest |r_l + ... + r_k| over l <= k, i.e. the spread of the partial sums.
inline long partial_sum_spread(std::span<const long> r) {
  long s = 0, lo = 0, hi = 0;
  for (long v : r) {
    s += v;
    lo = std::min(lo, s);
    hi = std::max(hi, s);
  }
  return hi - lo;
}

/// r in sP iff every consecutive partial sum has modulus <= s.
inline bool in_polyhedron(std::span<const long> r, long s) {
  for (std::size_t l = 0; l < r.size(); ++l) {
    long acc = 0;
    for (std::size_t k = l; k < r.size(); ++k) {
      acc += r[k];
      if (std::abs(acc) > s) return false;
    }
  }
  return true;
}

namespace detail {
// Visits every vector in [lo, hi]^dim in lexicographic order.
template <class F>
void for_each_box_point(std::size_t dim, long lo, long hi, F&& f) {
  LatticePoint r(dim, lo);
  while (true) {
    f(std::as_const(r));
    std::size_t i = 0;
    while (i < dim && r[i] == hi) r[i++] = lo;
    if (i == dim) return;
    ++r[i];
  }
}
}  // namespace detail

inline LatticeSet lattice_points_mP(long m, std::size_t q) {
  if (m < 0 || m > 4 || q == 0 || q > 2)
    throw std::invalid_argument("lattice_points_mP: supported for 0 <= m <= 4, 1 <= q <= 2");
  LatticeSet out;
  detail::for_each_box_point(2 * q, -m, m, [&](const LatticePoint& r) {
    if (in_polyhedron(r, m)) out.insert(r);
  });
  return out;
}

/// Difference vectors of paths r_0..r_{2q} in [0, m] that touch m somewhere.
inline LatticeSet q_set_union(long m, std::size_t q) {
  if (m < 0 || m > 4 || q == 0 || q > 2)
    throw std::invalid_argument("q_set_union: supported for 0 <= m <= 4, 1 <= q <= 2");
  LatticeSet out;
  detail::for_each_box_point(2 * q + 1, 0, m, [&](const LatticePoint& path) {
    if (std::find(path.begin(), path.end(), m) == path.end()) return;
    LatticePoint d(2 * q);
    for (std::size_t i = 0; i < d.size(); ++i) d[i] = path[i + 1] - path[i];
    out.insert(std::move(d));
  });
  return out;
}

/// Direct lattice summation of the Fejer kernel on T^{2q}.
inline double fejer_multi_oracle(std::size_t n, std::size_t q, std::span<const double> t) {
  if (n == 0 || n > 8 || q == 0 || q > 2)
    throw std::invalid_argument("fejer_multi_oracle: supported for 1 <= n <= 8, 1 <= q <= 2");
  if (t.size() != 2 * q) throw std::invalid_argument("fejer_multi_oracle: expected 2q coordinates");
  const long top = static_cast<long>(n) - 1;
  cplx acc{0.0, 0.0};
  detail::for_each_box_point(2 * q, -top, top, [&](const LatticePoint& r) {
    double phase = 0.0;
    for (std::size_t i = 0; i < r.size(); ++i) phase += double(r[i]) * t[i];
    const cplx e = std::polar(1.0, phase);
    for (long j = 0; j <= top; ++j)
      if (in_polyhedron(r, j)) acc += e;
  });
  return acc.real() / static_cast<double>(n);
}

// ---------------------------------------------------------------------------
// Minimum estimation. Used to pick the offset that restores positive
// definiteness of the truncated product kernel.

namespace detail {
inline double wrap_angle(double a) {
  a = std::fmod(a, kTwoPi);
  return a < 0.0 ? a + kTwoPi : a;
}

// Compass search; returns the best value found and updates x in place.
inline double pattern_descent(std::size_t n, std::vector<double>& x, double step) {
  double best = fejer_multi(n, x);
  int guard = 0;
  while (step > 1e-11 && guard++ < 20000) {
    bool moved = false;
    for (std::size_t i = 0; i < x.size(); ++i) {
      for (double dir : {1.0, -1.0}) {
        const double old = x[i];
        x[i] = wrap_angle(old + dir * step);
        const double v = fejer_multi(n, x);
        if (v < best) {
          best = v;
          moved = true;
        } else {
          x[i] = old;
        }
      }
    }
    if (!moved) step *= 0.5;
  }
  return best;
}
}  // namespace detail

struct FejerMinimum {
  double value;
  std::vector<double> argmin;
};

/// Estimated global minimum of the Fejer kernel on T^{2q}. For q = 1 a full
/// grid scan seeds local refinement; for q >= 2 seeded random multistart is
/// used. Not a certificate.
inline FejerMinimum fejer_min_estimate(std::size_t n, std::size_t q, std::size_t grid_density,
                                       std::uint64_t seed = 0x5eed) {
  if (n == 0 || q == 0) throw std::invalid_argument("fejer_min_estimate: n, q must be positive");
  if (grid_density < 2) grid_density = 2;
  const std::size_t dim = 2 * q;
  const double h = kTwoPi / static_cast<double>(grid_density);

  // Candidate starts ordered by value.
  std::vector<std::pair<double, std::vector<double>>> starts;
  if (q == 1) {
    for (std::size_t a = 0; a < grid_density; ++a)
      for (std::size_t b = 0; b < grid_density; ++b) {
        std::vector<double> x{h * double(a), h * double(b)};
        starts.emplace_back(fejer_multi(n, x), std::move(x));
      }
  } else {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> angle(0.0, kTwoPi);
    const std::size_t count = std::max<std::size_t>(64, grid_density * grid_density);
    for (std::size_t s = 0; s < count; ++s) {
      std::vector<double> x(dim);
      for (auto& v : x) v = angle(rng);
      starts.emplace_back(fejer_multi(n, x), std::move(x));
    }
  }
  const std::size_t keep = std::min<std::size_t>(starts.size(), 16);
  std::partial_sort(starts.begin(), starts.begin() + long(keep), starts.end(),
                    [](const auto& a, const auto& b) { return a.first < b.first; });

  FejerMinimum best{std::numeric_limits<double>::infinity(), {}};
  for (std::size_t i = 0; i < keep; ++i) {
    auto x = starts[i].second;
    const double v = detail::pattern_descent(n, x, q == 1 ? h : 0.25);
    if (v < best.value) best = {v, x};
  }
  return best;
}

// ---------------------------------------------------------------------------

/// Tensor rectangle-rule approximation of the normalized integral
/// int_{T^{2q}} g(t) F(z 1 - t) dt with `points` nodes per axis.
template <class G>
cplx fejer_convolve(G&& g, std::size_t n, std::size_t q, double z, std::size_t points) {
  if (q == 0 || q > 2) throw std::invalid_argument("fejer_convolve: supported for 1 <= q <= 2");
  const std::size_t dim = 2 * q;
  const double total = std::pow(static_cast<double>(points), static_cast<double>(dim));
  if (points == 0 || total > 5e7)
    throw std::invalid_argument("fejer_convolve: quadrature budget exceeded");
  const double h = kTwoPi / static_cast<double>(points);
  std::vector<std::size_t> idx(dim, 0);
  std::vector<double> t(dim), u(dim);
  cplx acc{0.0, 0.0};
  while (true) {
    for (std::size_t i = 0; i < dim; ++i) {
      t[i] = h * static_cast<double>(idx[i]);
      u[i] = z - t[i];
    }
    acc += g(std::span<const double>(t)) * fejer_multi_complex(n, u);
    std::size_t i = 0;
    while (i < dim && idx[i] == points - 1) idx[i++] = 0;
    if (i == dim) break;
    ++idx[i];
  }
  return acc / total;
}

}  // namespace spectrunc
