#pragma once

// Spectral truncation on T: R_n maps a function to the n x n Toeplitz matrix
// of its Fourier coefficients, S_n maps an n x n matrix back to the function
// z -> (1/n) sum_{j,l} A_{jl} e^{i(j-l)z}.

#include <Eigen/Dense>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include "spectrunc/error.hpp"
#include "spectrunc/torus.hpp"

namespace spectrunc {

using DenseMatrix = Eigen::MatrixXcd;

/// How Fourier coefficients beyond the alias-free range are obtained.
///   strict      - truncation with n - 1 >= m/2 is rejected;
///   bandlimited - samples are read as their trigonometric interpolant, so
///                 coefficients past the Nyquist index are zero.
enum class Spectrum { strict, bandlimited };

inline const char* to_string(Spectrum s) {
  return s == Spectrum::strict ? "strict" : "bandlimited";
}

/// R_n(x) stored as its 2n-1 diagonals, coeff(k) for k = -(n-1)..(n-1).
class ToeplitzRep {
 public:
  ToeplitzRep(std::size_t n, std::vector<cplx> coeffs) : n_(n), coeffs_(std::move(coeffs)) {
    if (n == 0) throw std::invalid_argument("ToeplitzRep: n must be positive");
    if (coeffs_.size() != 2 * n - 1)
      throw std::invalid_argument("ToeplitzRep: expected 2n-1 coefficients");
    band_ = 0;
    for (long k = -(long(n) - 1); k <= long(n) - 1; ++k)
      if (coeff(k) != cplx{}) band_ = std::max(band_, std::abs(k));
  }

  std::size_t n() const noexcept { return n_; }
  cplx coeff(long k) const { return coeffs_[static_cast<std::size_t>(k + long(n_) - 1)]; }
  const std::vector<cplx>& coeffs() const noexcept { return coeffs_; }
  /// Largest |k| with a nonzero coefficient.
  long bandwidth() const noexcept { return band_; }

  DenseMatrix dense() const {
    DenseMatrix a(n_, n_);
    for (std::size_t j = 0; j < n_; ++j)
      for (std::size_t l = 0; l < n_; ++l) a(j, l) = coeff(long(j) - long(l));
    return a;
  }

 private:
  std::size_t n_;
  std::vector<cplx> coeffs_;
  long band_ = 0;
};

inline void check_truncation(std::size_t m, std::size_t n, Spectrum mode) {
  if (n == 0) throw std::invalid_argument("truncation parameter n must be positive");
  if (mode == Spectrum::strict && 2 * (n - 1) >= m)
    throw AliasingError("truncation n = " + std::to_string(n) + " aliases on a grid of " +
                        std::to_string(m) + " points (need n - 1 < m/2)");
}

inline ToeplitzRep truncate(const SampledFunction& x, std::size_t n,
                            Spectrum mode = Spectrum::strict) {
  check_truncation(x.size(), n, mode);
  std::vector<cplx> c(2 * n - 1);
  const long m = static_cast<long>(x.size());
  for (long k = -(long(n) - 1); k <= long(n) - 1; ++k) {
    if (2 * std::abs(k) > m) continue;
    c[static_cast<std::size_t>(k + long(n) - 1)] = interpolant_coeff(x, k);
  }
  return ToeplitzRep(n, std::move(c));
}

/// e^{2 pi i r / m} for r = 0..m-1.
inline std::vector<cplx> roots_of_unity(std::size_t m) {
  std::vector<cplx> r(m);
  for (std::size_t i = 0; i < m; ++i)
    r[i] = std::polar(1.0, kTwoPi * static_cast<double>(i) / static_cast<double>(m));
  return r;
}

/// Evaluates (1/n) sum_k d_k e^{ikz_p} on the grid; d indexed k + (n-1).
inline SampledFunction sn_from_diagonals(const std::vector<cplx>& diag, std::size_t n,
                                         const TorusGrid& grid) {
  const auto m = grid.size();
  const auto& roots = unit_roots(m);
  const long mm = static_cast<long>(m);
  SampledFunction out(grid);
  for (long k = -(long(n) - 1); k <= long(n) - 1; ++k) {
    const cplx d = diag[static_cast<std::size_t>(k + long(n) - 1)];
    if (d == cplx{}) continue;
    long step = k % mm;
    if (step < 0) step += mm;
    long idx = 0;
    for (std::size_t p = 0; p < m; ++p) {
      out[p] += d * roots[static_cast<std::size_t>(idx)];
      idx += step;
      if (idx >= mm) idx -= mm;
    }
  }
  const double inv = 1.0 / static_cast<double>(n);
  for (auto& v : out.values()) v *= inv;
  return out;
}

/// Diagonal sums d_k = sum_{j - l = k} A_{jl}.
inline std::vector<cplx> diagonal_sums(const DenseMatrix& a) {
  const auto n = static_cast<std::size_t>(a.rows());
  std::vector<cplx> d(2 * n - 1);
  for (std::size_t j = 0; j < n; ++j)
    for (std::size_t l = 0; l < n; ++l) d[j - l + n - 1] += a(j, l);
  return d;
}

/// S_n(A) sampled on the grid.
inline SampledFunction sn_map(const DenseMatrix& a, const TorusGrid& grid) {
  if (a.rows() != a.cols() || a.rows() == 0)
    throw std::invalid_argument("sn_map: matrix must be square and non-empty");
  return sn_from_diagonals(diagonal_sums(a), static_cast<std::size_t>(a.rows()), grid);
}

/// S_n(A) at an arbitrary point z.
inline cplx sn_eval(const DenseMatrix& a, double z) {
  const auto n = static_cast<std::size_t>(a.rows());
  const auto d = diagonal_sums(a);
  cplx s{0.0, 0.0};
  for (long k = -(long(n) - 1); k <= long(n) - 1; ++k)
    s += d[static_cast<std::size_t>(k + long(n) - 1)] * std::polar(1.0, double(k) * z);
  return s / static_cast<double>(n);
}

inline DenseMatrix matmul(const DenseMatrix& a, const DenseMatrix& b) {
  if (a.cols() != b.rows())
    throw std::invalid_argument("matmul: size mismatch " + std::to_string(a.cols()) + " vs " +
                                std::to_string(b.rows()));
  return a * b;
}

inline DenseMatrix adjoint(const DenseMatrix& a) { return a.adjoint(); }

inline DenseMatrix matpow(const DenseMatrix& a, unsigned q) {
  if (q == 0) throw std::invalid_argument("matpow: q must be >= 1");
  if (a.rows() != a.cols()) throw std::invalid_argument("matpow: matrix must be square");
  DenseMatrix r = a;
  for (unsigned i = 1; i < q; ++i) r = r * a;
  return r;
}

/// Largest singular value.
inline double operator_norm(const DenseMatrix& a) {
  if (a.size() == 0) return 0.0;
  Eigen::BDCSVD<DenseMatrix> svd(a);
  return svd.singularValues()(0);
}

inline double operator_norm(const ToeplitzRep& t) { return operator_norm(t.dense()); }

/// S_n(R_n(x)) on x's grid, i.e. the Fejer mean of x.
inline SampledFunction smooth(const SampledFunction& x, std::size_t n,
                              Spectrum mode = Spectrum::strict) {
  const auto t = truncate(x, n, mode);
  std::vector<cplx> d(2 * n - 1);
  for (long k = -(long(n) - 1); k <= long(n) - 1; ++k)
    d[static_cast<std::size_t>(k + long(n) - 1)] =
        static_cast<double>(long(n) - std::abs(k)) * t.coeff(k);
  return sn_from_diagonals(d, n, x.grid());
}

inline FunctionTuple smooth(const FunctionTuple& x, std::size_t n,
                            Spectrum mode = Spectrum::strict) {
  std::vector<SampledFunction> out;
  out.reserve(x.dim());
  for (const auto& c : x.components()) out.push_back(smooth(c, n, mode));
  return FunctionTuple(std::move(out));
}

// ---------------------------------------------------------------------------
// Products of Toeplitz matrices pushed through S_n without forming S_n's
// argument densely. All routes compute the same quantity as
// sn_map(adjoint(L_1) ... adjoint(L_q) M_1 ... M_q).

/// Diagonal sums of R(a)^* R(b) in O(n^2), skipping zero bands.
inline std::vector<cplx> adjoint_product_diagonals(const ToeplitzRep& a, const ToeplitzRep& b) {
  const long n = static_cast<long>(a.n());
  if (b.n() != a.n()) throw std::invalid_argument("adjoint_product_diagonals: size mismatch");
  std::vector<cplx> d(static_cast<std::size_t>(2 * n - 1));
  const long ba = a.bandwidth();
  const long bb = b.bandwidth();
  // (R(a)^* R(b))_{jl} = sum_r conj(a[r-j]) b[r-l]; with u = r-j, v = r-l the
  // number of admissible r is n minus the spread of {0, u, v}.
  for (long u = -ba; u <= ba; ++u) {
    const cplx au = std::conj(a.coeff(u));
    if (au == cplx{}) continue;
    for (long v = -bb; v <= bb; ++v) {
      const long spread = std::max({0L, u, v}) - std::min({0L, u, v});
      const long count = n - spread;
      if (count <= 0) continue;
      d[static_cast<std::size_t>(v - u + n - 1)] += au * b.coeff(v) * static_cast<double>(count);
    }
  }
  return d;
}

/// W_{l,p} = e^{-i l z_p}, the vectors with S_n(A)(z_p) = (1/n) W_p^H A W_p.
inline DenseMatrix fourier_vectors(std::size_t n, const TorusGrid& grid) {
  DenseMatrix w(n, grid.size());
  for (std::size_t l = 0; l < n; ++l)
    for (std::size_t p = 0; p < grid.size(); ++p) w(l, p) = grid.character(-long(l), p);
  return w;
}

/// Column-wise (1/n) <u_p, v_p>: S_n(P^* Q) when U = P W and V = Q W.
inline SampledFunction sn_from_features(const DenseMatrix& u, const DenseMatrix& v,
                                        const TorusGrid& grid) {
  SampledFunction out(grid);
  const double inv = 1.0 / static_cast<double>(u.rows());
  for (std::size_t p = 0; p < grid.size(); ++p)
    out[p] = u.col(static_cast<Eigen::Index>(p)).dot(v.col(static_cast<Eigen::Index>(p))) * inv;
  return out;
}

/// S_n(L_1^* ... L_q^* M_1 ... M_q) on the grid.
inline SampledFunction sn_adjoint_chain(const std::vector<ToeplitzRep>& left,
                                        const std::vector<ToeplitzRep>& right,
                                        const TorusGrid& grid) {
  if (left.empty() || right.empty())
    throw std::invalid_argument("sn_adjoint_chain: empty factor list");
  const std::size_t n = left.front().n();
  if (left.size() == 1 && right.size() == 1)
    return sn_from_diagonals(adjoint_product_diagonals(left[0], right[0]), n, grid);
  const DenseMatrix w = fourier_vectors(n, grid);
  // L_1^* ... L_q^* = (L_q ... L_1)^*, so the left features are L_q ... L_1 W.
  DenseMatrix u = w;
  for (const auto& l : left) u = l.dense() * u;
  DenseMatrix v = w;
  for (auto it = right.rbegin(); it != right.rend(); ++it) v = it->dense() * v;
  return sn_from_features(u, v, grid);
}

}  // namespace spectrunc
