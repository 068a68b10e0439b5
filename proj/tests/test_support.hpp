#pragma once

// Shared oracles for the test suites. Everything here is computed from
// analytic coefficients or brute-force sums, never through the library's own
// fast paths.

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <filesystem>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "spectrunc/torus.hpp"

namespace spectrunc::testing {

/// Trigonometric polynomial with explicitly stored coefficients.
struct TrigPoly {
  std::map<long, cplx> c;

  cplx coeff(long k) const {
    const auto it = c.find(k);
    return it == c.end() ? cplx{} : it->second;
  }

  cplx operator()(double z) const {
    cplx s{};
    for (const auto& [k, v] : c) s += v * std::exp(cplx(0.0, double(k) * z));
    return s;
  }

  SampledFunction sample(const TorusGrid& g) const {
    return SampledFunction::from(g, [&](double z) { return (*this)(z); });
  }

  long degree() const {
    long d = 0;
    for (const auto& [k, v] : c) d = std::max(d, std::abs(k));
    return d;
  }
};

inline TrigPoly random_trig(std::mt19937_64& rng, long degree, double scale = 1.0, bool real = false) {
  std::normal_distribution<double> nd;
  TrigPoly p;
  for (long k = -degree; k <= degree; ++k) {
    const double w = scale / (1.0 + double(k * k));
    p.c[k] = cplx(nd(rng), nd(rng)) * w;
  }
  if (real) {
    p.c[0] = p.c[0].real();
    for (long k = 1; k <= degree; ++k) p.c[-k] = std::conj(p.c[k]);
  }
  return p;
}

inline FunctionTuple random_tuple(std::mt19937_64& rng, const TorusGrid& g, std::size_t d, long degree,
                                  double scale = 0.3, bool real = false) {
  std::vector<SampledFunction> comps;
  for (std::size_t i = 0; i < d; ++i) comps.push_back(random_trig(rng, degree, scale, real).sample(g));
  return FunctionTuple(std::move(comps));
}

/// R_n from analytic coefficients: entry (j, l) = c_{j - l}.
inline Eigen::MatrixXcd toeplitz_oracle(const TrigPoly& p, std::size_t n) {
  Eigen::MatrixXcd r(static_cast<long>(n), static_cast<long>(n));
  for (long j = 0; j < long(n); ++j)
    for (long l = 0; l < long(n); ++l) r(j, l) = p.coeff(j - l);
  return r;
}

/// S_n(A)(z) = (1/n) sum_{j,l} A_{jl} e^{i (j - l) z}, by the double sum.
inline cplx sn_oracle(const Eigen::MatrixXcd& a, double z) {
  cplx s{};
  for (long j = 0; j < a.rows(); ++j)
    for (long l = 0; l < a.cols(); ++l) s += a(j, l) * std::exp(cplx(0.0, double(j - l) * z));
  return s / double(a.rows());
}

/// Fresh directory under the system temp path, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() / ("spectrunc_" + tag + "_" + std::to_string(rd()));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

}  // namespace spectrunc::testing
