#pragma once

// Function-valued kernels built from spectral truncation.
//
//   poly: S_n( sum_i alpha_i (R_n(x_i)^*)^q R_n(y_i)^q )
//   prod: S_n( prod_j R_n(k1_j(x,y))^* prod_j R_n(k2_j(x,y)) ) + beta * offset(x, y)
//   sep : k~(S_n R_n x, S_n R_n y) * S_n( (prod_j R_n(a_j))^* prod_j R_n(a_j) )
//
// With n = INF each family falls back to its pointwise (commutative) form.

#include <Eigen/Dense>

#include <atomic>
#include <cmath>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "spectrunc/error.hpp"
#include "spectrunc/fejer.hpp"
#include "spectrunc/torus.hpp"
#include "spectrunc/truncation.hpp"

namespace spectrunc {

/// Scalar kernel on pairs of C^d vectors.
struct BaseScalarKernel {
  enum class Kind { gaussian, linear, polynomial };

  Kind kind = Kind::gaussian;
  double gamma = 1.0;     // gaussian: exp(-gamma |u - v|^2)
  unsigned degree = 1;    // polynomial: (<u, v> + offset)^degree
  double offset = 0.0;

  static BaseScalarKernel gaussian(double gamma) { return {Kind::gaussian, gamma, 1, 0.0}; }
  static BaseScalarKernel linear() { return {Kind::linear, 1.0, 1, 0.0}; }
  static BaseScalarKernel polynomial(unsigned degree, double offset) {
    return {Kind::polynomial, 1.0, degree, offset};
  }

  cplx operator()(std::span<const cplx> u, std::span<const cplx> v) const {
    switch (kind) {
      case Kind::gaussian: {
        double s = 0.0;
        for (std::size_t i = 0; i < u.size(); ++i) s += std::norm(u[i] - v[i]);
        return std::exp(-gamma * s);
      }
      case Kind::linear:
      case Kind::polynomial: {
        cplx s{0.0, 0.0};
        for (std::size_t i = 0; i < u.size(); ++i) s += std::conj(u[i]) * v[i];
        if (kind == Kind::linear) return s;
        return std::pow(s + offset, static_cast<int>(degree));
      }
    }
    return {};
  }

  /// z -> k(x(z), y(z)).
  SampledFunction apply(const FunctionTuple& x, const FunctionTuple& y) const {
    if (x.dim() != y.dim()) throw std::invalid_argument("BaseScalarKernel: dimension mismatch");
    if (!(x.grid() == y.grid())) throw GridMismatch("BaseScalarKernel inputs");
    SampledFunction out(x.grid());
    std::vector<cplx> u(x.dim()), v(x.dim());
    for (std::size_t p = 0; p < out.size(); ++p) {
      for (std::size_t i = 0; i < x.dim(); ++i) {
        u[i] = x[i][p];
        v[i] = y[i][p];
      }
      out[p] = (*this)(u, v);
    }
    return out;
  }
};

/// A weight function a_j of the separable family, materialized on demand.
struct WeightFunction {
  enum class Kind { coefficients, samples, expression };

  Kind kind = Kind::expression;
  std::vector<std::pair<long, cplx>> coefficients;  // a(z) = sum c_k e^{ikz}
  std::optional<SampledFunction> samples;
  std::string expression = "one";                   // one | exp_sin | exp_cos
  std::string source;                               // csv path when loaded from file

  static WeightFunction named(std::string expr) {
    WeightFunction w;
    w.kind = Kind::expression;
    w.expression = std::move(expr);
    return w;
  }
  static WeightFunction trig(std::vector<std::pair<long, cplx>> c) {
    WeightFunction w;
    w.kind = Kind::coefficients;
    w.coefficients = std::move(c);
    return w;
  }
  static WeightFunction sampled(SampledFunction f, std::string source = {}) {
    WeightFunction w;
    w.kind = Kind::samples;
    w.samples = std::move(f);
    w.source = std::move(source);
    return w;
  }

  SampledFunction sample(const TorusGrid& grid) const {
    switch (kind) {
      case Kind::samples:
        if (!samples || !(samples->grid() == grid))
          throw GridMismatch("weight function samples do not match the data grid");
        return *samples;
      case Kind::coefficients:
        return SampledFunction::from(grid, [&](double z) {
          cplx s{0.0, 0.0};
          for (const auto& [k, c] : coefficients) s += c * std::polar(1.0, double(k) * z);
          return s;
        });
      case Kind::expression:
        if (expression == "one") return SampledFunction::constant(grid, 1.0);
        if (expression == "exp_sin")
          return SampledFunction::from(grid, [](double z) { return std::exp(std::sin(z)); });
        if (expression == "exp_cos")
          return SampledFunction::from(grid, [](double z) { return std::exp(std::cos(z)); });
        throw ConfigError("unknown weight expression '" + expression + "'");
    }
    return SampledFunction(grid);
  }
};

enum class Family { poly, prod, sep };

inline const char* to_string(Family f) {
  switch (f) {
    case Family::poly: return "poly";
    case Family::prod: return "prod";
    case Family::sep: return "sep";
  }
  return "?";
}

/// How the prod-family offset beta_n is chosen for finite n.
struct BetaPolicy {
  enum class Kind { manual, min_estimate, bound };

  Kind kind = Kind::manual;
  double value = 0.0;            // manual
  std::size_t grid_density = 0;  // min_estimate; 0 picks max(64, 8n)
  std::uint64_t seed = 0x5eed;
  double margin = 1e-6;

  static BetaPolicy manual(double v) { return {Kind::manual, v}; }
  static BetaPolicy from_minimum() { return {Kind::min_estimate}; }
  static BetaPolicy from_bound() { return {Kind::bound}; }

  double resolve(std::size_t n, std::size_t q) const {
    switch (kind) {
      case Kind::manual: return value;
      case Kind::bound: return fejer_peak(n, q);
      case Kind::min_estimate: {
        const std::size_t density = grid_density ? grid_density : std::max<std::size_t>(64, 8 * n);
        const auto est = fejer_min_estimate(n, q, density, seed);
        return std::max(0.0, -est.value) + margin;
      }
    }
    return 0.0;
  }
};

inline const char* to_string(BetaPolicy::Kind k) {
  switch (k) {
    case BetaPolicy::Kind::manual: return "manual";
    case BetaPolicy::Kind::min_estimate: return "min_estimate";
    case BetaPolicy::Kind::bound: return "bound";
  }
  return "?";
}

struct KernelSpec {
  Family family = Family::poly;
  std::optional<std::size_t> n;  // nullopt = INF (commutative limit)
  std::size_t q = 1;
  Spectrum spectrum = Spectrum::strict;

  std::vector<double> alpha{1.0};  // poly, one weight per input component

  std::vector<BaseScalarKernel> k1, k2;  // prod, q of each
  BetaPolicy beta;

  double sep_gamma = 1.0;            // sep: exp(-gamma sum_i ||x_i - y_i||^2)
  std::vector<WeightFunction> a;     // sep, q of them

  bool infinite() const noexcept { return !n.has_value(); }

  KernelSpec with_n(std::optional<std::size_t> nn) const {
    KernelSpec s = *this;
    s.n = nn;
    return s;
  }

  std::string label() const {
    return std::string(to_string(family)) + ",n=" + (n ? std::to_string(*n) : "inf");
  }
};

// ---------------------------------------------------------------------------

/// Per-input data reused across every pair the input takes part in.
struct PreparedInput {
  FunctionTuple x;
  std::vector<DenseMatrix> features;  // poly, finite n: R_n(x_i)^q W
  std::optional<FunctionTuple> smoothed;  // sep, finite n
};

/// Evaluates one kernel on a fixed grid. Construction validates the spec,
/// resolves beta_n, and precomputes everything independent of the inputs.
class KernelEvaluator {
 public:
  KernelEvaluator(KernelSpec spec, const TorusGrid& grid)
      : spec_(std::move(spec)), grid_(grid), calls_(std::make_shared<std::atomic<std::size_t>>(0)) {
    if (spec_.q == 0) throw ConfigError("kernel degree q must be >= 1");
    if (spec_.n) {
      if (*spec_.n == 0) throw ConfigError("truncation n must be >= 1");
      check_truncation(grid_.size(), *spec_.n, spec_.spectrum);
    }
    switch (spec_.family) {
      case Family::poly:
        if (spec_.alpha.empty()) throw ConfigError("poly kernel needs alpha weights");
        for (double al : spec_.alpha)
          if (al < 0.0) throw ConfigError("poly kernel weights alpha must be >= 0");
        break;
      case Family::prod:
        if (spec_.k1.size() != spec_.q || spec_.k2.size() != spec_.q)
          throw ConfigError("prod kernel needs q base kernels in k1 and in k2");
        beta_ = spec_.n ? spec_.beta.resolve(*spec_.n, spec_.q) : 0.0;
        if (beta_ < 0.0) throw ConfigError("prod kernel beta must be >= 0");
        break;
      case Family::sep: {
        if (spec_.a.size() != spec_.q) throw ConfigError("sep kernel needs q weight functions");
        std::vector<SampledFunction> a;
        for (const auto& w : spec_.a) a.push_back(w.sample(grid_));
        if (spec_.n) {
          // (R(a_1)...R(a_q))^* (R(a_1)...R(a_q)): the adjoint chain runs in
          // reverse so the factor stays positive for distinct weights.
          std::vector<ToeplitzRep> t;
          for (const auto& f : a) t.push_back(truncate(f, *spec_.n, spec_.spectrum));
          const std::vector<ToeplitzRep> rev(t.rbegin(), t.rend());
          sep_factor_ = sn_adjoint_chain(rev, t, grid_);
        } else {
          SampledFunction w = SampledFunction::constant(grid_, 1.0);
          for (const auto& f : a)
            for (std::size_t p = 0; p < w.size(); ++p) w[p] *= std::norm(f[p]);
          sep_factor_ = std::move(w);
        }
        break;
      }
    }
    if (spec_.n && spec_.family == Family::poly) w_ = fourier_vectors(*spec_.n, grid_);
  }

  const KernelSpec& spec() const noexcept { return spec_; }
  const TorusGrid& grid() const noexcept { return grid_; }
  double beta() const noexcept { return beta_; }
  std::size_t evaluations() const noexcept { return calls_->load(); }

  /// The spec with beta fixed to its resolved value, for reproducible reuse.
  KernelSpec resolved_spec() const {
    KernelSpec s = spec_;
    if (s.family == Family::prod) s.beta = BetaPolicy::manual(beta_);
    return s;
  }

  PreparedInput prepare(const FunctionTuple& x) const {
    if (!(x.grid() == grid_)) throw GridMismatch("kernel input");
    PreparedInput out{x, {}, std::nullopt};
    if (!spec_.n) return out;
    if (spec_.family == Family::poly) {
      if (x.dim() != spec_.alpha.size())
        throw ConfigError("poly kernel: input dimension " + std::to_string(x.dim()) +
                          " does not match " + std::to_string(spec_.alpha.size()) + " alpha weights");
      for (std::size_t i = 0; i < x.dim(); ++i) {
        const DenseMatrix r = truncate(x[i], *spec_.n, spec_.spectrum).dense();
        DenseMatrix u = w_;
        for (std::size_t k = 0; k < spec_.q; ++k) u = r * u;
        out.features.push_back(std::move(u));
      }
    } else if (spec_.family == Family::sep) {
      out.smoothed = smooth(x, *spec_.n, spec_.spectrum);
    }
    return out;
  }

  SampledFunction operator()(const PreparedInput& x, const PreparedInput& y) const {
    calls_->fetch_add(1, std::memory_order_relaxed);
    if (x.x.dim() != y.x.dim()) throw std::invalid_argument("kernel inputs differ in dimension");
    switch (spec_.family) {
      case Family::poly: return eval_poly(x, y);
      case Family::prod: return eval_prod(x.x, y.x);
      case Family::sep: return eval_sep(x, y);
    }
    return SampledFunction(grid_);
  }

  SampledFunction evaluate(const FunctionTuple& x, const FunctionTuple& y) const {
    return (*this)(prepare(x), prepare(y));
  }

 private:
  SampledFunction eval_poly(const PreparedInput& x, const PreparedInput& y) const {
    if (x.x.dim() != spec_.alpha.size())
      throw ConfigError("poly kernel: input dimension does not match alpha");
    SampledFunction out(grid_);
    for (std::size_t i = 0; i < spec_.alpha.size(); ++i) {
      if (spec_.alpha[i] == 0.0) continue;
      if (spec_.n) {
        const auto term = sn_from_features(x.features[i], y.features[i], grid_);
        for (std::size_t p = 0; p < out.size(); ++p) out[p] += spec_.alpha[i] * term[p];
      } else {
        for (std::size_t p = 0; p < out.size(); ++p)
          out[p] += spec_.alpha[i] *
                    std::pow(std::conj(x.x[i][p]) * y.x[i][p], static_cast<int>(spec_.q));
      }
    }
    return out;
  }

  SampledFunction eval_prod(const FunctionTuple& x, const FunctionTuple& y) const {
    std::vector<SampledFunction> g1, g2;
    for (std::size_t j = 0; j < spec_.q; ++j) {
      g1.push_back(spec_.k1[j].apply(x, y));
      g2.push_back(spec_.k2[j].apply(x, y));
    }
    if (!spec_.n) {
      SampledFunction out = SampledFunction::constant(grid_, 1.0);
      for (std::size_t j = 0; j < spec_.q; ++j)
        for (std::size_t p = 0; p < out.size(); ++p) out[p] *= std::conj(g1[j][p]) * g2[j][p];
      return out;
    }
    std::vector<ToeplitzRep> left, right;
    for (std::size_t j = 0; j < spec_.q; ++j) {
      left.push_back(truncate(g1[j], *spec_.n, spec_.spectrum));
      right.push_back(truncate(g2[j], *spec_.n, spec_.spectrum));
    }
    SampledFunction out = sn_adjoint_chain(left, right, grid_);
    if (beta_ != 0.0) {
      cplx offset{1.0, 0.0};
      for (std::size_t j = 0; j < spec_.q; ++j)
        offset *= std::conj(integrate(g1[j])) * integrate(g2[j]);
      for (auto& v : out.values()) v += beta_ * offset;
    }
    return out;
  }

  SampledFunction eval_sep(const PreparedInput& x, const PreparedInput& y) const {
    const FunctionTuple& sx = x.smoothed ? *x.smoothed : x.x;
    const FunctionTuple& sy = y.smoothed ? *y.smoothed : y.x;
    double dist2 = 0.0;
    for (std::size_t i = 0; i < sx.dim(); ++i) {
      const double d = l2_distance(sx[i], sy[i]);
      dist2 += d * d;
    }
    const double scalar = std::exp(-spec_.sep_gamma * dist2);
    SampledFunction out = *sep_factor_;
    for (auto& v : out.values()) v *= scalar;
    return out;
  }

  KernelSpec spec_;
  TorusGrid grid_;
  double beta_ = 0.0;
  DenseMatrix w_;
  std::optional<SampledFunction> sep_factor_;
  std::shared_ptr<std::atomic<std::size_t>> calls_;
};

inline SampledFunction evaluate_kernel(const KernelSpec& spec, const FunctionTuple& x,
                                       const FunctionTuple& y) {
  if (!(x.grid() == y.grid())) throw GridMismatch("kernel inputs");
  return KernelEvaluator(spec, x.grid()).evaluate(x, y);
}

inline SampledFunction k_poly(const KernelSpec& spec, const FunctionTuple& x, const FunctionTuple& y) {
  if (spec.family != Family::poly) throw ConfigError("k_poly called with a non-poly spec");
  return evaluate_kernel(spec, x, y);
}

inline SampledFunction k_prod(const KernelSpec& spec, const FunctionTuple& x, const FunctionTuple& y) {
  if (spec.family != Family::prod) throw ConfigError("k_prod called with a non-prod spec");
  return evaluate_kernel(spec, x, y);
}

inline SampledFunction k_sep(const KernelSpec& spec, const FunctionTuple& x, const FunctionTuple& y) {
  if (spec.family != Family::sep) throw ConfigError("k_sep called with a non-sep spec");
  return evaluate_kernel(spec, x, y);
}

struct GapRow {
  std::size_t n;
  double sup_gap;
  double mean_gap;
};

/// sup and mean over the grid of |k_n(x, y) - k_INF(x, y)| for each n.
inline std::vector<GapRow> kernel_limit_gap(const KernelSpec& spec, const FunctionTuple& x,
                                            const FunctionTuple& y,
                                            const std::vector<std::size_t>& n_list) {
  const auto limit = evaluate_kernel(spec.with_n(std::nullopt), x, y);
  std::vector<GapRow> rows;
  for (std::size_t n : n_list) {
    const auto kn = evaluate_kernel(spec.with_n(n), x, y);
    double sup = 0.0, mean = 0.0;
    for (std::size_t p = 0; p < kn.size(); ++p) {
      const double g = std::abs(kn[p] - limit[p]);
      sup = std::max(sup, g);
      mean += g;
    }
    rows.push_back({n, sup, mean / static_cast<double>(kn.size())});
  }
  return rows;
}

}  // namespace spectrunc
