#pragma once

// Complexity terms of the generalization bound and convergence sweeps.

#include <cmath>
#include <cstddef>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "spectrunc/error.hpp"
#include "spectrunc/kernels.hpp"
#include "spectrunc/truncation.hpp"

namespace spectrunc {

/// D(k_n, x): the per-sample term under the square root of the complexity
/// part of the bound. Only defined for finite n.
inline double complexity_D(const KernelSpec& spec, const FunctionTuple& x) {
  if (!spec.n) throw ConfigError("complexity_D: the bound needs a finite truncation n");
  const std::size_t n = *spec.n;
  check_truncation(x.grid().size(), n, spec.spectrum);
  const auto opnorm = [&](const SampledFunction& f) {
    return operator_norm(truncate(f, n, spec.spectrum));
  };
  switch (spec.family) {
    case Family::poly: {
      if (x.dim() != spec.alpha.size()) throw ConfigError("complexity_D: alpha/input size mismatch");
      double d = 0.0;
      for (std::size_t j = 0; j < x.dim(); ++j)
        d += spec.alpha[j] * std::pow(opnorm(x[j]), 2.0 * double(spec.q));
      return d;
    }
    case Family::prod: {
      if (spec.k1.size() != spec.q || spec.k2.size() != spec.q)
        throw ConfigError("complexity_D: prod kernel needs q base kernels");
      double norms = 1.0;
      cplx c{1.0, 0.0};
      for (std::size_t j = 0; j < spec.q; ++j) {
        const auto g1 = spec.k1[j].apply(x, x);
        const auto g2 = spec.k2[j].apply(x, x);
        norms *= opnorm(g1) * opnorm(g2);
        c *= integrate(g1) * integrate(g2);
      }
      return norms + spec.beta.resolve(n, spec.q) * c.real();
    }
    case Family::sep: {
      if (spec.a.size() != spec.q) throw ConfigError("complexity_D: sep kernel needs q weights");
      // k~(x, x) = 1 for the gaussian function-level kernel.
      double d = 1.0;
      for (const auto& w : spec.a) {
        const double r = opnorm(w.sample(x.grid()));
        d *= r * r;
      }
      return d;
    }
  }
  return 0.0;
}

struct BoundTerms {
  double empirical;
  double complexity;
  double confidence;
  double total() const { return empirical + complexity + confidence; }
};

/// mean loss + 2 L B / N sqrt(sum D) + 3 sqrt(log(1/delta) / N).
inline BoundTerms bound_terms(const std::vector<double>& d_values, double B, double L, double delta,
                              const std::vector<double>& empirical_losses) {
  if (!(delta > 0.0 && delta < 1.0)) throw std::domain_error("bound_rhs: delta must lie in (0, 1)");
  if (!(B > 0.0) || !(L > 0.0)) throw std::domain_error("bound_rhs: B and L must be positive");
  if (d_values.empty() || d_values.size() != empirical_losses.size())
    throw std::invalid_argument("bound_rhs: need one D value and one loss per sample");
  const double N = static_cast<double>(d_values.size());
  double sum_d = 0.0, sum_loss = 0.0;
  for (std::size_t i = 0; i < d_values.size(); ++i) {
    if (d_values[i] < 0.0) throw std::domain_error("bound_rhs: D values must be >= 0");
    sum_d += d_values[i];
    sum_loss += empirical_losses[i];
  }
  return {sum_loss / N, 2.0 * L * B / N * std::sqrt(sum_d), 3.0 * std::sqrt(std::log(1.0 / delta) / N)};
}

inline double bound_rhs(const std::vector<double>& d_values, double B, double L, double delta,
                        const std::vector<double>& empirical_losses) {
  return bound_terms(d_values, B, L, delta, empirical_losses).total();
}

struct ComplexityReport {
  Family family;
  std::size_t n;
  std::vector<double> d_values;
  double second_term;
  double B, L, delta;
  bool complex_valued;  // the bound is derived for real-valued kernels
};

inline ComplexityReport complexity_report(const KernelSpec& spec, const std::vector<FunctionTuple>& xs,
                                          double B = 1.0, double L = 1.0, double delta = 0.05) {
  if (!spec.n) throw ConfigError("complexity_report: finite n required");
  ComplexityReport r{spec.family, *spec.n, {}, 0.0, B, L, delta, false};
  for (const auto& x : xs) {
    r.d_values.push_back(complexity_D(spec, x));
    for (const auto& c : x.components())
      if (!c.is_real(1e-10)) r.complex_valued = true;
  }
  const std::vector<double> zeros(xs.size(), 0.0);
  r.second_term = bound_terms(r.d_values, B, L, delta, zeros).complexity;
  return r;
}

/// Warnings for n sweeps whose resolved beta_n decreases, which the bound's
/// monotonicity argument assumes does not happen.
inline std::vector<std::string> check_beta_monotone(const KernelSpec& spec,
                                                    const std::vector<std::size_t>& n_list) {
  std::vector<std::string> warnings;
  if (spec.family != Family::prod) return warnings;
  std::optional<double> prev;
  std::size_t prev_n = 0;
  for (std::size_t n : n_list) {
    const double b = spec.beta.resolve(n, spec.q);
    if (prev && b < *prev) {
      std::ostringstream os;
      os << "beta_n decreases from " << *prev << " (n=" << prev_n << ") to " << b << " (n=" << n
         << ")";
      warnings.push_back(os.str());
    }
    prev = b;
    prev_n = n;
  }
  return warnings;
}

struct ConvergenceRow {
  Family family;
  std::size_t n;
  double sup_gap;
  double mean_gap;
};

inline std::vector<ConvergenceRow> convergence_report(const std::vector<KernelSpec>& specs,
                                                      const FunctionTuple& x, const FunctionTuple& y,
                                                      const std::vector<std::size_t>& n_list) {
  std::vector<ConvergenceRow> rows;
  for (const auto& spec : specs)
    for (const auto& g : kernel_limit_gap(spec, x, y, n_list))
      rows.push_back({spec.family, g.n, g.sup_gap, g.mean_gap});
  return rows;
}

inline std::string convergence_csv(const std::vector<ConvergenceRow>& rows) {
  std::ostringstream os;
  os.precision(17);
  os << "family,n,sup_gap,mean_gap\n";
  for (const auto& r : rows) os << to_string(r.family) << ',' << r.n << ',' << r.sup_gap << ',' << r.mean_gap << '\n';
  return os.str();
}

}  // namespace spectrunc
