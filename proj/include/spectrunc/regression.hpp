#pragma once

// Kernel ridge regression with a function-valued kernel. The Gram matrix is
// A^{N x N}-valued, so on a grid it is one N x N Hermitian matrix per point
// and the ridge system (G(z) + lambda I) c(z) = y(z) splits into m
// independent solves.

#include <Eigen/Dense>

#include <cmath>
#include <cstddef>
#include <iostream>
#include <limits>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "spectrunc/error.hpp"
#include "spectrunc/kernels.hpp"
#include "spectrunc/parallel.hpp"
#include "spectrunc/torus.hpp"

namespace spectrunc {

struct GramField {
  TorusGrid grid;
  std::size_t N = 0;
  std::vector<Eigen::MatrixXcd> matrices;  // one per grid point
  std::size_t evaluations = 0;             // kernel calls used to build it

  double max_hermitian_defect() const {
    double worst = 0.0;
    for (const auto& g : matrices) worst = std::max(worst, (g - g.adjoint()).cwiseAbs().maxCoeff());
    return worst;
  }
};

inline std::vector<PreparedInput> prepare_all(const KernelEvaluator& kernel,
                                              const std::vector<FunctionTuple>& xs) {
  std::vector<std::optional<PreparedInput>> slots(xs.size());
  parallel_for(xs.size(), [&](std::size_t i) { slots[i] = kernel.prepare(xs[i]); });
  std::vector<PreparedInput> out;
  out.reserve(xs.size());
  for (auto& s : slots) out.push_back(std::move(*s));
  return out;
}

/// Upper triangle by kernel evaluation, lower triangle by Hermitian mirroring:
/// exactly N(N+1)/2 kernel calls.
inline GramField assemble_gram(const KernelEvaluator& kernel, const std::vector<FunctionTuple>& inputs) {
  if (inputs.empty()) throw std::invalid_argument("assemble_gram: no inputs");
  const TorusGrid grid = kernel.grid();
  const std::size_t N = inputs.size();
  const std::size_t m = grid.size();
  const auto prepared = prepare_all(kernel, inputs);

  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  pairs.reserve(N * (N + 1) / 2);
  for (std::size_t i = 0; i < N; ++i)
    for (std::size_t j = i; j < N; ++j) pairs.emplace_back(i, j);

  GramField out{grid, N, std::vector<Eigen::MatrixXcd>(m, Eigen::MatrixXcd::Zero(N, N)), 0};
  const std::size_t before = kernel.evaluations();
  parallel_for(pairs.size(), [&](std::size_t idx) {
    const auto [i, j] = pairs[idx];
    const auto k = kernel(prepared[i], prepared[j]);
    for (std::size_t p = 0; p < m; ++p) {
      out.matrices[p](long(i), long(j)) = k[p];
      out.matrices[p](long(j), long(i)) = std::conj(k[p]);
    }
  });
  out.evaluations = kernel.evaluations() - before;
  return out;
}

inline GramField assemble_gram(const KernelSpec& spec, const std::vector<FunctionTuple>& inputs) {
  if (inputs.empty()) throw std::invalid_argument("assemble_gram: no inputs");
  return assemble_gram(KernelEvaluator(spec, inputs.front().grid()), inputs);
}

struct PdReport {
  std::vector<double> min_eigenvalue;  // per grid point
  double global_min = std::numeric_limits<double>::infinity();
  std::size_t argmin = 0;
};

inline std::vector<double> hermitian_eigenvalues(const Eigen::MatrixXcd& g) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(g, Eigen::EigenvaluesOnly);
  const auto& ev = es.eigenvalues();
  return {ev.data(), ev.data() + ev.size()};
}

inline PdReport check_pd(const GramField& gram) {
  PdReport r;
  r.min_eigenvalue.resize(gram.matrices.size());
  parallel_for(gram.matrices.size(), [&](std::size_t p) {
    r.min_eigenvalue[p] = hermitian_eigenvalues(gram.matrices[p]).front();
  });
  for (std::size_t p = 0; p < r.min_eigenvalue.size(); ++p)
    if (r.min_eigenvalue[p] < r.global_min) {
      r.global_min = r.min_eigenvalue[p];
      r.argmin = p;
    }
  return r;
}

struct FitWarning {
  std::size_t point;
  double min_eigenvalue;
  std::string message;
};

struct RidgeModel {
  KernelSpec kernel;  // beta resolved
  double lambda = 0.0;
  std::vector<FunctionTuple> inputs;
  std::vector<SampledFunction> coefficients;
  std::vector<FitWarning> warnings;

  const TorusGrid& grid() const { return inputs.front().grid(); }
};

struct FitOptions {
  double residual_tol = 1e-8;
  bool log_warnings = true;
};

inline RidgeModel fit(const KernelSpec& spec, const std::vector<FunctionTuple>& inputs,
                      const std::vector<SampledFunction>& outputs, double lambda,
                      const FitOptions& opts = {}) {
  if (inputs.empty()) throw std::invalid_argument("fit: no training inputs");
  if (inputs.size() != outputs.size())
    throw std::invalid_argument("fit: " + std::to_string(inputs.size()) + " inputs but " +
                                std::to_string(outputs.size()) + " outputs");
  if (lambda < 0.0) throw ConfigError("fit: lambda must be >= 0");
  const TorusGrid grid = inputs.front().grid();
  for (const auto& y : outputs)
    if (!(y.grid() == grid)) throw GridMismatch("fit outputs");

  const KernelEvaluator kernel(spec, grid);
  const GramField gram = assemble_gram(kernel, inputs);
  const std::size_t N = inputs.size();
  const std::size_t m = grid.size();

  if (lambda == 0.0) {
    const auto pd = check_pd(gram);
    if (!(pd.global_min > 0.0)) {
      std::ostringstream os;
      os << "fit: lambda = 0 needs a strictly positive definite Gram field; min eigenvalue "
         << pd.global_min << " at grid point " << pd.argmin;
      throw NumericalError(os.str());
    }
  }

  RidgeModel model{kernel.resolved_spec(), lambda, inputs,
                   std::vector<SampledFunction>(N, SampledFunction(grid)), {}};
  std::vector<std::optional<FitWarning>> warn(m);
  std::vector<std::string> failure(m);

  parallel_for(m, [&](std::size_t p) {
    Eigen::MatrixXcd a = gram.matrices[p];
    a.diagonal().array() += lambda;
    Eigen::VectorXcd y(N);
    for (std::size_t i = 0; i < N; ++i) y(long(i)) = outputs[i][p];

    Eigen::VectorXcd c;
    Eigen::LLT<Eigen::MatrixXcd> llt(a);
    if (llt.info() == Eigen::Success) {
      c = llt.solve(y);
    } else {
      const double mineig = hermitian_eigenvalues(a).front();
      warn[p] = FitWarning{p, mineig,
                           "Hermitian factorization failed (G + lambda I not positive definite); "
                           "used pivoted LU"};
      c = a.fullPivLu().solve(y);
    }
    const double res = (a * c - y).norm();
    if (!(res <= opts.residual_tol * (1.0 + y.norm()))) {
      std::ostringstream os;
      os << "fit: singular or ill-conditioned system at grid point " << p << " (residual " << res
         << ", min eigenvalue of G + lambda I " << hermitian_eigenvalues(a).front() << ")";
      failure[p] = os.str();
      return;
    }
    for (std::size_t i = 0; i < N; ++i) model.coefficients[i][p] = c(long(i));
  });

  for (const auto& f : failure)
    if (!f.empty()) throw NumericalError(f);
  for (auto& w : warn)
    if (w) {
      if (opts.log_warnings)
        std::cerr << "warning: grid point " << w->point << ": " << w->message
                  << " (min eigenvalue " << w->min_eigenvalue << ")\n";
      model.warnings.push_back(std::move(*w));
    }
  return model;
}

/// Holds prepared training inputs so repeated predictions skip re-truncation.
class Predictor {
 public:
  explicit Predictor(const RidgeModel& model)
      : model_(model), kernel_(model.kernel, model.grid()),
        train_(prepare_all(kernel_, model.inputs)) {}

  SampledFunction operator()(const FunctionTuple& x) const {
    if (!(x.grid() == model_.grid())) throw GridMismatch("predict input");
    const auto px = kernel_.prepare(x);
    SampledFunction out(model_.grid());
    for (std::size_t j = 0; j < train_.size(); ++j) {
      const auto k = kernel_(px, train_[j]);
      const auto& c = model_.coefficients[j];
      for (std::size_t p = 0; p < out.size(); ++p) out[p] += k[p] * c[p];
    }
    return out;
  }

  std::vector<SampledFunction> operator()(const std::vector<FunctionTuple>& xs) const {
    std::vector<std::optional<SampledFunction>> slots(xs.size());
    parallel_for(xs.size(), [&](std::size_t i) { slots[i] = (*this)(xs[i]); });
    std::vector<SampledFunction> out;
    out.reserve(xs.size());
    for (auto& s : slots) out.push_back(std::move(*s));
    return out;
  }

 private:
  const RidgeModel& model_;
  KernelEvaluator kernel_;
  std::vector<PreparedInput> train_;
};

inline SampledFunction predict(const RidgeModel& model, const FunctionTuple& x) {
  return Predictor(model)(x);
}

inline double test_error(const RidgeModel& model, const std::vector<FunctionTuple>& inputs,
                         const std::vector<SampledFunction>& outputs) {
  if (inputs.size() != outputs.size() || inputs.empty())
    throw std::invalid_argument("test_error: inputs and outputs must be aligned and non-empty");
  const auto pred = Predictor(model)(inputs);
  double s = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) s += l2_distance(pred[i], outputs[i]);
  return s / static_cast<double>(pred.size());
}

}  // namespace spectrunc
