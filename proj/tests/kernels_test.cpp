#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "spectrunc/error.hpp"
#include "spectrunc/kernels.hpp"
#include "test_support.hpp"

namespace spectrunc {
namespace {

using testing::random_trig;
using testing::random_tuple;

KernelSpec poly_spec(std::optional<std::size_t> n, std::size_t q, std::vector<double> alpha) {
  KernelSpec s;
  s.family = Family::poly;
  s.n = n;
  s.q = q;
  s.alpha = std::move(alpha);
  return s;
}

KernelSpec prod_spec(std::optional<std::size_t> n, std::size_t q, double beta) {
  KernelSpec s;
  s.family = Family::prod;
  s.n = n;
  s.q = q;
  for (std::size_t j = 0; j < q; ++j) {
    s.k1.push_back(j % 2 ? BaseScalarKernel::linear() : BaseScalarKernel::gaussian(0.7));
    s.k2.push_back(j % 2 ? BaseScalarKernel::polynomial(2, 1.0) : BaseScalarKernel::gaussian(1.3));
  }
  s.beta = BetaPolicy::manual(beta);
  return s;
}

KernelSpec sep_spec(std::optional<std::size_t> n, std::vector<WeightFunction> a, double gamma = 0.8) {
  KernelSpec s;
  s.family = Family::sep;
  s.n = n;
  s.q = a.size();
  s.sep_gamma = gamma;
  s.a = std::move(a);
  return s;
}

// Dense references: every product formed explicitly, S_n by the double sum.

SampledFunction sn_dense(const DenseMatrix& a, const TorusGrid& g) {
  SampledFunction out(g);
  for (std::size_t p = 0; p < g.size(); ++p) out[p] = testing::sn_oracle(a, g.point(p));
  return out;
}

SampledFunction poly_reference(const KernelSpec& s, const FunctionTuple& x, const FunctionTuple& y) {
  const std::size_t n = *s.n;
  DenseMatrix acc = DenseMatrix::Zero(long(n), long(n));
  for (std::size_t i = 0; i < x.dim(); ++i) {
    const DenseMatrix rx = truncate(x[i], n).dense();
    const DenseMatrix ry = truncate(y[i], n).dense();
    acc += s.alpha[i] * matpow(rx.adjoint(), unsigned(s.q)) * matpow(ry, unsigned(s.q));
  }
  return sn_dense(acc, x.grid());
}

SampledFunction prod_reference(const KernelSpec& s, const FunctionTuple& x, const FunctionTuple& y) {
  const std::size_t n = *s.n;
  const TorusGrid& g = x.grid();
  DenseMatrix left = DenseMatrix::Identity(long(n), long(n));
  DenseMatrix right = DenseMatrix::Identity(long(n), long(n));
  cplx offset{1.0, 0.0};
  for (std::size_t j = 0; j < s.q; ++j) {
    const auto g1 = s.k1[j].apply(x, y);
    const auto g2 = s.k2[j].apply(x, y);
    left = left * truncate(g1, n).dense().adjoint();
    right = right * truncate(g2, n).dense();
    // 2-dimensional rectangle rule of conj(g1(t1)) g2(t2).
    cplx dbl{};
    for (std::size_t a = 0; a < g.size(); ++a)
      for (std::size_t b = 0; b < g.size(); ++b) dbl += std::conj(g1[a]) * g2[b];
    offset *= dbl / double(g.size() * g.size());
  }
  auto out = sn_dense(left * right, g);
  for (auto& v : out.values()) v += s.beta.value * offset;
  return out;
}

SampledFunction sep_reference(const KernelSpec& s, const FunctionTuple& x, const FunctionTuple& y) {
  const std::size_t n = *s.n;
  const TorusGrid& g = x.grid();
  double d2 = 0.0;
  for (std::size_t i = 0; i < x.dim(); ++i) {
    const auto sx = sn_dense(truncate(x[i], n).dense(), g);
    const auto sy = sn_dense(truncate(y[i], n).dense(), g);
    d2 += std::pow(l2_distance(sx, sy), 2);
  }
  DenseMatrix right = DenseMatrix::Identity(long(n), long(n));
  for (const auto& w : s.a) right = right * truncate(w.sample(g), n).dense();
  auto out = sn_dense(right.adjoint() * right, g);
  for (auto& v : out.values()) v *= std::exp(-s.sep_gamma * d2);
  return out;
}

TEST(BaseScalarKernel, ValuesAndSymmetry) {
  const std::vector<cplx> u{cplx(1, 2), cplx(0, -1)}, v{cplx(0.5, 0), cplx(1, 1)};
  const auto gk = BaseScalarKernel::gaussian(0.5);
  EXPECT_NEAR(gk(u, u).real(), 1.0, 1e-15);
  const double d2 = std::norm(u[0] - v[0]) + std::norm(u[1] - v[1]);
  EXPECT_NEAR(std::abs(gk(u, v) - std::exp(-0.5 * d2)), 0.0, 1e-15);
  const auto lk = BaseScalarKernel::linear();
  const cplx ip = std::conj(u[0]) * v[0] + std::conj(u[1]) * v[1];
  EXPECT_NEAR(std::abs(lk(u, v) - ip), 0.0, 1e-15);
  EXPECT_NEAR(std::abs(lk(u, v) - std::conj(lk(v, u))), 0.0, 1e-15);
  const auto pk = BaseScalarKernel::polynomial(3, 0.5);
  EXPECT_NEAR(std::abs(pk(u, v) - std::pow(ip + 0.5, 3)), 0.0, 1e-12);
  EXPECT_NEAR(std::abs(pk(u, v) - std::conj(pk(v, u))), 0.0, 1e-12);
}

TEST(KPoly, Examples) {
  const TorusGrid g(16);
  const FunctionTuple one({SampledFunction::constant(g, 1.0)});
  const auto k = k_poly(poly_spec(5, 1, {1.0}), one, one);
  for (std::size_t p = 0; p < g.size(); ++p) EXPECT_NEAR(std::abs(k[p] - 1.0), 0.0, 1e-14);

  const FunctionTuple e1({SampledFunction::from(g, [](double z) { return std::exp(cplx(0, z)); })});
  for (std::size_t n : {2u, 3u, 7u}) {
    const auto kn = k_poly(poly_spec(n, 1, {1.0}), e1, e1);
    for (std::size_t p = 0; p < g.size(); ++p)
      EXPECT_NEAR(std::abs(kn[p] - (double(n) - 1.0) / double(n)), 0.0, 1e-14);
  }
  const auto kinf = k_poly(poly_spec(std::nullopt, 1, {1.0}), e1, e1);
  for (std::size_t p = 0; p < g.size(); ++p) EXPECT_NEAR(std::abs(kinf[p] - 1.0), 0.0, 1e-14);
}

TEST(KPoly, GapIsExactlyOneOverN) {
  const TorusGrid g(600);
  const FunctionTuple e1({SampledFunction::from(g, [](double z) { return std::exp(cplx(0, z)); })});
  const std::vector<std::size_t> ns{8, 16, 32, 64, 128, 256};
  const auto rows = kernel_limit_gap(poly_spec(8, 1, {1.0}), e1, e1, ns);
  for (std::size_t i = 0; i < ns.size(); ++i) EXPECT_NEAR(rows[i].sup_gap, 1.0 / double(ns[i]), 1e-10);
}

TEST(KPoly, MatchesDenseReference) {
  std::mt19937_64 rng(1);
  const TorusGrid g(24);
  for (std::size_t q : {1u, 2u, 3u})
    for (std::size_t n : {1u, 4u, 9u}) {
      const auto x = random_tuple(rng, g, 2, 4);
      const auto y = random_tuple(rng, g, 2, 4);
      const auto s = poly_spec(n, q, {0.7, 1.5});
      EXPECT_LT(sup_distance(k_poly(s, x, y), poly_reference(s, x, y)), 1e-11);
    }
}

TEST(KPoly, LimitIsPointwisePower) {
  std::mt19937_64 rng(2);
  const TorusGrid g(20);
  const auto x = random_tuple(rng, g, 2, 3);
  const auto y = random_tuple(rng, g, 2, 3);
  const auto k = k_poly(poly_spec(std::nullopt, 2, {0.5, 2.0}), x, y);
  for (std::size_t p = 0; p < g.size(); ++p) {
    const cplx ref = 0.5 * std::pow(std::conj(x[0][p]) * y[0][p], 2) + 2.0 * std::pow(std::conj(x[1][p]) * y[1][p], 2);
    EXPECT_NEAR(std::abs(k[p] - ref), 0.0, 1e-14);
  }
}

TEST(KPoly, Validation) {
  const TorusGrid g(10);
  const FunctionTuple x({SampledFunction::constant(g, 1.0)});
  EXPECT_THROW(k_poly(poly_spec(3, 1, {1.0, 1.0}), x, x), ConfigError);
  EXPECT_THROW(k_poly(poly_spec(3, 1, {-1.0}), x, x), ConfigError);
  EXPECT_THROW(k_poly(poly_spec(6, 1, {1.0}), x, x), AliasingError);
  EXPECT_THROW(k_poly(poly_spec(3, 0, {1.0}), x, x), ConfigError);
  EXPECT_THROW(k_prod(poly_spec(3, 1, {1.0}), x, x), ConfigError);
  const FunctionTuple other({SampledFunction::constant(TorusGrid(12), 1.0)});
  EXPECT_THROW(k_poly(poly_spec(3, 1, {1.0}), x, other), GridMismatch);
}

TEST(KProd, MatchesDenseReferenceWithOffset) {
  std::mt19937_64 rng(3);
  const TorusGrid g(20);
  for (std::size_t q : {1u, 2u})
    for (std::size_t n : {1u, 3u, 8u})
      for (double beta : {0.0, 0.35}) {
        const auto x = random_tuple(rng, g, 2, 3);
        const auto y = random_tuple(rng, g, 2, 3);
        const auto s = prod_spec(n, q, beta);
        EXPECT_LT(sup_distance(k_prod(s, x, y), prod_reference(s, x, y)), 1e-11) << "q=" << q << " n=" << n;
      }
}

TEST(KProd, SelfLimitIsOneForGaussian) {
  std::mt19937_64 rng(4);
  const TorusGrid g(16);
  const auto x = random_tuple(rng, g, 2, 3);
  const auto k = k_prod(prod_spec(std::nullopt, 1, 5.0), x, x);
  for (std::size_t p = 0; p < g.size(); ++p) EXPECT_NEAR(std::abs(k[p] - 1.0), 0.0, 1e-15);
}

TEST(KProd, OffsetIsAConstantShift) {
  std::mt19937_64 rng(5);
  const TorusGrid g(16);
  const auto x = random_tuple(rng, g, 2, 3);
  const auto y = random_tuple(rng, g, 2, 3);
  const auto base = k_prod(prod_spec(5, 2, 0.0), x, y);
  const auto shifted = k_prod(prod_spec(5, 2, 2.0), x, y);
  const cplx d0 = shifted[0] - base[0];
  for (std::size_t p = 1; p < g.size(); ++p) EXPECT_NEAR(std::abs(shifted[p] - base[p] - d0), 0.0, 1e-12);
}

TEST(KProd, BetaPolicies) {
  const TorusGrid g(16);
  const FunctionTuple x({SampledFunction::constant(g, 0.3)});
  auto s = prod_spec(4, 1, 0.0);
  s.beta = BetaPolicy::from_bound();
  EXPECT_EQ(KernelEvaluator(s, g).beta(), 16.0);
  s.beta = BetaPolicy::from_minimum();
  const double b = KernelEvaluator(s, g).beta();
  EXPECT_NEAR(b, std::max(0.0, -fejer_min_estimate(4, 1, 64, 0x5eed).value) + 1e-6, 1e-12);
  const auto resolved = KernelEvaluator(s, g).resolved_spec();
  EXPECT_EQ(resolved.beta.kind, BetaPolicy::Kind::manual);
  EXPECT_EQ(resolved.beta.value, b);
  // The limit kernel never carries an offset.
  s.n.reset();
  EXPECT_EQ(KernelEvaluator(s, g).beta(), 0.0);
  auto bad = prod_spec(4, 1, -1.0);
  EXPECT_THROW(KernelEvaluator(bad, g), ConfigError);
  auto missing = prod_spec(4, 2, 0.0);
  missing.k2.pop_back();
  EXPECT_THROW(KernelEvaluator(missing, g), ConfigError);
}

TEST(KSep, MatchesDenseReference) {
  std::mt19937_64 rng(6);
  const TorusGrid g(22);
  const auto w1 = WeightFunction::trig({{0, 1.0}, {1, cplx(0.2, 0.1)}, {-2, 0.3}});
  const auto w2 = WeightFunction::named("exp_cos");
  for (std::size_t n : {1u, 5u, 10u}) {
    const auto x = random_tuple(rng, g, 2, 4);
    const auto y = random_tuple(rng, g, 2, 4);
    for (const auto& s : {sep_spec(n, {w1}), sep_spec(n, {w1, w2})})
      EXPECT_LT(sup_distance(k_sep(s, x, y), sep_reference(s, x, y)), 1e-11);
  }
}

TEST(KSep, UnitWeightsReduceToScalarKernel) {
  std::mt19937_64 rng(7);
  const TorusGrid g(20);
  const auto x = random_tuple(rng, g, 2, 3);
  const auto y = random_tuple(rng, g, 2, 3);
  const auto one = WeightFunction::named("one");
  double d2 = 0.0;
  for (std::size_t i = 0; i < 2; ++i) d2 += std::pow(l2_distance(smooth(x[i], 6), smooth(y[i], 6)), 2);
  const auto kn = k_sep(sep_spec(6, {one, one}), x, y);
  for (std::size_t p = 0; p < g.size(); ++p) EXPECT_NEAR(std::abs(kn[p] - std::exp(-0.8 * d2)), 0.0, 1e-13);
  const auto kinf = k_sep(sep_spec(std::nullopt, {one}), x, y);
  const double dinf = std::pow(l2_distance(x[0], y[0]), 2) + std::pow(l2_distance(x[1], y[1]), 2);
  for (std::size_t p = 0; p < g.size(); ++p) EXPECT_NEAR(std::abs(kinf[p] - std::exp(-0.8 * dinf)), 0.0, 1e-13);
}

TEST(KSep, WeightFactorConvergesToSquaredModulus) {
  const TorusGrid g(520);
  const FunctionTuple x({SampledFunction::constant(g, 0.0)});
  double prev = 1e300;
  for (std::size_t n : {8u, 32u, 128u}) {
    const auto k = k_sep(sep_spec(n, {WeightFunction::named("exp_sin")}), x, x);
    double gap = 0.0;
    for (std::size_t p = 0; p < g.size(); ++p) gap = std::max(gap, std::abs(k[p] - std::exp(2 * std::sin(g.point(p)))));
    EXPECT_LT(gap, prev);
    prev = gap;
  }
  EXPECT_LT(prev, 0.2);
}

TEST(KSep, FactorIsNonnegativeForDistinctComplexWeights) {
  const TorusGrid g(40);
  const FunctionTuple x({SampledFunction::constant(g, 0.0)});
  const auto w1 = WeightFunction::trig({{0, 1.0}, {1, cplx(0.3, 0.4)}});
  const auto w2 = WeightFunction::trig({{0, cplx(0.2, -0.1)}, {-2, 0.7}, {3, cplx(0, 0.5)}});
  for (std::size_t n : {2u, 6u, 15u}) {
    const auto k = k_sep(sep_spec(n, {w1, w2, w1}), x, x);
    for (std::size_t p = 0; p < g.size(); ++p) {
      EXPECT_GE(k[p].real(), -1e-12);
      EXPECT_LE(std::abs(k[p].imag()), 1e-12);
    }
  }
}

TEST(KSep, WeightSamplesMustMatchGrid) {
  const TorusGrid g(12);
  const FunctionTuple x({SampledFunction::constant(g, 0.0)});
  const auto w = WeightFunction::sampled(SampledFunction::constant(TorusGrid(10), 1.0));
  EXPECT_THROW(k_sep(sep_spec(3, {w}), x, x), GridMismatch);
  EXPECT_THROW(k_sep(sep_spec(3, {WeightFunction::named("nope")}), x, x), ConfigError);
}

// Laws shared by every family, finite and infinite n.
std::vector<KernelSpec> all_specs() {
  std::vector<KernelSpec> out;
  for (std::optional<std::size_t> n : {std::optional<std::size_t>(3), std::optional<std::size_t>(7), std::optional<std::size_t>()}) {
    out.push_back(poly_spec(n, 2, {1.0, 0.5}));
    out.push_back(prod_spec(n, 2, 0.25));
    out.push_back(sep_spec(n, {WeightFunction::named("exp_sin"), WeightFunction::named("exp_cos")}));
  }
  return out;
}

TEST(KernelLaws, Hermitian) {
  std::mt19937_64 rng(8);
  const TorusGrid g(18);
  for (const auto& s : all_specs())
    for (int trial = 0; trial < 3; ++trial) {
      const auto x = random_tuple(rng, g, 2, 3);
      const auto y = random_tuple(rng, g, 2, 3);
      const auto kxy = evaluate_kernel(s, x, y);
      const auto kyx = evaluate_kernel(s, y, x);
      for (std::size_t p = 0; p < g.size(); ++p) EXPECT_NEAR(std::abs(kxy[p] - std::conj(kyx[p])), 0.0, 1e-9) << s.label();
    }
}

TEST(KernelLaws, RealInputsGiveRealOutputs) {
  std::mt19937_64 rng(9);
  const TorusGrid g(18);
  for (auto s : all_specs()) {
    if (s.family == Family::prod) {
      s.k1 = {BaseScalarKernel::gaussian(1.0), BaseScalarKernel::linear()};
      s.k2 = {BaseScalarKernel::gaussian(0.5), BaseScalarKernel::polynomial(2, 1.0)};
    }
    const auto x = random_tuple(rng, g, 2, 3, 0.3, true);
    const auto y = random_tuple(rng, g, 2, 3, 0.3, true);
    EXPECT_LE(evaluate_kernel(s, x, y).max_imag(), 1e-9) << s.label();
  }
}

TEST(KernelLaws, ConstantInputsAreFixedPoints) {
  const TorusGrid g(16);
  const FunctionTuple x({SampledFunction::constant(g, cplx(0.4, -0.2)), SampledFunction::constant(g, 0.9)});
  const FunctionTuple y({SampledFunction::constant(g, cplx(-0.1, 0.3)), SampledFunction::constant(g, 0.2)});
  for (const Family fam : {Family::poly, Family::prod}) {
    auto finite = fam == Family::poly ? poly_spec(6, 2, {1.0, 0.5}) : prod_spec(6, 2, 0.0);
    EXPECT_LT(sup_distance(evaluate_kernel(finite, x, y), evaluate_kernel(finite.with_n(std::nullopt), x, y)), 1e-13);
  }
  auto sep = sep_spec(6, {WeightFunction::named("one")});
  EXPECT_LT(sup_distance(evaluate_kernel(sep, x, y), evaluate_kernel(sep.with_n(std::nullopt), x, y)), 1e-13);
  const auto rows = kernel_limit_gap(poly_spec(4, 1, {1.0, 1.0}), x, y, {2, 4, 7});
  for (const auto& r : rows) EXPECT_LT(r.sup_gap, 1e-13);
}

TEST(KernelLaws, GapDecreasesForSmoothInputs) {
  std::mt19937_64 rng(10);
  const TorusGrid g(130);
  const auto x = random_tuple(rng, g, 2, 3);
  const auto y = random_tuple(rng, g, 2, 3);
  for (const auto& s : {poly_spec(4, 1, {1.0, 1.0}), prod_spec(4, 1, 0.0),
                        sep_spec(4, {WeightFunction::trig({{0, 1.0}, {1, 0.1}})})}) {
    const auto rows = kernel_limit_gap(s, x, y, {4, 8, 16, 32, 64});
    for (std::size_t i = 1; i < rows.size(); ++i) EXPECT_LT(rows[i].sup_gap, rows[i - 1].sup_gap) << s.label();
  }
}

TEST(KernelEvaluator, CountsCalls) {
  const TorusGrid g(10);
  const FunctionTuple x({SampledFunction::constant(g, 1.0)});
  const KernelEvaluator ev(poly_spec(3, 1, {1.0}), g);
  const auto px = ev.prepare(x);
  ev(px, px);
  ev(px, px);
  EXPECT_EQ(ev.evaluations(), 2u);
}

}  // namespace
}  // namespace spectrunc
