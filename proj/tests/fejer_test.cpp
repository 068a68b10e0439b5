#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "spectrunc/fejer.hpp"
#include "spectrunc/truncation.hpp"
#include "test_support.hpp"

namespace spectrunc {
namespace {

using testing::random_trig;
using testing::TrigPoly;

constexpr double kPi = std::numbers::pi;

std::vector<double> random_point(std::mt19937_64& rng, std::size_t dim) {
  std::uniform_real_distribution<double> u(-kPi, kPi);
  std::vector<double> t(dim);
  for (auto& v : t) v = u(rng);
  return t;
}

TEST(Dirichlet, Examples) {
  EXPECT_NEAR(std::abs(dirichlet(5, 0.0) - 5.0), 0.0, 1e-14);
  EXPECT_NEAR(std::abs(dirichlet(5, 4 * kPi) - 5.0), 0.0, 1e-12);
  EXPECT_NEAR(std::abs(dirichlet(2, kPi)), 0.0, 1e-15);
  EXPECT_NEAR(std::abs(dirichlet(3, 2 * kPi / 3)), 0.0, 1e-15);
}

TEST(Dirichlet, MatchesGeometricSumIncludingNearZero) {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(-10.0, 10.0);
  for (std::size_t n : {1u, 2u, 7u, 40u}) {
    std::vector<double> pts{1e-9, -3e-8, 2 * kPi + 1e-9};
    for (int i = 0; i < 20; ++i) pts.push_back(u(rng));
    for (double s : pts) {
      cplx ref{};
      for (std::size_t r = 0; r < n; ++r) ref += std::exp(cplx(0, double(r) * s));
      EXPECT_NEAR(std::abs(dirichlet(n, s) - ref), 0.0, 1e-11 * double(n));
    }
  }
}

TEST(Fejer1d, Examples) {
  EXPECT_NEAR(fejer_1d(6, 0.0), 6.0, 1e-13);
  EXPECT_NEAR(fejer_1d(2, kPi), 0.0, 1e-15);
}

TEST(Fejer1d, CesaroFormAndUnitMass) {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(-kPi, kPi);
  for (std::size_t n : {1u, 3u, 8u}) {
    for (int i = 0; i < 10; ++i) {
      const double t = u(rng);
      double ref = 0.0;
      for (long k = -long(n) + 1; k < long(n); ++k) ref += (1.0 - double(std::abs(k)) / double(n)) * std::cos(double(k) * t);
      EXPECT_NEAR(fejer_1d(n, t), ref, 1e-12);
      EXPECT_GE(fejer_1d(n, t), 0.0);
    }
    // Normalized integral by a rectangle rule that is exact at this degree.
    const std::size_t pts = 2 * n + 1;
    double mass = 0.0;
    for (std::size_t p = 0; p < pts; ++p) mass += fejer_1d(n, kTwoPi * double(p) / double(pts));
    EXPECT_NEAR(mass / double(pts), 1.0, 1e-13);
  }
}

TEST(FejerMulti, PeakAtOrigin) {
  for (std::size_t q : {1u, 2u, 3u})
    for (std::size_t n : {1u, 2u, 5u, 8u}) {
      const std::vector<double> zero(2 * q, 0.0);
      EXPECT_NEAR(fejer_multi(n, zero), fejer_peak(n, q), 1e-10 * fejer_peak(n, q));
    }
  EXPECT_EQ(fejer_peak(3, 2), 81.0);
}

TEST(FejerMulti, MatchesLatticeOracle) {
  std::mt19937_64 rng(3);
  for (std::size_t q : {1u, 2u})
    for (std::size_t n = 1; n <= 6; ++n)
      for (int i = 0; i < 100; ++i) {
        const auto t = random_point(rng, 2 * q);
        const double ref = fejer_multi_oracle(n, q, t);
        EXPECT_NEAR(fejer_multi(n, t), ref, 1e-9 * std::max(1.0, std::abs(ref)));
      }
}

TEST(FejerMulti, OracleExamples) {
  const std::vector<double> pipi{kPi, kPi};
  EXPECT_NEAR(fejer_multi(2, pipi), fejer_multi_oracle(2, 1, pipi), 1e-12);
  std::mt19937_64 rng(4);
  for (int i = 0; i < 5; ++i) {
    const auto t = random_point(rng, 4);
    EXPECT_NEAR(fejer_multi_oracle(1, 2, t), 1.0, 1e-15);
    EXPECT_NEAR(fejer_multi(1, t), 1.0, 1e-15);
  }
  const std::vector<double> zero(4, 0.0);
  EXPECT_NEAR(fejer_multi_oracle(3, 2, zero), 81.0, 1e-10);
  EXPECT_THROW(fejer_multi_oracle(9, 1, std::vector<double>(2, 0.0)), std::invalid_argument);
  EXPECT_THROW(fejer_multi_oracle(3, 3, std::vector<double>(6, 0.0)), std::invalid_argument);
}

TEST(FejerMulti, RealEvenAndBounded) {
  std::mt19937_64 rng(5);
  for (std::size_t q : {1u, 2u, 3u})
    for (std::size_t n : {2u, 4u, 9u}) {
      for (int i = 0; i < 200; ++i) {
        auto t = random_point(rng, 2 * q);
        const cplx v = fejer_multi_complex(n, t);
        EXPECT_LE(std::abs(v.imag()), 1e-10 * fejer_peak(n, q));
        EXPECT_LE(std::abs(v.real()), fejer_peak(n, q) * (1 + 1e-10));
        for (auto& x : t) x = -x;
        EXPECT_NEAR(fejer_multi(n, t), v.real(), 1e-10 * fejer_peak(n, q));
      }
    }
}

TEST(Lattice, PolyhedronMembership) {
  const std::vector<long> a{1, 1};
  EXPECT_FALSE(in_polyhedron(a, 1));
  EXPECT_TRUE(in_polyhedron(a, 2));
  EXPECT_EQ(partial_sum_spread(a), 2);
  const std::vector<long> b{2, -3, 1};
  EXPECT_EQ(partial_sum_spread(b), 3);
  EXPECT_FALSE(in_polyhedron(b, 2));
  EXPECT_TRUE(in_polyhedron(b, 3));
}

TEST(Lattice, SevenPointsAtLevelOne) {
  const auto s = lattice_points_mP(1, 1);
  EXPECT_EQ(s.size(), 7u);
  EXPECT_EQ(s.count({1, 1}), 0u);
  EXPECT_EQ(s.count({-1, -1}), 0u);
  EXPECT_EQ(s.count({1, -1}), 1u);
  EXPECT_EQ(q_set_union(1, 1), s);
}

TEST(Lattice, DegenerateLevelIsOrigin) {
  for (std::size_t q : {1u, 2u}) {
    const LatticeSet origin{LatticePoint(2 * q, 0)};
    EXPECT_EQ(lattice_points_mP(0, q), origin);
    EXPECT_EQ(q_set_union(0, q), origin);
  }
}

TEST(Lattice, SetEqualityOnGuardedRange) {
  for (long m = 0; m <= 4; ++m)
    for (std::size_t q : {1u, 2u}) EXPECT_EQ(lattice_points_mP(m, q), q_set_union(m, q)) << "m=" << m << " q=" << q;
  EXPECT_THROW(lattice_points_mP(5, 1), std::invalid_argument);
  EXPECT_THROW(q_set_union(1, 3), std::invalid_argument);
}

TEST(FejerMin, ConstantKernelForNOne) {
  EXPECT_NEAR(fejer_min_estimate(1, 1, 16).value, 1.0, 1e-12);
  EXPECT_NEAR(fejer_min_estimate(1, 2, 8).value, 1.0, 1e-12);
}

TEST(FejerMin, ReproducibleAndConsistent) {
  for (std::size_t q : {1u, 2u}) {
    const auto a = fejer_min_estimate(3, q, 32, 99);
    const auto b = fejer_min_estimate(3, q, 32, 99);
    EXPECT_NEAR(a.value, b.value, 1e-6);
    EXPECT_EQ(a.argmin, b.argmin);
    EXPECT_NEAR(fejer_multi(3, a.argmin), a.value, 1e-12);
    EXPECT_GE(a.value, -fejer_peak(3, q));
  }
}

TEST(FejerMin, NoSampledPointBelowEstimateForQOne) {
  std::mt19937_64 rng(6);
  for (std::size_t n : {2u, 4u, 6u}) {
    const auto est = fejer_min_estimate(n, 1, 128);
    for (int i = 0; i < 2000; ++i) EXPECT_GE(fejer_multi(n, random_point(rng, 2)), est.value - 1e-8);
  }
}

TEST(FejerConvolve, UnitMass) {
  const auto one = [](std::span<const double>) { return cplx(1.0, 0.0); };
  for (std::size_t n : {1u, 3u, 5u}) {
    EXPECT_NEAR(std::abs(fejer_convolve(one, n, 1, 0.7, n + 2) - 1.0), 0.0, 1e-12);
    EXPECT_NEAR(std::abs(fejer_convolve(one, n, 2, -1.1, n + 2) - 1.0), 0.0, 1e-12);
  }
}

TEST(FejerConvolve, MonomialIsDampedByLatticeLevel) {
  // The coefficient of e^{i a.t} in F is #{j < n : a in jP} / n.
  const std::vector<std::vector<long>> exps{{1, 0}, {1, -1}, {2, 1}, {0, 1, -2, 1}, {1, 1, 1, -1}};
  for (const auto& a : exps) {
    const std::size_t q = a.size() / 2;
    for (std::size_t n : {1u, 2u, 4u}) {
      const auto g = [&](std::span<const double> t) {
        double ph = 0.0;
        for (std::size_t i = 0; i < t.size(); ++i) ph += double(a[i]) * t[i];
        return std::exp(cplx(0, ph));
      };
      const double z = 0.4;
      long total = 0;
      for (long v : a) total += v;
      const double weight = std::max(0.0, double(long(n) - partial_sum_spread(a))) / double(n);
      const cplx expected = weight * std::exp(cplx(0, double(total) * z));
      EXPECT_NEAR(std::abs(fejer_convolve(g, n, q, z, n + 4) - expected), 0.0, 1e-12);
    }
  }
}

TEST(FejerConvolve, ApproachesIntegrandForSmoothFunction) {
  const auto g = [](std::span<const double> t) { return cplx(std::cos(t[0]) * std::sin(t[1]) + 1.0, 0.0); };
  const double z = 0.9;
  const cplx target = std::cos(z) * std::sin(z) + 1.0;
  double prev = 1e300;
  for (std::size_t n : {2u, 4u, 8u, 16u}) {
    const double gap = std::abs(fejer_convolve(g, n, 1, z, n + 3) - target);
    EXPECT_LT(gap, prev);
    prev = gap;
  }
  EXPECT_LT(prev, 0.1);
}

TEST(FejerConvolve, BudgetGuard) {
  const auto one = [](std::span<const double>) { return cplx(1.0, 0.0); };
  EXPECT_THROW(fejer_convolve(one, 2, 3, 0.0, 4), std::invalid_argument);
  EXPECT_THROW(fejer_convolve(one, 2, 2, 0.0, 100), std::invalid_argument);
}

// Matrix path S_n(R(x_1)^* .. R(x_q)^* R(y_1) .. R(y_q))(z) against the
// convolution of conj(x_1(t_1)) .. y_q(t_2q) with the Fejer kernel.
TEST(TwoPathIdentity, MatrixAndConvolutionAgree) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> uz(0.0, kTwoPi);
  const TorusGrid g(24);
  for (std::size_t q : {1u, 2u})
    for (std::size_t n : {2u, 4u}) {
      for (int trial = 0; trial < 3; ++trial) {
        std::vector<TrigPoly> xs, ys;
        for (std::size_t j = 0; j < q; ++j) {
          xs.push_back(random_trig(rng, 2));
          ys.push_back(random_trig(rng, 2));
        }
        DenseMatrix prod = DenseMatrix::Identity(long(n), long(n));
        for (const auto& x : xs) prod = prod * truncate(x.sample(g), n).dense().adjoint();
        for (const auto& y : ys) prod = prod * truncate(y.sample(g), n).dense();
        const auto integrand = [&](std::span<const double> t) {
          cplx v{1.0, 0.0};
          for (std::size_t j = 0; j < q; ++j) v *= std::conj(xs[j](t[j])) * ys[j](t[q + j]);
          return v;
        };
        for (int i = 0; i < 3; ++i) {
          const double z = uz(rng);
          const cplx conv = fejer_convolve(integrand, n, q, z, n + 3);
          EXPECT_NEAR(std::abs(sn_eval(prod, z) - conv), 0.0, 1e-9);
        }
      }
    }
}

}  // namespace
}  // namespace spectrunc
