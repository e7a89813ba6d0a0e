// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <cmath>
#include <thread>

#include "ndl/activations.hpp"
#include "ndl/error.hpp"
#include "ndl/hermite.hpp"

using ndl::Activation;

namespace {

double double_factorial(int n) {
  double r = 1.0;
  for (int k = n; k > 1; k -= 2) r *= k;
  return r;
}

}  // namespace

TEST(Hermite, ClosedFormValues) {
  EXPECT_NEAR(ndl::hermite(2, 1.0), 0.0, 1e-15);
  EXPECT_EQ(ndl::hermite(0, -3.7), 1.0);
  EXPECT_NEAR(ndl::hermite(3, 2.0), 2.0 / std::sqrt(6.0), 1e-15);
  EXPECT_NEAR(ndl::hermite(3, 2.0), 0.816497, 1e-6);
  EXPECT_DOUBLE_EQ(ndl::hermite(1, 0.4), 0.4);
}

TEST(Hermite, DegreeOutOfRange) {
  EXPECT_THROW(ndl::hermite(ndl::kMaxHermiteDegree + 1, 0.0), ndl::RangeError);
  EXPECT_THROW(ndl::hermite(-1, 0.0), ndl::RangeError);
  EXPECT_NO_THROW(ndl::hermite(ndl::kMaxHermiteDegree, 0.3));
}

TEST(GaussHermite, TwoPointRule) {
  const auto rule = ndl::gauss_hermite(2);
  ASSERT_EQ(rule.order(), 2);
  EXPECT_NEAR(rule.nodes[0], -1.0, 1e-15);
  EXPECT_NEAR(rule.nodes[1], 1.0, 1e-15);
  EXPECT_NEAR(rule.weights[0], 0.5, 1e-15);
  EXPECT_NEAR(rule.weights[1], 0.5, 1e-15);
}

TEST(GaussHermite, OrderOutOfRange) {
  EXPECT_THROW(ndl::gauss_hermite(1), ndl::RangeError);
  EXPECT_THROW(ndl::gauss_hermite(513), ndl::RangeError);
}

TEST(GaussHermite, MomentExactness) {
  for (int m : {11, 20, 64, 200, 400, 512}) {
    const auto rule = ndl::gauss_hermite(m);
    double wsum = 0.0;
    for (double w : rule.weights) {
      EXPECT_GE(w, 0.0);
      wsum += w;
    }
    EXPECT_NEAR(wsum, 1.0, 1e-14);
    for (int p = 0; p <= 20 && p <= 2 * m - 1; ++p) {
      const double moment = rule.expect([p](double x) { return std::pow(x, p); });
      if (p % 2) {
        EXPECT_NEAR(moment, 0.0, 1e-12) << "m=" << m << " p=" << p;
      } else {
        const double exact = double_factorial(p - 1);
        EXPECT_NEAR(moment / exact, 1.0, 1e-10) << "m=" << m << " p=" << p;
      }
    }
  }
  const auto r20 = ndl::gauss_hermite(20);
  EXPECT_NEAR(r20.expect([](double x) { return std::pow(x, 10); }), 945.0, 1e-8);
}

TEST(GaussHermite, Orthonormality) {
  const auto& rule = ndl::cached_gauss_hermite(64);
  for (int j = 0; j <= 20; ++j) {
    for (int k = 0; k <= 20; ++k) {
      const double ip = rule.expect([&](double x) { return ndl::hermite(j, x) * ndl::hermite(k, x); });
      EXPECT_NEAR(ip, j == k ? 1.0 : 0.0, 1e-8) << j << "," << k;
    }
  }
}

TEST(GaussHermite, CacheIsSharedAcrossThreads) {
  const ndl::QuadratureRule* seen[4] = {};
  std::vector<std::thread> pool;
  for (int t = 0; t < 4; ++t) pool.emplace_back([&, t] { seen[t] = &ndl::cached_gauss_hermite(77); });
  for (auto& th : pool) th.join();
  for (int t = 1; t < 4; ++t) EXPECT_EQ(seen[t], seen[0]);
}

TEST(Expand, Identity) {
  const auto e = ndl::expand(Activation::identity(), 40, 400);
  for (int k = 0; k <= 40; ++k) EXPECT_NEAR(e.coeffs()[k], k == 1 ? 1.0 : 0.0, 1e-12) << k;
}

// Closed form d·e^{−d²/2} of E[z sin(dz)].
TEST(Expand, SineFirstCoefficient) {
  for (double d : {1.0, 2.0, 3.0}) {
    const auto e = ndl::expand(Activation::sine(d));
    const double exact = d * std::exp(-d * d / 2);
    EXPECT_NEAR(e.coeffs()[1] / exact, 1.0, 1e-6) << d;
  }
}

TEST(Expand, SineRaisesQuadratureOrder) {
  EXPECT_EQ(ndl::resolve_order(Activation::sine(2.0), 400), 400);
  EXPECT_EQ(ndl::resolve_order(Activation::sine(3.0), 100), 136);
  EXPECT_EQ(ndl::resolve_order(Activation::sine(8.0), 400), 400);
  EXPECT_EQ(ndl::resolve_order(Activation::sine(9.0), 400), 424);
  EXPECT_EQ(ndl::resolve_order(Activation::sine(20.0), 400), ndl::kMaxQuadratureOrder);
}

// E[z relu(z)] = E[z² 1{z>0}] = 1/2 by symmetry.
TEST(Expand, ReluFirstCoefficient) {
  EXPECT_NEAR(ndl::expand(Activation::relu()).coeffs()[1], 0.5, 1e-9);
}

// Half-line moments E[z^{2j+1} 1{z>0}] = (2j)!!/√(2π) against He_4 = z⁴ − 6z² + 3.
TEST(Expand, ReluClosedFormCoefficients) {
  const auto c = ndl::expand(Activation::relu(), 6, 400).coeffs();
  EXPECT_NEAR(c[0], 1.0 / std::sqrt(2 * M_PI), 1e-15);
  EXPECT_NEAR(c[2], 1.0 / (2.0 * std::sqrt(M_PI)), 1e-15);
  EXPECT_NEAR(c[3], 0.0, 1e-15);
  EXPECT_NEAR(c[4], (8.0 - 6.0 * 2.0 + 3.0) / std::sqrt(2 * M_PI) / std::sqrt(24.0), 1e-15);
}

// Plateau coefficients against brute-force midpoint integration of
// (z−2)_+ h_k(z) φ(z) on [2, 12].
TEST(Expand, PlateauMatchesDirectIntegration) {
  const auto c = ndl::expand(Activation::plateau(), 12, 400).coeffs();
  const int n = 200000;
  const double h = 10.0 / n;
  for (int k = 0; k <= 12; ++k) {
    double acc = 0.0;
    for (int i = 0; i < n; ++i) {
      const double z = 2.0 + (i + 0.5) * h;
      acc += (z - 2.0) * ndl::hermite(k, z) * std::exp(-0.5 * z * z) / std::sqrt(2 * M_PI) * h;
    }
    EXPECT_NEAR(c[k], acc, 1e-9) << k;
  }
}

TEST(Expand, AliasingGuard) {
  EXPECT_THROW(ndl::expand(Activation::silu(), 40, ndl::gauss_hermite(79)), ndl::ConfigError);
  EXPECT_NO_THROW(ndl::expand(Activation::silu(), 40, ndl::gauss_hermite(80)));
}

TEST(Expand, ParsevalAndMonotoneResidual) {
  const auto& rule = ndl::cached_gauss_hermite(400);
  for (const auto& id : {"relu", "silu", "gelu", "tanh", "sine:2", "plateau"}) {
    const auto act = Activation::parse(id);
    double previous = INFINITY;
    for (int K = 2; K <= 128; K += 14) {
      const auto e = ndl::expand(act, K, rule);
      EXPECT_GE(e.residual(), -1e-8) << id << " K=" << K;
      EXPECT_LE(e.residual(), previous + 1e-12) << id << " K=" << K;
      previous = e.residual();
    }
  }
}

TEST(Expand, TruncationWarning) {
  EXPECT_FALSE(ndl::expand(Activation::silu()).truncation_warning());
  EXPECT_TRUE(ndl::expand(Activation::sine(6.0), 4, 400).truncation_warning());
}

// Σ k σ̂_k² = E[σ'(z)²] (Hermite derivative identity h_k' = √k h_{k−1}).
TEST(Expand, DerivativeEnergyIdentity) {
  const auto& rule = ndl::cached_gauss_hermite(400);
  for (const auto& id : {"silu", "gelu", "tanh", "sigmoid", "sine:1", "swish:2"}) {
    const auto act = Activation::parse(id);
    const auto e = ndl::expand(act, 40, rule);
    double lhs = 0.0;
    for (int k = 1; k <= 40; ++k) lhs += k * e.coeffs()[k] * e.coeffs()[k];
    const double rhs = rule.expect([&](double x) { return act.deriv(x) * act.deriv(x); });
    EXPECT_NEAR(lhs, rhs, 1e-4) << id;
  }
}

TEST(Correlation, IdentityIsLinear) {
  const ndl::CorrelationFunction cf(ndl::expand(Activation::identity()));
  for (double a : {-1.0, -0.4, 0.0, 0.6, 1.0}) {
    EXPECT_NEAR(cf.f(a), a, 1e-12);
    EXPECT_NEAR(cf.f_prime(a), 1.0, 1e-12);
  }
  EXPECT_NEAR(cf.q_sigma(1.0), 1.0, 1e-12);
}

TEST(Correlation, CounterexamplePolynomial) {
  const ndl::CorrelationFunction cf(ndl::expand(Activation::hermite_combo({0, 0, 1, 1})));
  for (double a : {-1.0, -2.0 / 3.0, -0.1, 0.5, 1.0}) {
    // σ̂₀² from the σ(0)=0 shift only adds a constant to f.
    EXPECT_NEAR(cf.f(a) - cf.f(0.0), a * a + a * a * a, 1e-12);
    EXPECT_NEAR(cf.f_prime(a), 2 * a + 3 * a * a, 1e-12);
  }
}

// f'(1) = Σ k σ̂_k² = E[σ'(z)²] = P(z>0) = 1/2 for ReLU.
TEST(Correlation, ReluSlopeAtOne) {
  const ndl::CorrelationFunction cf(ndl::expand(Activation::relu(), 40, 200));
  EXPECT_NEAR(cf.f_prime(1.0), 0.5, 2e-3);
}

// σ̂₁² = 1/4 and Σ 2i σ̂_{2i}² = E[σ'²] − σ̂₁² = 1/4, so q_σ(1) cancels.
TEST(Correlation, QSigmaMargins) {
  EXPECT_NEAR(ndl::CorrelationFunction(ndl::expand(Activation::identity())).q_sigma(1.0), 1.0, 1e-12);
  EXPECT_NEAR(ndl::CorrelationFunction(ndl::expand(Activation::relu())).q_sigma(1.0), 0.0, 2e-3);
  EXPECT_GT(ndl::CorrelationFunction(ndl::expand(Activation::silu())).q_sigma(1.0), 0.0);
  EXPECT_GT(ndl::CorrelationFunction(ndl::expand(Activation::gelu())).q_sigma(1.0), 0.0);
}

TEST(Correlation, NondecreasingOnUnitInterval) {
  for (const auto& id : {"relu", "silu", "sine:3", "hermite:0,0,1,1", "plateau"}) {
    const ndl::CorrelationFunction cf(ndl::expand(Activation::parse(id)));
    double prev = cf.f(0.0);
    for (int i = 1; i <= 100; ++i) {
      const double a = i / 100.0;
      EXPECT_GE(cf.f_prime(a), 0.0) << id;
      EXPECT_GE(cf.f(a), prev - 1e-15) << id;
      prev = cf.f(a);
    }
    // f(1) = E[σ(z)²] by Parseval.
    EXPECT_NEAR(cf.f_at_one(), ndl::expand(Activation::parse(id)).l2_total(), 1e-10) << id;
  }
}

TEST(Correlation, FirstNonzeroCoefficientLowerBound) {
  for (const auto& id : {"silu", "hermite:0,0,0,1", "relu", "sine:2"}) {
    const ndl::CorrelationFunction cf(ndl::expand(Activation::parse(id)));
    const auto& c = cf.power_coeffs();
    int k = 1;
    while (k < static_cast<int>(c.size()) && c[k] < 1e-20) ++k;
    for (double a = 0.05; a <= 1.0; a += 0.05) {
      EXPECT_GE(cf.f_prime(a), k * c[k] * std::pow(a, k - 1) * (1 - 1e-12)) << id;
    }
  }
}

TEST(Dilation, UnitDilationReproducesExpansion) {
  const auto& rule = ndl::cached_gauss_hermite(200);
  const auto act = Activation::gelu();
  const auto e = ndl::expand(act, 40, rule);
  for (int k = 0; k <= 40; k += 3) EXPECT_DOUBLE_EQ(ndl::dilated_coeff(act, 1.0, k, rule), e.coeffs()[k]);
}

TEST(Dilation, IdentityScales) {
  const auto& rule = ndl::cached_gauss_hermite(100);
  const auto act = Activation::identity();
  EXPECT_NEAR(ndl::dilated_coeff(act, 2.5, 1, rule), 2.5, 1e-13);
  EXPECT_NEAR(ndl::H_eval(act, 0.3, 1.5, 0.7, 40, rule), 1.5 * 0.7 * 0.3, 1e-13);
}

TEST(Dilation, HIsSymmetric) {
  const auto& rule = ndl::cached_gauss_hermite(400);
  const auto act = Activation::silu();
  for (double z : {-0.9, 0.2, 1.0}) {
    EXPECT_EQ(ndl::H_eval(act, z, 0.6, 1.8, 60, rule), ndl::H_eval(act, z, 1.8, 0.6, 60, rule));
  }
}

// H(1,s,s) = E[σ(sz)²] by Parseval.
TEST(Dilation, ParsevalAtOne) {
  const auto& rule = ndl::cached_gauss_hermite(400);
  const auto silu = Activation::silu();
  const double direct = rule.expect([&](double x) { return silu(1.3 * x) * silu(1.3 * x); });
  EXPECT_NEAR(ndl::H_eval(silu, 1.0, 1.3, 1.3, 40, rule), direct, 1e-10);
  EXPECT_NEAR(ndl::H_eval(Activation::relu(), 1.0, 1.0, 1.0, 40, rule), 0.5, 1e-6);
}

// E[relu(s1 z) relu(s2 z')] with corr(z,z') = ρ has the arc-cosine closed form
// s1 s2 (sin θ + (π − θ) cos θ) / (2π), θ = arccos ρ.
TEST(Dilation, ReluArcCosineKernel) {
  const auto& rule = ndl::cached_gauss_hermite(400);
  for (double rho : {-0.9, -0.3, 0.0, 0.5, 0.95}) {
    const double theta = std::acos(rho);
    const double exact = 1.5 * 0.8 * (std::sin(theta) + (M_PI - theta) * rho) / (2 * M_PI);
    EXPECT_NEAR(ndl::H_eval(Activation::relu(), rho, 1.5, 0.8, 128, rule), exact, 1e-7) << rho;
  }
}

// The lumped tail reproduces the endpoint slopes: f'(−1) = E[σ'_even²] − E[σ'_odd²].
TEST(Correlation, ReluSlopeAtMinusOne) {
  const ndl::CorrelationFunction cf(ndl::expand(Activation::relu(), 40, 400));
  EXPECT_NEAR(cf.f_prime(-1.0), 0.0, 1e-9);
  for (double a = -0.95; a < 1.0; a += 0.05) EXPECT_GT(cf.f_prime(a), 0.0) << a;
}

TEST(Dilation, Preconditions) {
  const auto& rule = ndl::cached_gauss_hermite(100);
  EXPECT_THROW(ndl::dilated_coeff(Activation::silu(), 0.0, 1, rule), ndl::DomainError);
  EXPECT_THROW(ndl::H_eval(Activation::silu(), 1.5, 1.0, 1.0, 10, rule), ndl::DomainError);
  EXPECT_THROW(ndl::H_eval(Activation::silu(), 0.5, 1.0, 1.0, 60, rule), ndl::ConfigError);
}
