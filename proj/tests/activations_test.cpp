// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "ndl/activations.hpp"
#include "ndl/error.hpp"

using ndl::Activation;

namespace {

// Maclaurin series of erf, independent of std::erf/erfc.
double erf_series(double x) {
  double term = x;
  double sum = x;
  for (int n = 1; n < 60; ++n) {
    term *= -x * x / n;
    sum += term / (2 * n + 1);
  }
  return 2.0 / std::sqrt(M_PI) * sum;
}

std::vector<Activation> smooth_zoo() {
  return {Activation::identity(),      Activation::sigmoid(),          Activation::tanh(),
          Activation::silu(),          Activation::swish(1.5),         Activation::gelu(),
          Activation::sine(2.0),       Activation::hermite_combo({0, 0, 1, 1}),
          Activation::self_gated(ndl::Gate::kNormalCdf, 3.0)};
}

}  // namespace

TEST(Activations, EvalExamples) {
  EXPECT_EQ(Activation::relu()(-1.0), 0.0);
  EXPECT_EQ(Activation::silu()(0.0), 0.0);
  const double oracle = 0.5 * (1.0 + erf_series(1.0 / std::sqrt(2.0)));
  EXPECT_NEAR(oracle, 0.841345, 1e-6);
  EXPECT_NEAR(Activation::gelu()(1.0), oracle, 1e-12);
}

TEST(Activations, NormalizedAtZero) {
  for (const auto& id : {"relu", "sigmoid", "tanh", "silu", "swish:2", "gelu", "sine:3", "plateau",
                         "hermite:0,0,1,1", "hermite:1,2,3", "gated:logistic:4"}) {
    EXPECT_EQ(Activation::parse(id)(0.0), 0.0) << id;
  }
  EXPECT_DOUBLE_EQ(Activation::sigmoid().zero_shift(), 0.5);
  EXPECT_DOUBLE_EQ(Activation::plateau().zero_shift(), 1.0);
  EXPECT_NEAR(Activation::hermite_combo({0, 0, 1, 1}).zero_shift(), -1.0 / std::sqrt(2.0), 1e-15);
}

TEST(Activations, NonFiniteArgumentIsDomainError) {
  const auto silu = Activation::silu();
  EXPECT_THROW(silu(std::nan("")), ndl::DomainError);
  EXPECT_THROW(silu.deriv(INFINITY), ndl::DomainError);
}

TEST(Activations, DerivativeConventions) {
  EXPECT_EQ(Activation::relu().deriv(0.0), 1.0);
  EXPECT_EQ(Activation::relu().deriv(-1e-300), 0.0);
  EXPECT_EQ(Activation::identity().deriv(7.3), 1.0);
  EXPECT_EQ(Activation::relu().deriv_at_zero_convention(), 1.0);
  EXPECT_EQ(Activation::plateau().deriv(2.0), 1.0);
  EXPECT_EQ(Activation::plateau().deriv(1.999), 0.0);
}

TEST(Activations, SecondDerivativeOnKinkIsUnsupported) {
  EXPECT_THROW(Activation::relu().second_deriv(0.3), ndl::UnsupportedError);
  EXPECT_THROW(Activation::plateau().second_deriv(3.0), ndl::UnsupportedError);
  EXPECT_NO_THROW(Activation::silu().second_deriv(0.3));
}

// Grid search over [-10, 0] with step 1e-4 refined by golden section; the
// frozen location/value came from a 30-digit root of σ'' for z·logistic(z).
TEST(Activations, SiluDerivativeHasNegativeMinimum) {
  const auto silu = Activation::silu();
  double best_z = 0.0, best = INFINITY;
  for (int i = 0; i <= 100000; ++i) {
    const double z = -10.0 + i * 1e-4;
    if (const double v = silu.deriv(z); v < best) best = v, best_z = z;
  }
  double lo = best_z - 1e-4, hi = best_z + 1e-4;
  const double g = (std::sqrt(5.0) - 1.0) / 2.0;
  for (int it = 0; it < 80; ++it) {
    const double a = hi - g * (hi - lo), b = lo + g * (hi - lo);
    if (silu.deriv(a) < silu.deriv(b)) {
      hi = b;
    } else {
      lo = a;
    }
  }
  const double z_star = 0.5 * (lo + hi);
  EXPECT_NEAR(z_star, -2.3993572805, 1e-6);
  EXPECT_NEAR(silu.deriv(z_star), -0.0998393201, 1e-10);
  EXPECT_LT(silu.deriv(z_star), 0.0);
}

TEST(Activations, FiniteDifferenceDerivatives) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> pick(-6.0, 6.0);
  const double h = 1e-5;
  for (const auto& act : smooth_zoo()) {
    for (int i = 0; i < 100; ++i) {
      const double z = pick(rng);
      const double fd1 = (act(z + h) - act(z - h)) / (2 * h);
      EXPECT_NEAR(act.deriv(z), fd1, 1e-8) << act.id() << " z=" << z;
      const double fd2 = (act.deriv(z + h) - act.deriv(z - h)) / (2 * h);
      EXPECT_NEAR(act.second_deriv(z), fd2, 1e-7) << act.id() << " z=" << z;
    }
  }
}

TEST(Activations, SelfGatedOddPartIsIdentity) {
  // φ(z) + φ(−z) = 1 makes σ(z) − σ(−z) = z.
  for (const auto& act : {Activation::silu(), Activation::gelu()}) {
    for (int i = -400; i <= 400; ++i) {
      const double z = i * 0.05;
      EXPECT_NEAR(act(z) - act(-z), z, 1e-12) << act.id() << " z=" << z;
    }
  }
}

TEST(Activations, SelfGatedMatchesDefinition) {
  const auto swish = Activation::swish(1.7);
  const auto gauss = Activation::self_gated(ndl::Gate::kNormalCdf, 2.5);
  for (int i = -100; i <= 100; ++i) {
    const double z = i * 0.13;
    EXPECT_NEAR(swish(z), z / (1.0 + std::exp(-1.7 * z)), 1e-14);
    // The alternating series loses digits beyond |x| ≈ 3.
    if (std::abs(z) < 1.6) EXPECT_NEAR(gauss(z), z * 0.5 * (1.0 + erf_series(2.5 * z / std::sqrt(2.0))), 1e-12);
  }
  EXPECT_DOUBLE_EQ(Activation::silu()(1.3), Activation::swish(1.0)(1.3));
}

TEST(Activations, PlateauLiteralFormula) {
  const auto p = Activation::plateau();
  for (double z : {-5.0, -1.0, 0.0, 1.0, 1.5, 1.99}) {
    EXPECT_EQ(p(z), 0.0);
    EXPECT_EQ(p.deriv(z), 0.0);
  }
  EXPECT_DOUBLE_EQ(p(3.5), 1.5);
  EXPECT_EQ(p.deriv(3.5), 1.0);
}

TEST(Activations, HermiteComboClosedForm) {
  const auto act = Activation::hermite_combo({0, 0, 1, 1});
  for (double z : {-2.0, -0.3, 0.7, 1.9}) {
    const double expected = (z * z - 1) / std::sqrt(2.0) + (z * z * z - 3 * z) / std::sqrt(6.0) + 1 / std::sqrt(2.0);
    EXPECT_NEAR(act(z), expected, 1e-13);
    EXPECT_NEAR(act.deriv(z), 2 * z / std::sqrt(2.0) + (3 * z * z - 3) / std::sqrt(6.0), 1e-13);
    EXPECT_NEAR(act.second_deriv(z), 2 / std::sqrt(2.0) + 6 * z / std::sqrt(6.0), 1e-13);
  }
}

TEST(Activations, ParseIds) {
  EXPECT_EQ(Activation::parse("relu").kind(), ndl::ActivationKind::kReLU);
  EXPECT_EQ(Activation::parse("swish:1.5").gate_sharpness(), 1.5);
  EXPECT_EQ(Activation::parse("sine:2").frequency(), 2.0);
  EXPECT_EQ(Activation::parse("hermite:0,0,1,1").hermite_coeffs().size(), 4u);
  EXPECT_EQ(Activation::parse("gated:normal:2").gate(), ndl::Gate::kNormalCdf);
  EXPECT_EQ(Activation::parse(Activation::swish(0.25).id()).gate_sharpness(), 0.25);
  EXPECT_THROW(Activation::parse("softplus"), ndl::ConfigError);
  EXPECT_THROW(Activation::parse("sine"), ndl::ConfigError);
  EXPECT_THROW(Activation::parse("sine:-1"), ndl::ConfigError);
  EXPECT_THROW(Activation::parse("relu:2"), ndl::ConfigError);
  EXPECT_THROW(Activation::parse("hermite:1,x"), ndl::ConfigError);
}

TEST(AssumptionProfile, ReluAndIdentity) {
  const auto relu = ndl::assumption_profile(Activation::relu(), 1.0, 1e-3);
  EXPECT_EQ(relu.gamma, 1.0);
  EXPECT_EQ(relu.zeta_sq, 0.0);
  EXPECT_TRUE(relu.increasing_on_pos);
  const auto id = ndl::assumption_profile(Activation::identity(), 1.0, 1e-3);
  EXPECT_EQ(id.gamma, 1.0);
  EXPECT_EQ(id.zeta_sq, 0.0);
}

// Frozen from the 30-digit extrema of σ' (min at −2.39936, max at +2.39936).
TEST(AssumptionProfile, Silu) {
  const auto prof = ndl::assumption_profile(Activation::silu(), 1.0, 1e-4);
  EXPECT_GT(prof.gamma, 0.0);
  EXPECT_NEAR(prof.gamma, 0.5, 1e-4);
  EXPECT_NEAR(prof.zeta_sq, 0.1098072100, 1e-8);
  EXPECT_TRUE(prof.increasing_on_pos);
}

TEST(Assumption2, SiluPasses) {
  const auto r = ndl::assumption2_check(Activation::silu(), 1e-4);
  EXPECT_TRUE(r.q_increasing);
  EXPECT_TRUE(r.p_increasing);
  EXPECT_TRUE(r.tails_ok);
  EXPECT_NEAR(r.z0, 1.2784645428, 2e-4);
  EXPECT_NEAR(r.lower_deriv_C, 0.5, 1e-12);
}

TEST(Assumption2, SineFailsQMonotonicity) {
  EXPECT_FALSE(ndl::assumption2_check(Activation::sine(3.0), 1e-3).q_increasing);
}

TEST(Assumption2, IdentityFlatP) {
  const auto r = ndl::assumption2_check(Activation::identity(), 1e-3);
  EXPECT_TRUE(r.q_increasing);
  EXPECT_TRUE(r.p_increasing);
}
