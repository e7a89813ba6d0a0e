// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "ndl/activations.hpp"
#include "ndl/error.hpp"
#include "ndl/hermite.hpp"
#include "ndl/landscape.hpp"

using ndl::Activation;

namespace {

const ndl::QuadratureRule& rule200() { return ndl::cached_gauss_hermite(200); }
const ndl::QuadratureRule& rule400() { return ndl::cached_gauss_hermite(400); }

}  // namespace

// r(β) = ½(β−1)² E[relu(z)²] = (β−1)²/4 for β ≥ 0.
TEST(Landscape, ReluProfileClosedForm) {
  const auto relu = Activation::relu();
  EXPECT_NEAR(ndl::r_sigma(relu, 0.5, rule200()), 0.0625, 1e-12);
  double worst = 0.0;
  for (int i = 0; i <= 100; ++i) {
    const double beta = i * 0.01;
    worst = std::max(worst, std::abs(ndl::r_sigma(relu, beta, rule200()) - (beta - 1) * (beta - 1) / 4));
    EXPECT_NEAR(ndl::r_sigma_prime(relu, beta, rule200()), (beta - 1) / 2, 1e-10);
  }
  EXPECT_LE(worst, 1e-8);
}

TEST(Landscape, TeacherIsZeroRisk) {
  for (const auto& id : {"relu", "silu", "gelu", "sine:3", "plateau", "hermite:0,0,1,1"}) {
    EXPECT_EQ(ndl::r_sigma(Activation::parse(id), 1.0, rule400()), 0.0) << id;
    EXPECT_EQ(ndl::r_sigma_prime(Activation::parse(id), 1.0, rule400()), 0.0) << id;
  }
}

TEST(Landscape, DerivativeMatchesFiniteDifference) {
  const double h = 1e-5;
  for (const auto& id : {"silu", "gelu", "tanh", "sine:2", "swish:2"}) {
    const auto act = Activation::parse(id);
    for (double beta : {-0.4, 0.1, 0.55, 0.9, 1.3}) {
      const double fd = (ndl::r_sigma(act, beta + h, rule400()) - ndl::r_sigma(act, beta - h, rule400())) / (2 * h);
      EXPECT_NEAR(ndl::r_sigma_prime(act, beta, rule400()), fd, 1e-8) << id << " " << beta;
    }
  }
}

TEST(Landscape, SineMinimaGrowWithFrequency) {
  auto bad = [](const char* id) {
    return ndl::scan_1d(Activation::parse(id), 0.0, 1.0, 200, rule400()).bad_minima(0.0, 1.0).size();
  };
  EXPECT_EQ(bad("sine:1"), 0u);
  EXPECT_GE(bad("sine:2"), 1u);
  EXPECT_GE(bad("sine:4"), 1u);
}

TEST(Landscape, SiluMonotoneOnUnitInterval) {
  const auto land = ndl::scan_1d(Activation::silu(), 0.0, 1.5, 300, rule400());
  EXPECT_EQ(land.betas.size(), 301u);
  EXPECT_TRUE(land.bad_minima(0.0, 1.0).empty());
  for (std::size_t i = 0; i < land.betas.size(); ++i) {
    if (land.betas[i] > 0.0 && land.betas[i] < 1.0) EXPECT_LT(land.r_prime[i], 0.0) << land.betas[i];
  }
  // The global minimum at β = 1 is detected but is not bad.
  ASSERT_EQ(land.minima.size(), 1u);
  EXPECT_NEAR(land.minima[0].beta, 1.0, 1e-8);
  const auto flags = land.local_min_flags();
  EXPECT_TRUE(flags[200]);
}

TEST(Landscape, MonotoneActivationsDecreaseOnUnitInterval) {
  for (const auto& id : {"relu", "sigmoid", "tanh", "identity", "gelu", "silu"}) {
    const auto act = Activation::parse(id);
    for (int i = 0; i <= 100; ++i) EXPECT_LE(ndl::r_sigma_prime(act, i * 0.01, rule400()), 1e-15) << id;
  }
}

TEST(Landscape, PlateauIsFlatAtOrigin) {
  EXPECT_EQ(ndl::r_sigma_prime(Activation::plateau(), 0.0, rule400()), 0.0);
}

TEST(PopCondition, Examples) {
  const auto relu = ndl::check_pop_condition(Activation::relu(), rule400());
  EXPECT_TRUE(relu.holds);
  EXPECT_NEAR(relu.C, 0.5, 1e-6);
  const auto id = ndl::check_pop_condition(Activation::identity(), rule400());
  EXPECT_TRUE(id.holds);
  EXPECT_NEAR(id.C, 1.0, 1e-12);
  const auto plateau = ndl::check_pop_condition(Activation::plateau(), rule400());
  EXPECT_FALSE(plateau.holds);
  EXPECT_NEAR(plateau.C, 0.0, 1e-12);
}

TEST(PopCondition, HoldsWhenAssumption2Holds) {
  for (const auto& id : {"silu", "gelu", "swish:2"}) {
    const auto act = Activation::parse(id);
    const auto a2 = ndl::assumption2_check(act, 1e-3);
    ASSERT_TRUE(a2.q_increasing && a2.p_increasing && a2.tails_ok) << id;
    EXPECT_TRUE(ndl::check_pop_condition(act, rule400(), 1e-2).holds) << id;
  }
}

TEST(SphereRisk, Examples) {
  const ndl::CorrelationFunction id(ndl::expand(Activation::identity()));
  EXPECT_NEAR(ndl::sphere_risk(id, 0.0), 1.0, 1e-12);
  const ndl::CorrelationFunction ce(ndl::expand(Activation::hermite_combo({0, 0, 1, 1})));
  EXPECT_NEAR(ndl::sphere_risk(ce, -2.0 / 3.0), 50.0 / 27.0, 1e-10);
  EXPECT_NEAR(ndl::sphere_risk(ce, 1.0), 0.0, 1e-14);
  EXPECT_THROW(ndl::sphere_risk(ce, 1.5), ndl::DomainError);
}

// Monte-Carlo oracle: ½E[(σ(w·x) − σ(w*·x))²] for unit w, w* with cosine a,
// realised in the plane as (x1, a x1 + √(1−a²) x2).
TEST(SphereRisk, MatchesMonteCarlo) {
  std::mt19937_64 rng(2024);
  std::normal_distribution<double> normal;
  std::uniform_real_distribution<double> pick_a(-1.0, 1.0);
  const char* ids[] = {"relu", "silu", "gelu", "tanh", "sigmoid", "sine:1", "hermite:0,0,1,1", "swish:2", "plateau", "identity"};
  const int n = 1000000;
  for (const char* id : ids) {
    const auto act = Activation::parse(id);
    const ndl::CorrelationFunction cf(ndl::expand(act));
    const double a = pick_a(rng);
    const double b = std::sqrt(1 - a * a);
    double mean = 0.0, m2 = 0.0;
    for (int i = 1; i <= n; ++i) {
      const double x1 = normal(rng), x2 = normal(rng);
      const double diff = act(a * x1 + b * x2) - act(x1);
      const double v = 0.5 * diff * diff;
      const double delta = v - mean;
      mean += delta / i;
      m2 += delta * (v - mean);
    }
    const double se = std::sqrt(m2 / (n - 1) / n);
    EXPECT_NEAR(ndl::sphere_risk(cf, a), mean, 4 * se + 1e-12) << id << " a=" << a;
  }
}

TEST(OffsphereRisk, Examples) {
  for (const auto& id : {"relu", "silu", "gelu", "sine:2"}) {
    EXPECT_NEAR(ndl::offsphere_risk(Activation::parse(id), 1.0, 1.0, 60, rule400()), 0.0, 1e-8) << id;
  }
  for (double s : {0.3, 1.0, 2.2}) {
    for (double a : {-0.7, 0.0, 0.4}) {
      EXPECT_NEAR(ndl::offsphere_risk(Activation::identity(), s, a, 40, rule400()), (1 + s * s - 2 * s * a) / 2, 1e-12);
    }
  }
  EXPECT_NEAR(ndl::offsphere_risk(Activation::relu(), 1.0, 0.0, 40, rule400()), 0.5 - 1.0 / (2 * std::numbers::pi), 1e-10);
  EXPECT_NEAR(ndl::offsphere_risk(Activation::relu(), 1.0, 0.0, 40, rule400()), 0.3408, 1e-4);
}

TEST(OffsphereRisk, ReducesToSphereRisk) {
  for (const auto& id : {"relu", "silu", "gelu", "tanh", "sine:2", "hermite:0,0,1,1"}) {
    const auto act = Activation::parse(id);
    const ndl::CorrelationFunction cf(ndl::expand(act, 60, 400));
    for (double a : {-0.9, -0.2, 0.3, 0.8}) {
      EXPECT_NEAR(ndl::offsphere_risk(act, 1.0, a, 60, rule400()), ndl::sphere_risk(cf, a), 1e-6) << id << " " << a;
    }
  }
}

// Direct 2-D quadrature oracle of ½E[(σ(s(a x1 + b x2)) − σ(x1))²].
TEST(OffsphereRisk, MatchesTensorQuadrature) {
  const auto& r = ndl::cached_gauss_hermite(120);
  for (const auto& id : {"silu", "gelu", "tanh"}) {
    const auto act = Activation::parse(id);
    for (double s : {0.4, 1.7, 2.8}) {
      for (double a : {-0.6, 0.5, 0.95}) {
        const double b = std::sqrt(1 - a * a);
        double acc = 0.0;
        for (int i = 0; i < r.order(); ++i) {
          for (int j = 0; j < r.order(); ++j) {
            const double diff = act(s * (a * r.nodes[i] + b * r.nodes[j])) - act(r.nodes[i]);
            acc += r.weights[i] * r.weights[j] * 0.5 * diff * diff;
          }
        }
        EXPECT_NEAR(ndl::offsphere_risk(act, s, a, 128, rule400()), acc, 1e-8) << id << " s=" << s << " a=" << a;
      }
    }
  }
}

// ‖w−w*‖ < 1 with ‖w*‖ = 1 forces wᵀw* > ‖w‖²/2 ≥ 0.
TEST(Geometry, SmallDistanceImpliesAcuteAngle) {
  std::mt19937_64 rng(11);
  std::normal_distribution<double> normal;
  std::uniform_real_distribution<double> unif;
  const int d = 10;
  int exceptions = 0;
  for (int t = 0; t < 10000; ++t) {
    std::vector<double> ws(d), dir(d);
    double ns = 0.0, nd = 0.0;
    for (int k = 0; k < d; ++k) {
      ws[k] = normal(rng);
      dir[k] = normal(rng);
      ns += ws[k] * ws[k];
      nd += dir[k] * dir[k];
    }
    const double radius = std::pow(unif(rng), 1.0 / d) * 0.999999;
    double dot = 0.0, nw = 0.0;
    for (int k = 0; k < d; ++k) {
      ws[k] /= std::sqrt(ns);
      const double w = ws[k] + radius * dir[k] / std::sqrt(nd);
      dot += w * ws[k];
      nw += w * w;
    }
    if (!(std::acos(dot / std::sqrt(nw)) < std::numbers::pi / 2)) ++exceptions;
  }
  EXPECT_EQ(exceptions, 0);
}

TEST(AssumptionBound, Constants) {
  ndl::AssumptionBound b;
  b.delta = std::numbers::pi;
  EXPECT_NEAR(b.c_delta(), std::pow(std::sin(std::numbers::pi / 4), 3) / (8 * std::sqrt(2.0)), 1e-16);
  b.gamma = 0.5;
  b.zeta = 0.0;
  b.beta_density = ndl::gaussian_density_floor(1.0);
  EXPECT_NEAR(ndl::lambda_bound(b), 0.25 * std::exp(-0.5) / (2 * std::numbers::pi) * b.c_delta(), 1e-16);
  b.zeta = 0.3;
  EXPECT_LT(b.lambda(), 0.0);
}

namespace {

// Brute-force grid over [−α, α]² of 1{wedge}(uᵀy)² with u at angle ψ.
double brute_region(double alpha, double gap, double psi, int grid) {
  const double h = 2 * alpha / grid;
  const double ax = std::cos(0.5 * gap - 0.5 * std::numbers::pi), ay = std::sin(0.5 * gap - 0.5 * std::numbers::pi);
  const double bx = std::cos(0.5 * std::numbers::pi - 0.5 * gap), by = std::sin(0.5 * std::numbers::pi - 0.5 * gap);
  double acc = 0.0;
  for (int i = 0; i < grid; ++i) {
    for (int j = 0; j < grid; ++j) {
      const double x = -alpha + (i + 0.5) * h, y = -alpha + (j + 0.5) * h;
      if (x * x + y * y > alpha * alpha || ax * x + ay * y <= 0 || bx * x + by * y <= 0) continue;
      const double p = std::cos(psi) * x + std::sin(psi) * y;
      acc += p * p;
    }
  }
  return acc * h * h;
}

}  // namespace

TEST(RegionIntegral, HalfDiskWorstDirection) {
  const auto r = ndl::region_integral_check(1.0, std::numbers::pi, 180);
  EXPECT_NEAR(r.numeric_inf, std::numbers::pi / 8, 1e-8);
  EXPECT_NEAR(r.closed_form, std::numbers::pi / 8, 1e-15);
  // u parallel to the half-disk's flat edge is the worst direction.
  EXPECT_NEAR(brute_region(1.0, std::numbers::pi, std::numbers::pi / 2, 2000), std::numbers::pi / 8, 2e-3);
  EXPECT_TRUE(r.holds);
}

TEST(RegionIntegral, MatchesBruteForce) {
  for (double gap : {0.7, 1.6, 2.5}) {
    const auto r = ndl::region_integral_check(1.0, gap, 360);
    double brute = INFINITY;
    for (int j = 0; j < 36; ++j) brute = std::min(brute, brute_region(1.0, gap, std::numbers::pi * j / 36, 600));
    EXPECT_NEAR(r.numeric_inf, r.closed_form, 1e-6) << gap;
    EXPECT_NEAR(brute, r.numeric_inf, 5e-3) << gap;
  }
}

TEST(RegionIntegral, BoundHoldsAcrossGaps) {
  for (int i = 0; i < 10; ++i) {
    const double gap = 0.1 + i * (std::numbers::pi - 0.1) / 9;
    const auto r = ndl::region_integral_check(1.0, gap, 180);
    EXPECT_TRUE(r.holds) << gap;
    // Midpoint error is O(gap³/n²) ≈ 1e-9 at 2·10⁴ nodes.
    EXPECT_GE(r.numeric_inf, r.closed_form - 1e-8);
  }
  EXPECT_TRUE(ndl::region_integral_check(1.0, std::numbers::pi / 2, 180).holds);
  const auto zero = ndl::region_integral_check(0.0, 1.0, 180);
  EXPECT_EQ(zero.numeric_inf, 0.0);
  EXPECT_EQ(zero.analytic_lb, 0.0);
}

TEST(RegionIntegral, Preconditions) {
  EXPECT_THROW(ndl::region_integral_check(1.0, 0.0, 180), ndl::DomainError);
  EXPECT_THROW(ndl::region_integral_check(1.0, 4.0, 180), ndl::DomainError);
  EXPECT_THROW(ndl::region_integral_check(1.0, 1.0, 179), ndl::ConfigError);
}
