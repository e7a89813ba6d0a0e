// SPDX-License-Identifier: Apache-2.0
#include "ndl/landscape.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "ndl/activations.hpp"
#include "ndl/error.hpp"
#include "ndl/hermite.hpp"
#include "ndl/parallel.hpp"

namespace ndl {

double r_sigma(const Activation& act, double beta, const QuadratureRule& rule) {
  if (!std::isfinite(beta)) throw DomainError("beta is not finite");
  return 0.5 * rule.expect([&](double x) {
    const double diff = act(beta * x) - act(x);
    return diff * diff;
  });
}

double r_sigma_prime(const Activation& act, double beta, const QuadratureRule& rule) {
  if (!std::isfinite(beta)) throw DomainError("beta is not finite");
  return rule.expect([&](double x) { return (act(beta * x) - act(x)) * act.deriv(beta * x) * x; });
}

std::vector<bool> OneDimLandscape::local_min_flags() const {
  std::vector<bool> flags(betas.size(), false);
  for (const auto& m : minima) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < betas.size(); ++i) {
      if (std::abs(betas[i] - m.beta) < std::abs(betas[best] - m.beta)) best = i;
    }
    if (!betas.empty()) flags[best] = true;
  }
  return flags;
}

std::vector<LocalMin> OneDimLandscape::bad_minima(double lo, double hi) const {
  std::vector<LocalMin> out;
  for (const auto& m : minima) {
    if (m.r > 1e-12 && m.beta > lo && m.beta < hi) out.push_back(m);
  }
  return out;
}

OneDimLandscape scan_1d(const Activation& act, double lo, double hi, int steps, const QuadratureRule& rule) {
  if (!(lo < hi) || !std::isfinite(lo) || !std::isfinite(hi)) throw DomainError("scan interval must satisfy lo < hi");
  if (steps < 2) throw ConfigError("scan needs at least 2 steps");
  OneDimLandscape out;
  out.activation_id = act.id();
  const std::size_t n = static_cast<std::size_t>(steps) + 1;
  out.betas.resize(n);
  out.r.resize(n);
  out.r_prime.resize(n);
  for (std::size_t i = 0; i < n; ++i) out.betas[i] = lo + (hi - lo) * static_cast<double>(i) / steps;
  out.betas.back() = hi;
  parallel_for(n, [&](std::size_t i) {
    out.r[i] = r_sigma(act, out.betas[i], rule);
    out.r_prime[i] = r_sigma_prime(act, out.betas[i], rule);
  });

  auto convex_at = [&](double b) {
    const double h = std::min(1e-4, 0.5 * (hi - lo) / steps);
    return r_sigma(act, b - h, rule) - 2.0 * r_sigma(act, b, rule) + r_sigma(act, b + h, rule) >= -1e-14;
  };
  auto record = [&](double b) {
    if (convex_at(b)) out.minima.push_back({b, r_sigma(act, b, rule)});
  };
  const auto& d = out.r_prime;
  for (std::size_t i = 0; i + 1 < n; ++i) {
    if (d[i] < 0.0 && d[i + 1] > 0.0) {
      double a = out.betas[i], b = out.betas[i + 1];
      while (b - a > 1e-8) {
        const double mid = 0.5 * (a + b);
        (r_sigma_prime(act, mid, rule) < 0.0 ? a : b) = mid;
      }
      record(0.5 * (a + b));
    } else if (d[i] < 0.0 && d[i + 1] == 0.0 && i + 2 < n && d[i + 2] > 0.0) {
      record(out.betas[i + 1]);
    }
  }
  return out;
}

PopCondition check_pop_condition(const Activation& act, const QuadratureRule& rule, double grid_step) {
  if (!(grid_step > 0.0)) throw ConfigError("grid step must be positive");
  const double last = 1.0 - 1e-3;
  const std::size_t n = static_cast<std::size_t>(std::floor(last / grid_step + 1e-9)) + 1;
  std::vector<double> ratios(n + 1);
  parallel_for(n + 1, [&](std::size_t i) {
    const double beta = i < n ? static_cast<double>(i) * grid_step : last;
    ratios[i] = -r_sigma_prime(act, beta, rule) / (1.0 - beta);
  });
  const double C = *std::min_element(ratios.begin(), ratios.end());
  return {C > 0.0, C};
}

double sphere_risk(const CorrelationFunction& cf, double a) {
  if (!(std::abs(a) <= 1.0)) throw DomainError("sphere risk needs |a| <= 1");
  return std::max(0.0, cf.f(1.0) - cf.f(a));
}

double offsphere_risk(const Activation& act, double w_norm, double a, int degree, const QuadratureRule& rule) {
  if (!(w_norm > 0.0) || !std::isfinite(w_norm)) throw DomainError("student norm must be positive");
  if (!(std::abs(a) <= 1.0)) throw DomainError("off-sphere risk needs |a| <= 1");
  return 0.5 * H_eval(act, 1.0, 1.0, 1.0, degree, rule) + 0.5 * H_eval(act, 1.0, w_norm, w_norm, degree, rule) -
         H_eval(act, a, w_norm, 1.0, degree, rule);
}

double AssumptionBound::c_delta() const {
  const double s = std::sin(delta / 4.0);
  return s * s * s / (8.0 * std::numbers::sqrt2);
}

double AssumptionBound::lambda() const {
  const double a2 = alpha * alpha;
  return (gamma * gamma + zeta * zeta) * beta_density * a2 * a2 * c_delta() - tau * zeta * zeta;
}

double lambda_bound(const AssumptionBound& bound) { return bound.lambda(); }

double gaussian_density_floor(double alpha) { return std::exp(-0.5 * alpha * alpha) / (2.0 * std::numbers::pi); }

RegionCheck region_integral_check(double alpha, double gap, int u_grid, int angle_nodes) {
  if (!(alpha >= 0.0) || !std::isfinite(alpha)) throw DomainError("alpha must be non-negative");
  if (!(gap >= 1e-3 && gap <= std::numbers::pi)) {
    throw DomainError("angle gap must lie in [1e-3, pi]; a = -b is degenerate");
  }
  if (u_grid < 180) throw ConfigError("u_grid must be at least 180");
  if (angle_nodes < 10000) throw ConfigError("angular quadrature needs at least 1e4 nodes");

  // Polar coordinates: ∫₀^α r³ dr = α⁴/4 times ∫_wedge cos²(φ − ψ) dφ.
  const double radial = std::pow(alpha, 4) / 4.0;
  const double h = gap / angle_nodes;
  double inf = std::numeric_limits<double>::infinity();
  for (int j = 0; j < u_grid; ++j) {
    const double psi = std::numbers::pi * j / u_grid;
    double acc = 0.0;
    for (int i = 0; i < angle_nodes; ++i) {
      const double c = std::cos(-0.5 * gap + (i + 0.5) * h - psi);
      acc += c * c;
    }
    inf = std::min(inf, radial * acc * h);
  }
  RegionCheck out;
  out.numeric_inf = inf;
  out.analytic_lb = std::pow(alpha, 4) * std::pow(std::sin(gap / 4.0), 3) / (8.0 * std::numbers::sqrt2);
  out.closed_form = std::pow(alpha, 4) * (gap - std::sin(gap)) / 8.0;
  out.holds = out.numeric_inf >= out.analytic_lb - 1e-9;
  return out;
}

}  // namespace ndl
