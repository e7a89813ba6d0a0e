// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>
#include <vector>

namespace ndl {

class Activation;
class CorrelationFunction;
struct QuadratureRule;

/// r_σ(β) = ½ E[(σ(βz) − σ(z))²], the risk along the teacher direction.
double r_sigma(const Activation& act, double beta, const QuadratureRule& rule);

/// dr_σ/dβ = E[(σ(βz) − σ(z)) σ'(βz) z].
double r_sigma_prime(const Activation& act, double beta, const QuadratureRule& rule);

struct LocalMin {
  double beta;
  double r;
};

struct OneDimLandscape {
  std::string activation_id;
  std::vector<double> betas;
  std::vector<double> r;
  std::vector<double> r_prime;
  /// Interior minima, including the global one at β = 1 when it lies inside.
  std::vector<LocalMin> minima;

  /// Per grid row: true for the grid point nearest to a detected minimum.
  std::vector<bool> local_min_flags() const;
  /// Minima with r(β*) above 1e-12, optionally restricted to (lo, hi).
  std::vector<LocalMin> bad_minima(double lo = -1e300, double hi = 1e300) const;
};

/// Tabulates r and r' on `steps` equal intervals of [lo, hi]. Minima are sign
/// changes of r' from − to +, bisected to 1e-8 and kept when the second
/// difference of r confirms local convexity.
OneDimLandscape scan_1d(const Activation& act, double lo, double hi, int steps, const QuadratureRule& rule);

struct PopCondition {
  bool holds;
  double C;
};

/// C = min over β ∈ [0, 1 − 1e-3] of −r'(β)/(1 − β); holds when C > 0.
PopCondition check_pop_condition(const Activation& act, const QuadratureRule& rule, double grid_step = 1e-3);

/// f(1) − f(a) for |a| ≤ 1.
double sphere_risk(const CorrelationFunction& cf, double a);

/// ½H(1,1,1) + ½H(1,s,s) − H(a,s,1) for a student of norm s and cosine a.
double offsphere_risk(const Activation& act, double w_norm, double a, int degree, const QuadratureRule& rule);

/// Lower-bound constants for ⟨∇R(w), w − w*⟩ ≥ λ‖w − w*‖².
struct AssumptionBound {
  double alpha = 1.0;
  double beta_density = 0.0;
  double gamma = 0.0;
  double zeta = 0.0;
  double tau = 1.0;
  double delta = 0.0;

  /// sin³(δ/4) / (8√2).
  double c_delta() const;
  /// (γ² + ζ²) β α⁴ c_δ − τ ζ².
  double lambda() const;
};

double lambda_bound(const AssumptionBound& bound);

/// Minimum of the bivariate standard normal density over the disk of radius α.
double gaussian_density_floor(double alpha);

struct RegionCheck {
  double numeric_inf;
  double analytic_lb;
  /// α⁴ (δ − sin δ) / 8, the exact infimum over all unit u.
  double closed_form;
  bool holds;
};

/// inf_u ∫ 1{aᵀy>0} 1{bᵀy>0} 1{‖y‖≤α} (uᵀy)² dy over a grid of u_grid
/// directions, for unit a, b whose wedge {aᵀy>0, bᵀy>0} has opening angle
/// `gap` (a = b gives gap = π). Radial part exact, angular part by a
/// midpoint rule on angle_nodes points. Throws DomainError for gap outside
/// [1e-3, π] or α < 0, ConfigError for u_grid < 180 or angle_nodes < 10⁴.
RegionCheck region_integral_check(double alpha, double gap, int u_grid, int angle_nodes = 20000);

}  // namespace ndl
