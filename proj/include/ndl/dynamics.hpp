// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <vector>

namespace ndl {

class Activation;
class CorrelationFunction;
struct QuadratureRule;

/// Fixed-step RK4 settings.
struct FlowConfig {
  double step = 1e-3;
  double horizon = 50.0;
  /// Stop once the risk drops below this or the state moves slower than it.
  double tolerance = 1e-10;
  bool stop_when_converged = true;
  /// Keep every n-th step (the first and last states are always kept).
  int record_every = 1;

  /// Throws ConfigError unless step > 0, horizon ≥ step, tolerance ≥ 0, record_every ≥ 1.
  void validate() const;
};

enum class TerminalReason { kHorizon, kConverged, kDiverged };

const char* to_string(TerminalReason reason);

/// Recorded flow: times, row-major states (dim per row) and risks.
struct Trajectory {
  int dim = 1;
  std::vector<double> times;
  std::vector<double> states;
  std::vector<double> risks;
  TerminalReason terminal_reason = TerminalReason::kHorizon;

  std::size_t size() const { return times.size(); }
  std::span<const double> state(std::size_t i) const {
    return {states.data() + i * static_cast<std::size_t>(dim), static_cast<std::size_t>(dim)};
  }
  double scalar(std::size_t i) const { return states[i * static_cast<std::size_t>(dim)]; }
  std::span<const double> terminal_state() const { return state(size() - 1); }
  double terminal_risk() const { return risks.back(); }

  /// Appends `next`, whose first row repeats this trajectory's last row.
  void extend(const Trajectory& next);
};

/// Writes the velocity at x into v and returns the risk at x.
using VectorField = std::function<double(std::span<const double> x, std::span<double> v)>;
/// Maps a completed step back onto a constraint set.
using Projection = std::function<void(std::span<double> x)>;

/// Generic RK4 driver behind every flow; `project` may be empty.
Trajectory integrate_flow(std::span<const double> x0, const VectorField& field, const Projection& project,
                          const FlowConfig& cfg);

/// β̇ = −r'_σ(β) from β₀; risks r_σ(β_t).
Trajectory flow_1d(const Activation& act, double beta0, const FlowConfig& cfg, const QuadratureRule& rule);

/// ȧ = f'(a)(1 − a²), clipped to |a| ≤ 1 − 1e-12; risks f(1) − f(a_t).
Trajectory flow_sphere_reduced(const CorrelationFunction& cf, double a0, const FlowConfig& cfg);

/// ẇ = (I − wwᵀ) f'(wᵀw*) w*, renormalized every step. Throws DomainError
/// unless both inputs are unit vectors within 1e-10.
Trajectory flow_sphere_full(const CorrelationFunction& cf, std::span<const double> w0,
                            std::span<const double> w_star, const FlowConfig& cfg);

/// Tensor Gauss-Hermite rule on N(0, I₂) with negligible nodes removed.
struct TensorRule {
  std::vector<double> x1;
  std::vector<double> x2;
  std::vector<double> weights;
  /// 1-D nodes and, per kept node, the index of its x₁ among them.
  std::vector<double> axis;
  std::vector<int> x1_index;
  int order = 0;

  std::size_t size() const { return weights.size(); }
};

/// Default per-axis order of the 2-D rule.
inline constexpr int kDefaultTensorOrder = 100;
/// Smallest per-axis order accepted by the population gradient.
inline constexpr int kMinTensorOrder = 64;

/// m×m product rule, dropping nodes whose weight is below `prune`.
TensorRule tensor_rule(int order, double prune = 1e-18);

/// Per-axis order for `act`: sine frequencies raise it like the 1-D rule.
int resolve_tensor_order(const Activation& act, int requested);

struct PopulationEval {
  std::vector<double> gradient;
  double risk;
};

/// ∇R(w) and R(w) for Gaussian inputs. With w = βw* + αu (u ⟂ w*), both are
/// 2-D expectations over (x₁, x₂) of (σ(βx₁ + αx₂) − σ(x₁)) times σ'(·)xᵢ
/// (gradient) or ½(·) (risk); the gradient is g₁w* + g₂u. Throws
/// ConfigError when rule.order < 64 and DimensionError on size mismatch.
PopulationEval population_eval(const Activation& act, std::span<const double> w, std::span<const double> w_star,
                               const TensorRule& rule);

std::vector<double> population_gradient(const Activation& act, std::span<const double> w,
                                        std::span<const double> w_star, const TensorRule& rule);

/// ẇ = −∇R(w) in R^d.
Trajectory flow_population_full(const Activation& act, std::span<const double> w0, std::span<const double> w_star,
                                const FlowConfig& cfg, const TensorRule& rule);

enum class CriticalKind { kMin, kMax, kSaddleCandidate };

const char* to_string(CriticalKind kind);

struct CriticalPoint {
  double a;
  CriticalKind kind;
};

/// Roots of f' in (−1, 1) by a sign scan refined by bisection to `tol`, plus
/// a = ±1. Kinds follow the sign of f'(a)(1 − a²) on both sides: inflow is a
/// risk minimum, outflow a maximum, same sign a saddle candidate.
std::vector<CriticalPoint> critical_points(const CorrelationFunction& cf, double tol, int scan_points = 4000);

}  // namespace ndl
