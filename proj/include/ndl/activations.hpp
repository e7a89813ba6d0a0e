// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace ndl {

enum class ActivationKind {
  kIdentity,
  kReLU,
  kSigmoid,
  kTanh,
  kSiLU,
  kSwish,
  kGELU,
  kSine,
  kPlateau,
  kHermiteCombo,
  kSelfGated,
};

/// Sigmoidal gate φ of a self-gated activation z·φ(βz).
enum class Gate {
  kLogistic,   // 1/(1+e^{-z})
  kNormalCdf,  // Φ(z)
};

struct ValueAndSlope {
  double value;
  double slope;
};

/// An immutable activation σ with closed-form σ' and σ''.
///
/// Values are normalized so that σ(0) = 0: the raw formula's value at the
/// origin is stored as `zero_shift()` and subtracted on every evaluation.
/// Kinks use an explicit derivative convention (ReLU: σ'(0)=1, Plateau:
/// right derivative at z=2).
///
/// String ids: identity, relu, sigmoid, tanh, silu, swish:<beta>, gelu,
/// sine:<freq>, plateau, hermite:<c0>,<c1>,..., gated:<logistic|normal>:<beta>.
class Activation {
 public:
  static Activation identity();
  static Activation relu();
  static Activation sigmoid();
  static Activation tanh();
  static Activation silu();
  static Activation swish(double beta);
  static Activation gelu();
  static Activation sine(double frequency);
  static Activation plateau();
  static Activation hermite_combo(std::vector<double> coeffs);
  static Activation self_gated(Gate gate, double beta);

  /// Throws ConfigError on an unknown or malformed id.
  static Activation parse(std::string_view id);

  ActivationKind kind() const { return kind_; }
  const std::string& id() const { return id_; }

  /// Normalized σ(z). Throws DomainError for non-finite z.
  double operator()(double z) const;
  double deriv(double z) const;
  /// Throws UnsupportedError for ReLU and Plateau.
  double second_deriv(double z) const;
  /// σ(z) and σ'(z) sharing one transcendental evaluation; no finiteness check.
  ValueAndSlope value_and_slope(double z) const;

  bool twice_differentiable() const;
  bool is_smooth() const { return twice_differentiable(); }

  double zero_shift() const { return zero_shift_; }
  double deriv_at_zero_convention() const { return deriv_at_zero_; }
  /// β of Swish / SelfGated, 1 for SiLU/GELU, 0 otherwise.
  double gate_sharpness() const { return sharpness_; }
  /// d of Sine, 0 otherwise.
  double frequency() const { return frequency_; }
  Gate gate() const { return gate_; }
  const std::vector<double>& hermite_coeffs() const { return coeffs_; }

 private:
  Activation(ActivationKind kind, std::string id);
  void finalize();
  double raw(double z) const;
  ValueAndSlope raw_value_and_slope(double z) const;

  ActivationKind kind_;
  std::string id_;
  Gate gate_ = Gate::kLogistic;
  double sharpness_ = 0.0;
  double frequency_ = 0.0;
  std::vector<double> coeffs_;
  double zero_shift_ = 0.0;
  double deriv_at_zero_ = 0.0;
};

struct AssumptionProfile {
  double gamma;            // inf of σ' over (0, α)
  double zeta_sq;          // max(0, -inf σ'(z1)σ'(z2)) over z1 ≥ 0, z2 ≤ 0
  bool increasing_on_pos;  // σ' ≥ 0 on the positive grid
};

/// Grid scan over [-20, 20] of the monotone-part constants.
AssumptionProfile assumption_profile(const Activation& act, double alpha, double grid_step);

struct Assumption2Result {
  double z0;             // σ' ≥ 0 on [z0, 20] and σ' ≤ 0 on [-20, -z0]
  bool q_increasing;     // q(z) = σ(z) − σ(−z) non-decreasing on z ≥ 0
  bool p_increasing;     // p(z) = σ(z) + σ(−z) non-decreasing on z ≥ 0
  double lower_deriv_C;  // inf σ' over [0, z0]
  bool tails_ok;         // both one-sided sign conditions found inside the grid
};

Assumption2Result assumption2_check(const Activation& act, double grid_step);

/// Half-width of the profile scans.
inline constexpr double kProfileGridBound = 20.0;

}  // namespace ndl
