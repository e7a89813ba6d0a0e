// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <memory>
#include <span>
#include <vector>

namespace ndl {

class Activation;

/// Largest degree accepted by `hermite()` and by expansions.
inline constexpr int kMaxHermiteDegree = 128;

/// Orthonormal probabilists' Hermite polynomial h_k(z), E[h_j h_k] = δ_jk
/// under N(0,1). Throws RangeError for k outside [0, kMaxHermiteDegree].
double hermite(int k, double z);

/// Fills out[0..out.size()) with h_0(z) ... h_{out.size()-1}(z).
void hermite_all(double z, std::span<double> out);

/// Gauss-Hermite rule for E_{z~N(0,1)}: Σ w_i g(x_i) ≈ E[g(z)], weights sum
/// to 1. Nodes are ascending and mirror-symmetric with equal paired weights.
struct QuadratureRule {
  std::vector<double> nodes;
  std::vector<double> weights;

  int order() const { return static_cast<int>(nodes.size()); }

  /// Mirror pairs are summed first, so odd integrands cancel exactly.
  template <class F>
  double expect(F&& g) const {
    const std::size_t m = nodes.size();
    double sum = 0.0;
    for (std::size_t i = 0; i < m / 2; ++i) sum += weights[i] * (g(nodes[i]) + g(nodes[m - 1 - i]));
    if (m % 2 == 1) sum += weights[m / 2] * g(nodes[m / 2]);
    return sum;
  }
};

inline constexpr int kMinQuadratureOrder = 2;
inline constexpr int kMaxQuadratureOrder = 512;

/// Nodes from the eigenvalues of the Jacobi matrix, polished by Newton on
/// the three-term recurrence; weights are Christoffel numbers computed in
/// log space. Throws RangeError for m outside [2, 512].
QuadratureRule gauss_hermite(int m);

/// Shared, lazily built rule; safe for concurrent readers.
const QuadratureRule& cached_gauss_hermite(int m);

inline constexpr int kDefaultExpansionDegree = 40;
inline constexpr int kDefaultQuadratureOrder = 400;

/// Order actually used for `act`: Sine(d) with d ≥ 3 raises it to
/// 4⌈d²⌉ + 100 (capped at 512).
int resolve_order(const Activation& act, int requested);

/// Remainder Σ_{k>K} p_k z^k of a power series, lumped per parity into one
/// monomial m·|z|^q whose mass Σ p_k and slope Σ k p_k match the true tail.
/// Values and slopes at z = ±1 are therefore exact.
struct SeriesTail {
  double mass_even = 0.0;
  double mass_odd = 0.0;
  double power_even = 0.0;
  double power_odd = 0.0;

  double value(double z) const;
  double slope(double z) const;
  /// Slope contribution of the even-degree part only.
  double slope_even(double z) const;
};

/// Truncated expansion σ ≈ Σ_{k≤K} σ̂_k h_k.
class HermiteExpansion {
 public:
  HermiteExpansion(std::vector<double> coeffs, double l2_total, int quadrature_order,
                   SeriesTail tail = {});

  const std::vector<double>& coeffs() const { return coeffs_; }
  int degree() const { return static_cast<int>(coeffs_.size()) - 1; }
  /// Quadrature estimate of E[σ(z)²].
  double l2_total() const { return l2_total_; }
  /// l2_total − Σ σ̂_k².
  double residual() const { return residual_; }
  int quadrature_order() const { return order_; }
  /// residual / l2_total above 1e-3.
  bool truncation_warning() const;
  /// Tail of Σ σ̂_k² a^k beyond K.
  const SeriesTail& tail() const { return tail_; }

 private:
  std::vector<double> coeffs_;
  double l2_total_;
  double residual_;
  int order_;
  SeriesTail tail_;
};

/// σ̂_k = Σ w_i σ(x_i) h_k(x_i); the hinge kinds ReLU and Plateau, σ(z) = (z − t)_+,
/// use the exact coefficients instead. Throws ConfigError when rule.order() < 2K.
HermiteExpansion expand(const Activation& act, int degree, const QuadratureRule& rule);

/// Convenience: default degree, order resolved for the activation.
HermiteExpansion expand(const Activation& act, int degree = kDefaultExpansionDegree,
                        int order = kDefaultQuadratureOrder);

/// f(a) = Σ σ̂_i² a^i together with f' and the linear margin q_σ. Built from
/// an expansion, the terms beyond K come from its SeriesTail.
class CorrelationFunction {
 public:
  explicit CorrelationFunction(const HermiteExpansion& expansion);
  /// Directly from the power-series coefficients σ̂_i², no tail.
  explicit CorrelationFunction(std::vector<double> squared_coeffs, SeriesTail tail = {});

  const std::vector<double>& power_coeffs() const { return squared_; }
  const SeriesTail& tail() const { return tail_; }
  double f(double a) const;
  double f_prime(double a) const;
  double f_at_one() const { return f(1.0); }
  /// σ̂₁² − Σ_{i≥1} 2i σ̂_{2i}² δ^{2i−1}.
  double q_sigma(double delta) const;
  /// |a| > 1: the series is evaluated anyway but lies outside correlation range.
  static bool extrapolates(double a) { return a < -1.0 || a > 1.0; }

 private:
  std::vector<double> squared_;
  SeriesTail tail_;
};

/// σ̂_k(s) = E[σ(s z) h_k(z)].
double dilated_coeff(const Activation& act, double s, int k, const QuadratureRule& rule);
std::vector<double> dilated_coeffs(const Activation& act, double s, int degree,
                                   const QuadratureRule& rule);

/// H(z, s1, s2) = Σ_k σ̂_k(s1) σ̂_k(s2) z^k: K explicit terms plus the
/// SeriesTail of the remainder.
double H_eval(const Activation& act, double z, double s1, double s2, int degree,
              const QuadratureRule& rule);

}  // namespace ndl
