// SPDX-License-Identifier: Apache-2.0
#include "ndl/hermite.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <string>

#include "ndl/activations.hpp"
#include "ndl/error.hpp"

namespace ndl {
namespace {

struct ScaledPair {
  double prev;       // h_{m-1}(x) · 2^{-scale}
  double last;       // h_m(x) · 2^{-scale}
  double log_scale;  // natural log of the dropped factor
};

// h_{m-1}(x), h_m(x) with periodic rescaling so that large |x| at high
// degree never overflows.
ScaledPair scaled_recurrence(int m, double x) {
  double prev = 0.0;
  double cur = 1.0;
  double log_scale = 0.0;
  for (int k = 0; k < m; ++k) {
    const double next = (x * cur - std::sqrt(static_cast<double>(k)) * prev) / std::sqrt(k + 1.0);
    prev = cur;
    cur = next;
    const double mag = std::abs(cur);
    if (mag > 1e150) {
      prev *= 1e-150;
      cur *= 1e-150;
      log_scale += 150.0 * std::log(10.0);
    }
  }
  return {prev, cur, log_scale};
}

}  // namespace

void hermite_all(double z, std::span<double> out) {
  if (out.empty()) return;
  out[0] = 1.0;
  if (out.size() == 1) return;
  out[1] = z;
  for (std::size_t k = 1; k + 1 < out.size(); ++k) {
    out[k + 1] = (z * out[k] - std::sqrt(static_cast<double>(k)) * out[k - 1]) / std::sqrt(k + 1.0);
  }
}

double hermite(int k, double z) {
  if (k < 0 || k > kMaxHermiteDegree) {
    throw RangeError("hermite degree " + std::to_string(k) + " outside [0, " +
                     std::to_string(kMaxHermiteDegree) + "]");
  }
  if (!std::isfinite(z)) throw DomainError("hermite argument is not finite");
  double prev = 0.0, cur = 1.0;
  for (int j = 0; j < k; ++j) {
    const double next = (z * cur - std::sqrt(static_cast<double>(j)) * prev) / std::sqrt(j + 1.0);
    prev = cur;
    cur = next;
  }
  return cur;
}

QuadratureRule gauss_hermite(int m) {
  if (m < kMinQuadratureOrder || m > kMaxQuadratureOrder) {
    throw RangeError("Gauss-Hermite order " + std::to_string(m) + " outside [" +
                     std::to_string(kMinQuadratureOrder) + ", " + std::to_string(kMaxQuadratureOrder) + "]");
  }
  // Jacobi matrix of the orthonormal recurrence x h_k = √(k+1) h_{k+1} + √k h_{k-1}.
  Eigen::VectorXd diag = Eigen::VectorXd::Zero(m);
  Eigen::VectorXd sub(m - 1);
  for (int k = 0; k < m - 1; ++k) sub[k] = std::sqrt(k + 1.0);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver;
  solver.computeFromTridiagonal(diag, sub, Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) throw Error("tridiagonal eigensolver failed");

  QuadratureRule rule;
  rule.nodes.resize(m);
  rule.weights.resize(m);
  std::vector<double> log_w(m);
  const double sqrt_m = std::sqrt(static_cast<double>(m));
  for (int i = 0; i < m; ++i) {
    double x = solver.eigenvalues()[i];
    for (int it = 0; it < 3; ++it) {
      const ScaledPair p = scaled_recurrence(m, x);
      if (p.prev == 0.0) break;
      x -= p.last / (sqrt_m * p.prev);
    }
    const ScaledPair p = scaled_recurrence(m, x);
    rule.nodes[i] = x;
    // Christoffel number 1 / (m h_{m-1}(x)^2).
    log_w[i] = -std::log(static_cast<double>(m)) - 2.0 * (std::log(std::abs(p.prev)) + p.log_scale);
  }
  for (int i = 0; i < m / 2; ++i) {
    const int j = m - 1 - i;
    const double x = 0.5 * (rule.nodes[j] - rule.nodes[i]);
    rule.nodes[i] = -x;
    rule.nodes[j] = x;
    const double lw = 0.5 * (log_w[i] + log_w[j]);
    log_w[i] = log_w[j] = lw;
  }
  if (m % 2 == 1) rule.nodes[m / 2] = 0.0;

  double total = 0.0;
  for (int i = 0; i < m; ++i) {
    rule.weights[i] = std::exp(log_w[i]);
    total += rule.weights[i];
  }
  for (double& w : rule.weights) w /= total;
  return rule;
}

const QuadratureRule& cached_gauss_hermite(int m) {
  static std::shared_mutex mutex;
  static std::map<int, std::unique_ptr<QuadratureRule>> cache;
  {
    std::shared_lock lock(mutex);
    if (auto it = cache.find(m); it != cache.end()) return *it->second;
  }
  auto rule = std::make_unique<QuadratureRule>(gauss_hermite(m));
  std::unique_lock lock(mutex);
  auto [it, inserted] = cache.try_emplace(m, std::move(rule));
  return *it->second;
}

int resolve_order(const Activation& act, int requested) {
  if (act.kind() == ActivationKind::kSine && act.frequency() >= 3.0) {
    const double d = act.frequency();
    const int needed = 4 * static_cast<int>(std::ceil(d * d)) + 100;
    return std::min(std::max(requested, needed), kMaxQuadratureOrder);
  }
  return requested;
}

namespace {

double signed_pow(double z, double q) { return std::pow(std::abs(z), q); }

}  // namespace

double SeriesTail::value(double z) const {
  const double sgn = z < 0.0 ? -1.0 : 1.0;
  const double even = mass_even == 0.0 ? 0.0 : mass_even * signed_pow(z, power_even);
  const double odd = mass_odd == 0.0 ? 0.0 : sgn * mass_odd * signed_pow(z, power_odd);
  return even + odd;
}

double SeriesTail::slope_even(double z) const {
  if (mass_even == 0.0) return 0.0;
  const double sgn = z < 0.0 ? -1.0 : 1.0;
  return sgn * mass_even * power_even * signed_pow(z, power_even - 1.0);
}

double SeriesTail::slope(double z) const {
  const double odd = mass_odd == 0.0 ? 0.0 : mass_odd * power_odd * signed_pow(z, power_odd - 1.0);
  return slope_even(z) + odd;
}

HermiteExpansion::HermiteExpansion(std::vector<double> coeffs, double l2_total, int quadrature_order,
                                   SeriesTail tail)
    : coeffs_(std::move(coeffs)), l2_total_(l2_total), order_(quadrature_order), tail_(tail) {
  double energy = 0.0;
  for (double c : coeffs_) energy += c * c;
  residual_ = l2_total_ - energy;
}

bool HermiteExpansion::truncation_warning() const {
  if (l2_total_ <= 0.0) return false;
  return residual_ / l2_total_ > 1e-3;
}

namespace {

void check_aliasing(int degree, const QuadratureRule& rule) {
  if (degree < 0 || degree > kMaxHermiteDegree) {
    throw RangeError("expansion degree " + std::to_string(degree) + " outside [0, " +
                     std::to_string(kMaxHermiteDegree) + "]");
  }
  if (rule.order() < 2 * degree) {
    throw ConfigError("quadrature order " + std::to_string(rule.order()) + " is below 2K = " +
                      std::to_string(2 * degree) + " (aliasing guard)");
  }
}

// Σ_i w_i g(x_i) h_k(x_i) for k = 0..K.
template <class G>
std::vector<double> project(G&& g, int degree, const QuadratureRule& rule) {
  std::vector<double> coeffs(degree + 1, 0.0);
  std::vector<double> h(degree + 1);
  for (int i = 0; i < rule.order(); ++i) {
    const double w = rule.weights[i];
    if (w == 0.0) continue;
    const double v = g(rule.nodes[i]);
    hermite_all(rule.nodes[i], h);
    for (int k = 0; k <= degree; ++k) coeffs[k] += w * v * h[k];
  }
  return coeffs;
}

// Parity-split second moments: mass = E[g1 g2], slope = E[g1' g2'].
// By the derivative identity E[g1' g2'] = Σ k a_k b_k, where even k feeds
// the odd part of g'.
struct PairEnergies {
  double mass[2] = {0.0, 0.0};
  double slope[2] = {0.0, 0.0};
};

template <class G1, class D1, class G2, class D2>
PairEnergies quadrature_energies(G1&& g1, D1&& d1, G2&& g2, D2&& d2, const QuadratureRule& rule) {
  PairEnergies e;
  const int m = rule.order();
  for (int i = 0; i < m / 2; ++i) {
    const double x = rule.nodes[m - 1 - i];
    const double w = 2.0 * rule.weights[i];
    const double p1 = g1(x), n1 = g1(-x), p2 = g2(x), n2 = g2(-x);
    const double dp1 = d1(x), dn1 = d1(-x), dp2 = d2(x), dn2 = d2(-x);
    e.mass[0] += w * 0.25 * (p1 + n1) * (p2 + n2);
    e.mass[1] += w * 0.25 * (p1 - n1) * (p2 - n2);
    e.slope[1] += w * 0.25 * (dp1 + dn1) * (dp2 + dn2);
    e.slope[0] += w * 0.25 * (dp1 - dn1) * (dp2 - dn2);
  }
  if (m % 2 == 1) {
    const double w = rule.weights[m / 2];
    e.mass[0] += w * g1(0.0) * g2(0.0);
    e.slope[1] += w * d1(0.0) * d2(0.0);
  }
  return e;
}

// σ(s z) = s (z − t)_+ with t = 0 for ReLU and t = 2/s for Plateau.
std::optional<double> hinge_threshold(const Activation& act, double s) {
  switch (act.kind()) {
    case ActivationKind::kReLU:
      return 0.0;
    case ActivationKind::kPlateau:
      return 2.0 / s;
    default:
      return std::nullopt;
  }
}

double normal_pdf(double t) { return std::exp(-0.5 * t * t) / std::sqrt(2.0 * M_PI); }
double normal_sf(double t) { return 0.5 * std::erfc(t / std::sqrt(2.0)); }

// E[(z−t)_+ h_k(z)] = φ(t) h_{k−2}(t) / √(k(k−1)) for k ≥ 2.
std::vector<double> hinge_coeffs(double s, double t, int degree) {
  std::vector<double> c(degree + 1, 0.0);
  c[0] = s * (normal_pdf(t) - t * normal_sf(t));
  if (degree >= 1) c[1] = s * normal_sf(t);
  if (degree >= 2) {
    std::vector<double> h(degree - 1);
    hermite_all(t, h);
    for (int k = 2; k <= degree; ++k) c[k] = s * normal_pdf(t) * h[k - 2] / std::sqrt(k * (k - 1.0));
  }
  return c;
}

// Thresholds are non-negative, so g(z) g(−z) vanishes and each energy splits
// evenly between the parities.
PairEnergies hinge_energies(double s1, double t1, double s2, double t2) {
  const double hi = std::max(t1, t2), lo = std::min(t1, t2);
  const double mass = s1 * s2 * ((1.0 + lo * hi) * normal_sf(hi) - lo * normal_pdf(hi));
  const double slope = s1 * s2 * normal_sf(hi);
  PairEnergies e;
  e.mass[0] = e.mass[1] = 0.5 * mass;
  e.slope[0] = e.slope[1] = 0.5 * slope;
  return e;
}

// Tail of Σ_k a_k b_k z^k beyond degree K = a.size() − 1.
SeriesTail tail_from(PairEnergies e, const std::vector<double>& a, const std::vector<double>& b) {
  const int degree = static_cast<int>(a.size()) - 1;
  // Remainders at rounding level of the total are cancellation noise.
  const double noise = 1e-14 * (std::abs(e.mass[0]) + std::abs(e.mass[1]));
  for (int k = 0; k <= degree; ++k) {
    e.mass[k % 2] -= a[k] * b[k];
    e.slope[k % 2] -= k * a[k] * b[k];
  }
  SeriesTail tail;
  double* masses[2] = {&tail.mass_even, &tail.mass_odd};
  double* powers[2] = {&tail.power_even, &tail.power_odd};
  for (int parity = 0; parity < 2; ++parity) {
    const int first = (degree + 1) % 2 == parity ? degree + 1 : degree + 2;
    if (std::abs(e.mass[parity]) <= noise) e.mass[parity] = 0.0;
    const double ratio = e.mass[parity] != 0.0 ? e.slope[parity] / e.mass[parity] : 0.0;
    *masses[parity] = e.mass[parity];
    *powers[parity] = std::isfinite(ratio) && ratio > first ? ratio : first;
  }
  return tail;
}

PairEnergies dilated_energies(const Activation& act, double s1, double s2, const QuadratureRule& rule) {
  const auto t1 = hinge_threshold(act, s1);
  if (t1) return hinge_energies(s1, *t1, s2, *hinge_threshold(act, s2));
  return quadrature_energies([&](double x) { return act(s1 * x); }, [&](double x) { return s1 * act.deriv(s1 * x); },
                             [&](double x) { return act(s2 * x); }, [&](double x) { return s2 * act.deriv(s2 * x); },
                             rule);
}

}  // namespace

HermiteExpansion expand(const Activation& act, int degree, const QuadratureRule& rule) {
  check_aliasing(degree, rule);
  auto coeffs = dilated_coeffs(act, 1.0, degree, rule);
  const PairEnergies e = dilated_energies(act, 1.0, 1.0, rule);
  const double l2 = e.mass[0] + e.mass[1];
  const SeriesTail tail = tail_from(e, coeffs, coeffs);
  return HermiteExpansion(std::move(coeffs), l2, rule.order(), tail);
}

HermiteExpansion expand(const Activation& act, int degree, int order) {
  return expand(act, degree, cached_gauss_hermite(resolve_order(act, order)));
}

CorrelationFunction::CorrelationFunction(const HermiteExpansion& expansion) : tail_(expansion.tail()) {
  squared_.reserve(expansion.coeffs().size());
  for (double c : expansion.coeffs()) squared_.push_back(c * c);
  // Trailing squares below 1e-30 are quadrature noise of exact zeros.
  while (squared_.size() > 1 && squared_.back() < 1e-30) squared_.pop_back();
}

CorrelationFunction::CorrelationFunction(std::vector<double> squared_coeffs, SeriesTail tail)
    : squared_(std::move(squared_coeffs)), tail_(tail) {
  if (squared_.empty()) throw ConfigError("correlation function needs at least one coefficient");
}

double CorrelationFunction::f(double a) const {
  double acc = 0.0;
  for (auto it = squared_.rbegin(); it != squared_.rend(); ++it) acc = acc * a + *it;
  return acc + tail_.value(a);
}

double CorrelationFunction::f_prime(double a) const {
  double acc = 0.0;
  for (std::size_t i = squared_.size(); i-- > 1;) acc = acc * a + static_cast<double>(i) * squared_[i];
  return acc + tail_.slope(a);
}

double CorrelationFunction::q_sigma(double delta) const {
  double value = squared_.size() > 1 ? squared_[1] : 0.0;
  for (std::size_t i = 2; i < squared_.size(); i += 2) {
    value -= static_cast<double>(i) * squared_[i] * std::pow(delta, static_cast<double>(i - 1));
  }
  return value - tail_.slope_even(delta);
}

std::vector<double> dilated_coeffs(const Activation& act, double s, int degree, const QuadratureRule& rule) {
  if (!(s > 0.0) || !std::isfinite(s)) throw DomainError("dilation must be positive and finite");
  check_aliasing(degree, rule);
  if (const auto t = hinge_threshold(act, s)) return hinge_coeffs(s, *t, degree);
  return project([&](double x) { return act(s * x); }, degree, rule);
}

double dilated_coeff(const Activation& act, double s, int k, const QuadratureRule& rule) {
  if (k < 0 || k > kMaxHermiteDegree) throw RangeError("coefficient index out of range");
  return dilated_coeffs(act, s, k, rule)[k];
}

double H_eval(const Activation& act, double z, double s1, double s2, int degree, const QuadratureRule& rule) {
  if (!(std::abs(z) <= 1.0)) throw DomainError("H is defined for |z| <= 1");
  // Operands ordered by dilation so that H(z,s1,s2) and H(z,s2,s1) agree bitwise.
  const double lo = std::min(s1, s2), hi = std::max(s1, s2);
  const auto c1 = dilated_coeffs(act, lo, degree, rule);
  const auto c2 = lo == hi ? c1 : dilated_coeffs(act, hi, degree, rule);
  double acc = 0.0;
  for (int k = degree; k >= 0; --k) acc = acc * z + c1[k] * c2[k];
  return acc + tail_from(dilated_energies(act, lo, hi, rule), c1, c2).value(z);
}

}  // namespace ndl
