// SPDX-License-Identifier: Apache-2.0
#include "ndl/activations.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "ndl/error.hpp"
#include "ndl/hermite.hpp"

namespace ndl {
namespace {

constexpr double kInvSqrt2 = 0.70710678118654752440;
constexpr double kInvSqrt2Pi = 0.39894228040143267794;

double logistic(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

double normal_cdf(double z) { return 0.5 * std::erfc(-z * kInvSqrt2); }
double normal_pdf(double z) { return kInvSqrt2Pi * std::exp(-0.5 * z * z); }

struct GateValues {
  double phi, dphi, ddphi;
};

GateValues gate_values(Gate gate, double u) {
  if (gate == Gate::kLogistic) {
    const double s = logistic(u);
    const double ds = s * (1.0 - s);
    return {s, ds, ds * (1.0 - 2.0 * s)};
  }
  const double p = normal_pdf(u);
  return {normal_cdf(u), p, -u * p};
}

double parse_number(std::string_view text, std::string_view id) {
  double value = 0.0;
  const auto* first = text.data();
  const auto* last = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || ptr != last || !std::isfinite(value)) {
    throw ConfigError("malformed number '" + std::string(text) + "' in activation id '" +
                      std::string(id) + "'");
  }
  return value;
}

std::string format_number(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

void require_positive(double v, const char* what) {
  if (!(v > 0.0) || !std::isfinite(v)) {
    throw ConfigError(std::string(what) + " must be a positive finite number");
  }
}

}  // namespace

Activation::Activation(ActivationKind kind, std::string id) : kind_(kind), id_(std::move(id)) {}

void Activation::finalize() {
  zero_shift_ = raw(0.0);
  deriv_at_zero_ = raw_value_and_slope(0.0).slope;
}

Activation Activation::identity() {
  Activation a(ActivationKind::kIdentity, "identity");
  a.finalize();
  return a;
}

Activation Activation::relu() {
  Activation a(ActivationKind::kReLU, "relu");
  a.finalize();
  return a;
}

Activation Activation::sigmoid() {
  Activation a(ActivationKind::kSigmoid, "sigmoid");
  a.finalize();
  return a;
}

Activation Activation::tanh() {
  Activation a(ActivationKind::kTanh, "tanh");
  a.finalize();
  return a;
}

Activation Activation::silu() {
  Activation a(ActivationKind::kSiLU, "silu");
  a.gate_ = Gate::kLogistic;
  a.sharpness_ = 1.0;
  a.finalize();
  return a;
}

Activation Activation::swish(double beta) {
  require_positive(beta, "swish gate sharpness");
  Activation a(ActivationKind::kSwish, "swish:" + format_number(beta));
  a.gate_ = Gate::kLogistic;
  a.sharpness_ = beta;
  a.finalize();
  return a;
}

Activation Activation::gelu() {
  Activation a(ActivationKind::kGELU, "gelu");
  a.gate_ = Gate::kNormalCdf;
  a.sharpness_ = 1.0;
  a.finalize();
  return a;
}

Activation Activation::sine(double frequency) {
  require_positive(frequency, "sine frequency");
  Activation a(ActivationKind::kSine, "sine:" + format_number(frequency));
  a.frequency_ = frequency;
  a.finalize();
  return a;
}

Activation Activation::plateau() {
  Activation a(ActivationKind::kPlateau, "plateau");
  a.finalize();
  return a;
}

Activation Activation::hermite_combo(std::vector<double> coeffs) {
  if (coeffs.empty()) throw ConfigError("hermite combination needs at least one coefficient");
  if (static_cast<int>(coeffs.size()) > kMaxHermiteDegree + 1) {
    throw ConfigError("hermite combination degree exceeds " + std::to_string(kMaxHermiteDegree));
  }
  std::string id = "hermite:";
  for (std::size_t k = 0; k < coeffs.size(); ++k) {
    if (!std::isfinite(coeffs[k])) throw ConfigError("hermite coefficient is not finite");
    if (k) id += ',';
    id += format_number(coeffs[k]);
  }
  Activation a(ActivationKind::kHermiteCombo, std::move(id));
  a.coeffs_ = std::move(coeffs);
  a.finalize();
  return a;
}

Activation Activation::self_gated(Gate gate, double beta) {
  require_positive(beta, "gate sharpness");
  const char* name = gate == Gate::kLogistic ? "logistic" : "normal";
  Activation a(ActivationKind::kSelfGated, std::string("gated:") + name + ":" + format_number(beta));
  a.gate_ = gate;
  a.sharpness_ = beta;
  a.finalize();
  return a;
}

Activation Activation::parse(std::string_view id) {
  const auto colon = id.find(':');
  const std::string_view head = id.substr(0, colon);
  const std::string_view rest = colon == std::string_view::npos ? std::string_view{} : id.substr(colon + 1);
  const bool has_arg = colon != std::string_view::npos;

  auto no_arg = [&](Activation (*make)()) {
    if (has_arg) throw ConfigError("activation '" + std::string(head) + "' takes no parameter");
    return make();
  };

  if (head == "identity" || head == "linear") return no_arg(&Activation::identity);
  if (head == "relu") return no_arg(&Activation::relu);
  if (head == "sigmoid") return no_arg(&Activation::sigmoid);
  if (head == "tanh") return no_arg(&Activation::tanh);
  if (head == "silu") return no_arg(&Activation::silu);
  if (head == "gelu") return no_arg(&Activation::gelu);
  if (head == "plateau") return no_arg(&Activation::plateau);
  if (head == "swish") return swish(has_arg ? parse_number(rest, id) : 1.0);
  if (head == "sine") {
    if (!has_arg) throw ConfigError("sine needs a frequency, e.g. sine:2");
    return sine(parse_number(rest, id));
  }
  if (head == "hermite") {
    if (!has_arg || rest.empty()) throw ConfigError("hermite needs coefficients, e.g. hermite:0,0,1,1");
    std::vector<double> coeffs;
    std::size_t start = 0;
    while (start <= rest.size()) {
      const auto comma = rest.find(',', start);
      const auto piece = rest.substr(start, comma == std::string_view::npos ? rest.size() - start : comma - start);
      coeffs.push_back(parse_number(piece, id));
      if (comma == std::string_view::npos) break;
      start = comma + 1;
    }
    return hermite_combo(std::move(coeffs));
  }
  if (head == "gated") {
    const auto second = rest.find(':');
    if (!has_arg || second == std::string_view::npos) {
      throw ConfigError("gated needs a gate and sharpness, e.g. gated:logistic:2");
    }
    const auto gate_name = rest.substr(0, second);
    Gate gate;
    if (gate_name == "logistic" || gate_name == "sigmoid") {
      gate = Gate::kLogistic;
    } else if (gate_name == "normal" || gate_name == "gauss") {
      gate = Gate::kNormalCdf;
    } else {
      throw ConfigError("unknown gate '" + std::string(gate_name) + "'");
    }
    return self_gated(gate, parse_number(rest.substr(second + 1), id));
  }
  throw ConfigError("unknown activation id '" + std::string(id) + "'");
}

bool Activation::twice_differentiable() const {
  return kind_ != ActivationKind::kReLU && kind_ != ActivationKind::kPlateau;
}

double Activation::raw(double z) const { return raw_value_and_slope(z).value; }

ValueAndSlope Activation::raw_value_and_slope(double z) const {
  switch (kind_) {
    case ActivationKind::kIdentity:
      return {z, 1.0};
    case ActivationKind::kReLU:
      return z > 0.0 ? ValueAndSlope{z, 1.0} : ValueAndSlope{0.0, z == 0.0 ? 1.0 : 0.0};
    case ActivationKind::kSigmoid: {
      const double s = logistic(z);
      return {s, s * (1.0 - s)};
    }
    case ActivationKind::kTanh: {
      const double t = std::tanh(z);
      return {t, 1.0 - t * t};
    }
    case ActivationKind::kSiLU:
    case ActivationKind::kSwish:
    case ActivationKind::kGELU:
    case ActivationKind::kSelfGated: {
      const double u = sharpness_ * z;
      const GateValues g = gate_values(gate_, u);
      return {z * g.phi, g.phi + u * g.dphi};
    }
    case ActivationKind::kSine:
      return {std::sin(frequency_ * z), frequency_ * std::cos(frequency_ * z)};
    case ActivationKind::kPlateau: {
      // max(1, max(z − 1, 0)); right derivative at the kink z = 2.
      const double v = std::max(1.0, std::max(z - 1.0, 0.0));
      return {v, z >= 2.0 ? 1.0 : 0.0};
    }
    case ActivationKind::kHermiteCombo: {
      const int n = static_cast<int>(coeffs_.size());
      double h_prev = 0.0, h = 1.0, value = 0.0, slope = 0.0;
      for (int k = 0; k < n; ++k) {
        // h_k' = √k h_{k−1}
        value += coeffs_[k] * h;
        slope += coeffs_[k] * std::sqrt(static_cast<double>(k)) * h_prev;
        const double next = (z * h - std::sqrt(static_cast<double>(k)) * h_prev) / std::sqrt(k + 1.0);
        h_prev = h;
        h = next;
      }
      return {value, slope};
    }
  }
  return {0.0, 0.0};
}

double Activation::operator()(double z) const {
  if (!std::isfinite(z)) throw DomainError("activation argument is not finite");
  return raw(z) - zero_shift_;
}

double Activation::deriv(double z) const {
  if (!std::isfinite(z)) throw DomainError("activation argument is not finite");
  return raw_value_and_slope(z).slope;
}

ValueAndSlope Activation::value_and_slope(double z) const {
  ValueAndSlope v = raw_value_and_slope(z);
  v.value -= zero_shift_;
  return v;
}

double Activation::second_deriv(double z) const {
  if (!twice_differentiable()) {
    throw UnsupportedError("second derivative is not defined for activation '" + id_ + "'");
  }
  if (!std::isfinite(z)) throw DomainError("activation argument is not finite");
  switch (kind_) {
    case ActivationKind::kIdentity:
      return 0.0;
    case ActivationKind::kSigmoid: {
      const double s = logistic(z);
      return s * (1.0 - s) * (1.0 - 2.0 * s);
    }
    case ActivationKind::kTanh: {
      const double t = std::tanh(z);
      return -2.0 * t * (1.0 - t * t);
    }
    case ActivationKind::kSiLU:
    case ActivationKind::kSwish:
    case ActivationKind::kGELU:
    case ActivationKind::kSelfGated: {
      const double b = sharpness_;
      const GateValues g = gate_values(gate_, b * z);
      return 2.0 * b * g.dphi + b * b * z * g.ddphi;
    }
    case ActivationKind::kSine:
      return -frequency_ * frequency_ * std::sin(frequency_ * z);
    case ActivationKind::kHermiteCombo: {
      // h_k'' = √(k(k−1)) h_{k−2}
      const int n = static_cast<int>(coeffs_.size());
      if (n < 3) return 0.0;
      std::vector<double> h(n);
      hermite_all(z, h);
      double acc = 0.0;
      for (int k = 2; k < n; ++k) acc += coeffs_[k] * std::sqrt(static_cast<double>(k) * (k - 1)) * h[k - 2];
      return acc;
    }
    default:
      break;
  }
  return 0.0;
}

AssumptionProfile assumption_profile(const Activation& act, double alpha, double grid_step) {
  if (!(alpha > 0.0)) throw ConfigError("alpha must be positive");
  if (!(grid_step > 0.0)) throw ConfigError("grid_step must be positive");

  const auto steps = static_cast<long>(std::ceil(kProfileGridBound / grid_step));
  double gamma = std::numeric_limits<double>::infinity();
  double pos_min = std::numeric_limits<double>::infinity();
  double pos_max = -std::numeric_limits<double>::infinity();
  double neg_min = pos_min;
  double neg_max = pos_max;
  bool increasing = true;

  for (long i = 0; i <= steps; ++i) {
    const double z = std::min(i * grid_step, kProfileGridBound);
    const double dp = act.deriv(z);
    const double dn = act.deriv(-z);
    pos_min = std::min(pos_min, dp);
    pos_max = std::max(pos_max, dp);
    neg_min = std::min(neg_min, dn);
    neg_max = std::max(neg_max, dn);
    if (i > 0 && dp < 0.0) increasing = false;
    if (z > 0.0 && z < alpha) gamma = std::min(gamma, dp);
  }
  // (0, α) may fall between grid points; fall back to the midpoint.
  if (!std::isfinite(gamma)) gamma = act.deriv(0.5 * std::min(alpha, grid_step));

  const double inf_product = std::min({pos_min * neg_min, pos_min * neg_max, pos_max * neg_min, pos_max * neg_max});
  return {gamma, std::max(0.0, -inf_product), increasing};
}

Assumption2Result assumption2_check(const Activation& act, double grid_step) {
  if (!(grid_step > 0.0)) throw ConfigError("grid_step must be positive");
  const auto steps = static_cast<long>(std::ceil(kProfileGridBound / grid_step));
  auto at = [&](long i) { return std::min(i * grid_step, kProfileGridBound); };

  // Smallest grid index from which the sign condition holds up to the grid edge.
  long pos_from = steps + 1;
  for (long i = steps; i >= 0 && act.deriv(at(i)) >= 0.0; --i) pos_from = i;
  long neg_from = steps + 1;
  for (long i = steps; i >= 1 && act.deriv(-at(i)) <= 0.0; --i) neg_from = i;
  // σ'(0) itself belongs to both sides only when it is zero.
  if (neg_from == 1 && act.deriv(0.0) <= 0.0) neg_from = 0;

  const bool tails_ok = pos_from <= steps && neg_from <= steps;
  const long z0_index = std::min(std::max(pos_from, neg_from), steps);
  const double z0 = at(z0_index);

  constexpr double kSlack = 1e-12;
  bool q_inc = true;
  bool p_inc = true;
  double q_prev = 0.0, p_prev = 0.0;
  double lower = std::numeric_limits<double>::infinity();
  for (long i = 0; i <= steps; ++i) {
    const double z = at(i);
    const double sp = act(z);
    const double sn = act(-z);
    const double q = sp - sn;
    const double p = sp + sn;
    if (i > 0) {
      if (q < q_prev - kSlack) q_inc = false;
      if (p < p_prev - kSlack) p_inc = false;
    }
    q_prev = q;
    p_prev = p;
    if (i <= z0_index) lower = std::min(lower, act.deriv(z));
  }
  return {z0, q_inc, p_inc, lower, tails_ok};
}

}  // namespace ndl
