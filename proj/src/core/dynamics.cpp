// SPDX-License-Identifier: Apache-2.0
#include "ndl/dynamics.hpp"

#include <Eigen/Core>
#include <algorithm>
#include <cmath>
#include <string>

#include "ndl/activations.hpp"
#include "ndl/error.hpp"
#include "ndl/hermite.hpp"

namespace ndl {

void FlowConfig::validate() const {
  if (!(step > 0.0) || !std::isfinite(step)) throw ConfigError("flow step must be positive");
  if (!(horizon >= step) || !std::isfinite(horizon)) throw ConfigError("flow horizon must be at least one step");
  if (!(tolerance >= 0.0)) throw ConfigError("flow tolerance must be non-negative");
  if (record_every < 1) throw ConfigError("record_every must be at least 1");
}

const char* to_string(TerminalReason reason) {
  switch (reason) {
    case TerminalReason::kHorizon:
      return "horizon";
    case TerminalReason::kConverged:
      return "converged";
    case TerminalReason::kDiverged:
      return "diverged";
  }
  return "unknown";
}

const char* to_string(CriticalKind kind) {
  switch (kind) {
    case CriticalKind::kMin:
      return "min";
    case CriticalKind::kMax:
      return "max";
    case CriticalKind::kSaddleCandidate:
      return "saddle-candidate";
  }
  return "unknown";
}

void Trajectory::extend(const Trajectory& next) {
  if (next.dim != dim) throw DimensionError("cannot join trajectories of different dimension");
  if (next.size() == 0) return;
  const double offset = times.empty() ? 0.0 : times.back() - next.times.front();
  const std::size_t skip = times.empty() ? 0 : 1;
  for (std::size_t i = skip; i < next.size(); ++i) {
    times.push_back(next.times[i] + offset);
    risks.push_back(next.risks[i]);
    const auto row = next.state(i);
    states.insert(states.end(), row.begin(), row.end());
  }
  terminal_reason = next.terminal_reason;
}

namespace {

using Vec = Eigen::VectorXd;

// Fixed-step RK4. `field(x, v)` writes the velocity and returns the risk at
// x; `project(x)` maps a completed step back onto the constraint set.
template <class Field, class Project>
Trajectory integrate(Vec x, Field&& field, Project&& project, const FlowConfig& cfg) {
  cfg.validate();
  Trajectory tr;
  tr.dim = static_cast<int>(x.size());
  auto record = [&](double t, const Vec& state, double risk) {
    tr.times.push_back(t);
    tr.states.insert(tr.states.end(), state.data(), state.data() + state.size());
    tr.risks.push_back(risk);
  };
  auto bad = [](const Vec& v, double r) { return !v.allFinite() || !std::isfinite(r) || v.norm() > 1e150; };

  Vec k1(x.size()), k2(x.size()), k3(x.size()), k4(x.size()), stage(x.size());
  double risk = field(x, k1);
  record(0.0, x, risk);
  if (bad(x, risk) || !k1.allFinite()) {
    tr.terminal_reason = TerminalReason::kDiverged;
    return tr;
  }
  const long steps = static_cast<long>(std::ceil(cfg.horizon / cfg.step - 1e-9));
  for (long n = 0; n < steps; ++n) {
    const double t0 = static_cast<double>(n) * cfg.step;
    const bool last = n + 1 == steps;
    const double t1 = last ? cfg.horizon : static_cast<double>(n + 1) * cfg.step;
    const double h = t1 - t0;
    stage = x + 0.5 * h * k1;
    field(stage, k2);
    stage = x + 0.5 * h * k2;
    field(stage, k3);
    stage = x + h * k3;
    field(stage, k4);
    stage = x + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    project(stage);
    const double moved = (stage - x).norm() / h;
    x = stage;
    risk = field(x, k1);
    if (bad(x, risk) || !k1.allFinite()) {
      record(t1, x, risk);
      tr.terminal_reason = TerminalReason::kDiverged;
      return tr;
    }
    const bool converged = cfg.stop_when_converged && (risk < cfg.tolerance || moved < cfg.tolerance);
    if (converged || last || (n + 1) % cfg.record_every == 0) record(t1, x, risk);
    if (converged) {
      tr.terminal_reason = TerminalReason::kConverged;
      return tr;
    }
  }
  tr.terminal_reason = TerminalReason::kHorizon;
  return tr;
}

void no_projection(Vec&) {}

double clamp_unit(double a) { return std::clamp(a, -1.0, 1.0); }

void require_unit(std::span<const double> v, const char* what) {
  double n2 = 0.0;
  for (double x : v) n2 += x * x;
  if (!(std::abs(std::sqrt(n2) - 1.0) <= 1e-10)) throw DomainError(std::string(what) + " must be a unit vector");
}

Vec to_vec(std::span<const double> v) { return Eigen::Map<const Vec>(v.data(), static_cast<Eigen::Index>(v.size())); }

}  // namespace

Trajectory integrate_flow(std::span<const double> x0, const VectorField& field, const Projection& project,
                          const FlowConfig& cfg) {
  if (x0.empty()) throw DimensionError("flow state must be non-empty");
  if (!field) throw ConfigError("flow needs a vector field");
  auto wrapped = [&](const Vec& x, Vec& v) {
    return field({x.data(), static_cast<std::size_t>(x.size())}, {v.data(), static_cast<std::size_t>(v.size())});
  };
  auto proj = [&](Vec& x) {
    if (project) project({x.data(), static_cast<std::size_t>(x.size())});
  };
  return integrate(to_vec(x0), wrapped, proj, cfg);
}

Trajectory flow_1d(const Activation& act, double beta0, const FlowConfig& cfg, const QuadratureRule& rule) {
  if (!std::isfinite(beta0)) throw DomainError("beta0 is not finite");
  std::vector<double> teacher(rule.order());
  for (int i = 0; i < rule.order(); ++i) teacher[i] = act(rule.nodes[i]);
  auto field = [&](const Vec& x, Vec& v) {
    const double beta = x[0];
    double risk = 0.0, slope = 0.0;
    for (int i = 0; i < rule.order(); ++i) {
      const double z = rule.nodes[i];
      const ValueAndSlope s = act.value_and_slope(beta * z);
      const double diff = s.value - teacher[i];
      risk += rule.weights[i] * diff * diff;
      slope += rule.weights[i] * diff * s.slope * z;
    }
    v[0] = -slope;
    return 0.5 * risk;
  };
  return integrate(Vec::Constant(1, beta0), field, no_projection, cfg);
}

Trajectory flow_sphere_reduced(const CorrelationFunction& cf, double a0, const FlowConfig& cfg) {
  if (!(std::abs(a0) <= 1.0)) throw DomainError("a0 must satisfy |a0| <= 1");
  const double f1 = cf.f(1.0);
  auto field = [&](const Vec& x, Vec& v) {
    const double a = clamp_unit(x[0]);
    v[0] = cf.f_prime(a) * (1.0 - a * a);
    return std::max(0.0, f1 - cf.f(a));
  };
  auto clip = [](Vec& x) {
    constexpr double kEdge = 1.0 - 1e-12;
    if (std::abs(x[0]) > kEdge) x[0] = std::copysign(kEdge, x[0]);
  };
  return integrate(Vec::Constant(1, a0), field, clip, cfg);
}

Trajectory flow_sphere_full(const CorrelationFunction& cf, std::span<const double> w0, std::span<const double> w_star,
                            const FlowConfig& cfg) {
  if (w0.size() != w_star.size() || w0.empty()) throw DimensionError("w0 and w_star must share a dimension");
  require_unit(w0, "w0");
  require_unit(w_star, "w_star");
  const Vec ws = to_vec(w_star);
  const double f1 = cf.f(1.0);
  auto field = [&](const Vec& x, Vec& v) {
    const double a = clamp_unit(x.dot(ws));
    v = cf.f_prime(a) * (ws - x.dot(ws) * x);
    return std::max(0.0, f1 - cf.f(a));
  };
  auto renormalize = [](Vec& x) { x /= x.norm(); };
  return integrate(to_vec(w0), field, renormalize, cfg);
}

TensorRule tensor_rule(int order, double prune) {
  const QuadratureRule& base = cached_gauss_hermite(order);
  TensorRule out;
  out.order = order;
  out.axis = base.nodes;
  for (int i = 0; i < order; ++i) {
    for (int j = 0; j < order; ++j) {
      const double w = base.weights[i] * base.weights[j];
      if (w < prune) continue;
      out.x1.push_back(base.nodes[i]);
      out.x2.push_back(base.nodes[j]);
      out.weights.push_back(w);
      out.x1_index.push_back(i);
    }
  }
  return out;
}

int resolve_tensor_order(const Activation& act, int requested) { return resolve_order(act, requested); }

PopulationEval population_eval(const Activation& act, std::span<const double> w, std::span<const double> w_star,
                               const TensorRule& rule) {
  if (rule.order < kMinTensorOrder) {
    throw ConfigError("2-D quadrature needs at least " + std::to_string(kMinTensorOrder) + " nodes per axis");
  }
  if (w.size() != w_star.size() || w.empty()) throw DimensionError("w and w_star must share a dimension");
  const std::size_t d = w.size();
  double beta = 0.0;
  for (std::size_t k = 0; k < d; ++k) beta += w[k] * w_star[k];
  std::vector<double> perp(d);
  double alpha2 = 0.0;
  for (std::size_t k = 0; k < d; ++k) {
    perp[k] = w[k] - beta * w_star[k];
    alpha2 += perp[k] * perp[k];
  }
  const double alpha = std::sqrt(alpha2);

  thread_local std::vector<double> teacher;
  teacher.resize(rule.axis.size());
  for (std::size_t i = 0; i < rule.axis.size(); ++i) teacher[i] = act(rule.axis[i]);

  double risk = 0.0, g1 = 0.0, g2 = 0.0;
  for (std::size_t n = 0; n < rule.size(); ++n) {
    const double x1 = rule.x1[n], x2 = rule.x2[n];
    const ValueAndSlope s = act.value_and_slope(beta * x1 + alpha * x2);
    const double diff = s.value - teacher[rule.x1_index[n]];
    const double wd = rule.weights[n] * diff;
    risk += wd * diff;
    g1 += wd * s.slope * x1;
    g2 += wd * s.slope * x2;
  }
  PopulationEval out;
  out.risk = 0.5 * risk;
  out.gradient.resize(d);
  const double scale = alpha > 0.0 ? g2 / alpha : 0.0;
  for (std::size_t k = 0; k < d; ++k) out.gradient[k] = g1 * w_star[k] + scale * perp[k];
  return out;
}

std::vector<double> population_gradient(const Activation& act, std::span<const double> w,
                                        std::span<const double> w_star, const TensorRule& rule) {
  return population_eval(act, w, w_star, rule).gradient;
}

Trajectory flow_population_full(const Activation& act, std::span<const double> w0, std::span<const double> w_star,
                                const FlowConfig& cfg, const TensorRule& rule) {
  if (w0.size() != w_star.size() || w0.empty()) throw DimensionError("w0 and w_star must share a dimension");
  auto field = [&](const Vec& x, Vec& v) {
    const PopulationEval e = population_eval(act, {x.data(), static_cast<std::size_t>(x.size())}, w_star, rule);
    for (Eigen::Index k = 0; k < x.size(); ++k) v[k] = -e.gradient[static_cast<std::size_t>(k)];
    return e.risk;
  };
  return integrate(to_vec(w0), field, no_projection, cfg);
}

std::vector<CriticalPoint> critical_points(const CorrelationFunction& cf, double tol, int scan_points) {
  if (!(tol > 0.0)) throw ConfigError("critical point tolerance must be positive");
  if (scan_points < 4) throw ConfigError("critical point scan needs at least 4 points");
  auto field = [&](double a) { return cf.f_prime(a) * (1.0 - a * a); };
  auto sign = [](double v) { return (v > 0.0) - (v < 0.0); };
  const double probe = std::max(tol, 1e-6);
  auto classify = [&](int left, int right) {
    if (left > 0 && right < 0) return CriticalKind::kMin;
    if (left < 0 && right > 0) return CriticalKind::kMax;
    return CriticalKind::kSaddleCandidate;
  };

  std::vector<CriticalPoint> out;
  // a = −1: inflow from the right means the flow settles there.
  out.push_back({-1.0, sign(field(-1.0 + probe)) < 0 ? CriticalKind::kMin : CriticalKind::kMax});

  std::vector<double> grid(scan_points + 1);
  std::vector<double> fp(scan_points + 1);
  for (int i = 0; i <= scan_points; ++i) {
    grid[i] = -1.0 + 2.0 * i / scan_points;
    fp[i] = cf.f_prime(grid[i]);
  }
  for (int i = 1; i < scan_points; ++i) {
    const int s0 = sign(fp[i]);
    if (s0 == 0) {
      out.push_back({grid[i], classify(sign(field(grid[i] - probe)), sign(field(grid[i] + probe)))});
      continue;
    }
    const int s1 = sign(fp[i + 1]);
    if (i + 1 < scan_points && s1 != 0 && s1 != s0) {
      double lo = grid[i], hi = grid[i + 1];
      while (hi - lo > tol) {
        const double mid = 0.5 * (lo + hi);
        (sign(cf.f_prime(mid)) == s0 ? lo : hi) = mid;
      }
      const double root = 0.5 * (lo + hi);
      const double gap = std::max(probe, hi - lo);
      out.push_back({root, classify(sign(field(root - gap)), sign(field(root + gap)))});
    }
  }
  out.push_back({1.0, sign(field(1.0 - probe)) > 0 ? CriticalKind::kMin : CriticalKind::kMax});
  return out;
}

}  // namespace ndl
