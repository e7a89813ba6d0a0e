// SPDX-License-Identifier: Apache-2.0
#include "ndl/experiments.hpp"

#include <algorithm>
#include <boost/math/special_functions/beta.hpp>
#include <cmath>
#include <cstdio>
#include <limits>
#include <json.hpp>
#include <numbers>
#include <optional>

#include "ndl/error.hpp"
#include "ndl/hermite.hpp"
#include "ndl/parallel.hpp"
#include "ndl/random.hpp"

namespace ndl {

namespace {

constexpr double kRiskSuccess = 1e-6;
constexpr double kCosineSuccess = 1e-3;
constexpr double kBadMinimum = -2.0 / 3.0;
constexpr double kBadMinimumTol = 1e-2;
constexpr double kEnvelopeSlack = 1.05;
constexpr double kBurnIn = 1.0;
constexpr double kSmallRate = 1e-8;

void require_dimension(int d) {
  if (d < 2) throw DomainError("initialization needs d >= 2");
}

bool is_counterexample(const Activation& act) {
  if (act.kind() != ActivationKind::kHermiteCombo) return false;
  std::vector<double> c = act.hermite_coeffs();
  while (!c.empty() && c.back() == 0.0) c.pop_back();
  return c == std::vector<double>{0.0, 0.0, 1.0, 1.0};
}

// Runs `segment(start)` and keeps extending while the risk at least halves per horizon.
template <class Segment, class Done>
Trajectory run_extended(Segment&& segment, Done&& done, int max_extensions, int& extensions) {
  Trajectory tr = segment(nullptr);
  extensions = 0;
  double segment_start = tr.risks.front();
  while (tr.terminal_reason == TerminalReason::kHorizon && extensions < max_extensions && !done(tr)) {
    const double end = tr.terminal_risk();
    if (!(end <= 0.5 * segment_start)) break;
    segment_start = end;
    tr.extend(segment(&tr));
    ++extensions;
  }
  return tr;
}

}  // namespace

std::vector<double> sphere_init(int d, std::uint64_t seed) {
  require_dimension(d);
  Rng rng(seed);
  return uniform_sphere(d, rng);
}

std::vector<double> gaussian_init(int d, double eta, std::uint64_t seed) {
  require_dimension(d);
  if (!(eta > 0.0) || !std::isfinite(eta)) throw DomainError("eta must be positive");
  Rng rng(seed);
  auto v = gaussian_vector(d, rng);
  for (double& x : v) x *= eta;
  return v;
}

double default_eta(int d) { return 1.0 / (std::numbers::sqrt2 * d); }

const char* to_string(BoundDirection direction) {
  return direction == BoundDirection::kAtLeast ? ">=" : "<=";
}

ExperimentReport ExperimentReport::make(std::string name, int trials, int successes, double bound,
                                        BoundDirection direction, std::vector<std::uint64_t> seeds) {
  ExperimentReport r;
  r.name = std::move(name);
  r.trials = trials;
  r.successes = successes;
  r.fraction = trials > 0 ? static_cast<double>(successes) / trials : 0.0;
  r.std_error = trials > 0 ? std::sqrt(r.fraction * (1.0 - r.fraction) / trials) : 0.0;
  r.theoretical_bound = bound;
  r.bound_direction = direction;
  r.pass = trials > 0 && (direction == BoundDirection::kAtLeast ? r.fraction >= bound - 3.0 * r.std_error
                                                                 : r.fraction <= bound + 3.0 * r.std_error);
  r.trial_seeds = std::move(seeds);
  return r;
}

std::string ExperimentReport::to_json() const {
  nlohmann::ordered_json j;
  j["name"] = name;
  j["trials"] = trials;
  j["successes"] = successes;
  j["fraction"] = fraction;
  j["std_error"] = std_error;
  j["theoretical_bound"] = theoretical_bound;
  j["bound_direction"] = to_string(bound_direction);
  j["pass"] = pass;
  j["trial_seeds"] = trial_seeds;
  return j.dump();
}

std::string ExperimentReport::summary() const {
  char buf[256];
  std::snprintf(buf, sizeof buf, "%s: %d/%d = %.4f ± %.4f (bound %s %.4g) %s", name.c_str(), successes, trials,
                fraction, std_error, to_string(bound_direction), theoretical_bound, pass ? "PASS" : "FAIL");
  return buf;
}

const char* to_string(Scenario scenario) {
  switch (scenario) {
    case Scenario::kConstantProb:
      return "constant_prob";
    case Scenario::kHighProb:
      return "high_prob";
    case Scenario::kCounterexample:
      return "counterexample";
    case Scenario::kTheorem1:
      return "theorem1";
  }
  return "unknown";
}

Scenario parse_scenario(std::string_view name) {
  for (Scenario s : {Scenario::kConstantProb, Scenario::kHighProb, Scenario::kCounterexample, Scenario::kTheorem1}) {
    if (name == to_string(s)) return s;
  }
  throw ConfigError("unknown scenario '" + std::string(name) + "'");
}

AssumptionBound default_assumption_bound(const Activation& act, double delta) {
  const AssumptionProfile p = assumption_profile(act, 1.0, 1e-3);
  AssumptionBound b;
  b.alpha = 1.0;
  b.tau = 1.0;
  b.gamma = p.gamma;
  b.zeta = std::sqrt(p.zeta_sq);
  b.beta_density = gaussian_density_floor(1.0);
  b.delta = delta;
  return b;
}

StudyResult run_probability_study(const StudyConfig& cfg) {
  cfg.flow.validate();
  if (cfg.trials < 1) throw ConfigError("trials must be positive");
  if (cfg.max_extensions < 0) throw ConfigError("max_extensions must be non-negative");
  require_dimension(cfg.d);
  const Scenario sc = cfg.scenario;
  if (sc == Scenario::kCounterexample && !is_counterexample(cfg.activation)) {
    throw ConfigError("counterexample scenario requires the activation hermite:0,0,1,1");
  }
  if (sc == Scenario::kTheorem1 && cfg.d > 16) throw ConfigError("theorem1 runs the full flow only for d <= 16");
  if (sc == Scenario::kHighProb && !(cfg.delta > 0.0 && cfg.delta < 1.0)) {
    throw ConfigError("high_prob needs 0 < delta < 1");
  }
  if (sc == Scenario::kConstantProb && !(cfg.delta > 0.0)) throw ConfigError("constant_prob needs delta > 0");

  StudyResult result;
  const bool sphere = sc != Scenario::kTheorem1;
  std::optional<CorrelationFunction> cf;
  int first_k = 0;
  if (sphere) {
    const HermiteExpansion ex = expand(cfg.activation, cfg.degree, cfg.quadrature_order);
    cf.emplace(ex);
    const auto& c = ex.coeffs();
    for (std::size_t k = 1; k < c.size(); ++k) {
      if (std::abs(c[k]) > 1e-12) {
        first_k = static_cast<int>(k);
        break;
      }
    }
    if (sc == Scenario::kHighProb) {
      result.rate = 0.5 * cf->q_sigma(cfg.delta);
    } else if (sc == Scenario::kConstantProb) {
      if (first_k == 0) throw ConfigError("constant_prob needs a nonzero coefficient of order >= 1");
      const double ck = c[static_cast<std::size_t>(first_k)];
      result.rate = first_k * ck * ck * std::pow(cfg.delta / cfg.d, first_k - 1);
    }
  } else {
    result.rate = default_assumption_bound(cfg.activation, std::numbers::pi / 2).lambda();
  }
  result.rate_exponentially_small = sc != Scenario::kCounterexample && std::abs(result.rate) < kSmallRate;
  const bool envelope = sc != Scenario::kCounterexample;

  const double eta = cfg.eta > 0.0 ? cfg.eta : default_eta(cfg.d);
  std::optional<TensorRule> rule;
  if (!sphere) rule = tensor_rule(resolve_tensor_order(cfg.activation, cfg.tensor_order), 1e-14);
  std::vector<double> w_star(static_cast<std::size_t>(cfg.d), 0.0);
  w_star[0] = 1.0;

  std::vector<TrialOutcome> out(static_cast<std::size_t>(cfg.trials));
  parallel_for(out.size(), [&](std::size_t i) {
    TrialOutcome& o = out[i];
    o.seed = derive_seed(cfg.seed, i);
    Trajectory tr;
    auto env = [&](double t) { return kEnvelopeSlack * std::exp(-result.rate * t); };
    if (sphere) {
      const double a0 = sphere_init(cfg.d, o.seed)[0];
      o.initial = a0;
      auto segment = [&](const Trajectory* prev) {
        return flow_sphere_reduced(*cf, prev ? prev->scalar(prev->size() - 1) : a0, cfg.flow);
      };
      auto done = [&](const Trajectory& t) { return t.terminal_risk() <= kRiskSuccess; };
      tr = run_extended(segment, done, cfg.max_extensions, o.extensions);
      o.terminal = tr.scalar(tr.size() - 1);
      if (envelope) {
        for (std::size_t k = 0; k < tr.size(); ++k) {
          if (tr.times[k] >= kBurnIn && 1.0 - tr.scalar(k) > env(tr.times[k])) {
            o.envelope_ok = false;
            break;
          }
        }
      }
      o.converged = sc == Scenario::kCounterexample ? std::abs(o.terminal - kBadMinimum) <= kBadMinimumTol
                                                     : (tr.terminal_risk() <= kRiskSuccess ||
                                                        std::abs(o.terminal - 1.0) <= kCosineSuccess);
    } else {
      const auto w0 = gaussian_init(cfg.d, eta, o.seed);
      auto dist2 = [&](std::span<const double> w) {
        double s = 0.0;
        for (std::size_t k = 0; k < w.size(); ++k) s += (w[k] - w_star[k]) * (w[k] - w_star[k]);
        return s;
      };
      o.initial = std::sqrt(dist2(w0));
      auto segment = [&](const Trajectory* prev) {
        const auto start = prev ? prev->terminal_state() : std::span<const double>(w0);
        const std::vector<double> s(start.begin(), start.end());
        return flow_population_full(cfg.activation, s, w_star, cfg.flow, *rule);
      };
      auto done = [&](const Trajectory& t) { return t.terminal_risk() <= kRiskSuccess; };
      tr = run_extended(segment, done, cfg.max_extensions, o.extensions);
      const double d0 = dist2(w0);
      for (std::size_t k = 0; k < tr.size(); ++k) {
        const double dk = dist2(tr.state(k));
        if (dk > d0 * (1.0 + 1e-12)) o.monotone = false;
        if (tr.times[k] >= kBurnIn && dk > env(tr.times[k])) o.envelope_ok = false;
      }
      o.terminal = std::sqrt(dist2(tr.terminal_state()));
      o.converged = tr.terminal_risk() <= kRiskSuccess;
    }
    o.terminal_risk = tr.terminal_risk();
    o.final_time = tr.times.back();
    o.reason = tr.terminal_reason;
    o.success = o.converged && (!envelope || o.envelope_ok);
  });

  std::vector<std::uint64_t> seeds;
  int counted = 0, successes = 0, all_successes = 0;
  for (const TrialOutcome& o : out) {
    seeds.push_back(o.seed);
    if (o.converged && !o.envelope_ok) ++result.envelope_violations;
    if (o.success) ++all_successes;
    if (sc == Scenario::kConstantProb && !(o.initial > 0.0)) continue;
    ++counted;
    if (o.success) ++successes;
  }
  result.unconditional_fraction = static_cast<double>(all_successes) / cfg.trials;

  double bound = 0.5;
  if (sc == Scenario::kHighProb) bound = 1.0 - 0.5 * std::exp(-cfg.d * cfg.delta * cfg.delta);
  if (sc == Scenario::kTheorem1) bound = 0.5 - 0.25 * eta * cfg.d - std::pow(1.2, -cfg.d);
  result.report = ExperimentReport::make(to_string(sc), counted, successes, bound, BoundDirection::kAtLeast,
                                         std::move(seeds));
  if (sc == Scenario::kConstantProb && cfg.d >= 50 && result.unconditional_fraction < 0.4) {
    result.report.pass = false;
  }
  result.outcomes = std::move(out);
  return result;
}

Assumption1Report assumption1_verify(const Activation& act, InputDistribution dist, int d, int probes,
                                     int mc_samples, double delta, const AssumptionBound& bound,
                                     std::uint64_t seed, int tensor_order) {
  if (dist != InputDistribution::kGaussian) throw UnsupportedError("only Gaussian inputs are supported");
  require_dimension(d);
  if (probes < 1) throw ConfigError("probe count must be positive");
  if (mc_samples < 0) throw ConfigError("mc_samples must be non-negative");
  if (!(delta > 0.0 && delta < std::numbers::pi)) throw DomainError("delta must lie in (0, pi)");

  const TensorRule rule = tensor_rule(resolve_tensor_order(act, tensor_order), 1e-14);
  std::vector<double> w_star(static_cast<std::size_t>(d), 0.0);
  w_star[0] = 1.0;
  const double max_angle = std::numbers::pi - delta;
  const double lambda = bound.lambda();

  std::vector<double> ratio(static_cast<std::size_t>(probes));
  std::vector<std::vector<double>> points(static_cast<std::size_t>(probes));
  std::vector<std::uint64_t> seeds(static_cast<std::size_t>(probes));
  parallel_for(ratio.size(), [&](std::size_t p) {
    seeds[p] = derive_seed(seed, p);
    Rng rng(seeds[p]);
    std::vector<double> u;
    do {
      u = uniform_sphere(d, rng);
    } while (std::acos(std::clamp(u[0], -1.0, 1.0)) > max_angle);
    std::uniform_real_distribution<double> radius(0.05, 2.0);
    const double rho = radius(rng);
    std::vector<double> w(u.size());
    for (std::size_t k = 0; k < u.size(); ++k) w[k] = rho * u[k];
    double dist2 = 0.0;
    for (std::size_t k = 0; k < w.size(); ++k) dist2 += (w[k] - w_star[k]) * (w[k] - w_star[k]);

    double g = 0.0;
    if (mc_samples > 0) {
      // wᵀx = βx₁ + αx₂ and w*ᵀx = x₁ with x₁, x₂ independent N(0, 1).
      const double beta = w[0];
      const double alpha = std::sqrt(std::max(0.0, rho * rho - beta * beta));
      std::normal_distribution<double> normal;
      double sum = 0.0;
      for (int s = 0; s < mc_samples; ++s) {
        const double x1 = normal(rng), x2 = normal(rng);
        const ValueAndSlope v = act.value_and_slope(beta * x1 + alpha * x2);
        sum += (v.value - act(x1)) * v.slope * ((beta - 1.0) * x1 + alpha * x2);
      }
      g = sum / mc_samples;
    } else {
      const auto grad = population_gradient(act, w, w_star, rule);
      for (std::size_t k = 0; k < w.size(); ++k) g += grad[k] * (w[k] - w_star[k]);
    }
    ratio[p] = g / dist2;
    points[p] = std::move(w);
  });

  Assumption1Report out;
  out.lambda = lambda;
  out.min_ratio = std::numeric_limits<double>::infinity();
  int ok = 0;
  for (std::size_t p = 0; p < ratio.size(); ++p) {
    if (ratio[p] >= lambda) ++ok;
    if (ratio[p] < out.min_ratio) {
      out.min_ratio = ratio[p];
      out.argmin = points[p];
    }
  }
  out.report = ExperimentReport::make("assumption1:" + act.id(), probes, ok, 1.0, BoundDirection::kAtLeast,
                                      std::move(seeds));
  return out;
}

double sphere_cosine_cdf(int d, double z) {
  require_dimension(d);
  if (z <= -1.0) return 0.0;
  if (z >= 1.0) return 1.0;
  const double k = 0.5 * (d - 1);
  return boost::math::ibeta(k, k, 0.5 * (1.0 + z));
}

double sphere_cosine_ks(int d, int draws, std::uint64_t seed) {
  require_dimension(d);
  if (draws < 1) throw ConfigError("draws must be positive");
  std::vector<double> a(static_cast<std::size_t>(draws));
  for (std::size_t i = 0; i < a.size(); ++i) a[i] = sphere_init(d, derive_seed(seed, i))[0];
  std::sort(a.begin(), a.end());
  double ks = 0.0;
  const double n = draws;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double F = sphere_cosine_cdf(d, a[i]);
    ks = std::max({ks, (i + 1) / n - F, F - i / n});
  }
  return ks;
}

ExperimentReport sphere_tail_check(int d, double delta, int draws, std::uint64_t seed) {
  require_dimension(d);
  if (draws < 1) throw ConfigError("draws must be positive");
  std::vector<std::uint64_t> seeds(static_cast<std::size_t>(draws));
  int hits = 0;
  for (std::size_t i = 0; i < seeds.size(); ++i) {
    seeds[i] = derive_seed(seed, i);
    if (sphere_init(d, seeds[i])[0] < -delta) ++hits;
  }
  return ExperimentReport::make("sphere_tail", draws, hits, 0.5 * std::exp(-d * delta * delta),
                                BoundDirection::kAtMost, std::move(seeds));
}

ExperimentReport gaussian_ball_check(int d, double eta, int draws, std::uint64_t seed) {
  require_dimension(d);
  if (draws < 1) throw ConfigError("draws must be positive");
  std::vector<std::uint64_t> seeds(static_cast<std::size_t>(draws));
  int hits = 0;
  for (std::size_t i = 0; i < seeds.size(); ++i) {
    seeds[i] = derive_seed(seed, i);
    auto w = gaussian_init(d, eta, seeds[i]);
    w[0] -= 1.0;
    double n2 = 0.0;
    for (double x : w) n2 += x * x;
    if (n2 < 1.0) ++hits;
  }
  return ExperimentReport::make("gaussian_ball", draws, hits, 0.5 - 0.25 * eta * d - std::pow(1.2, -d),
                                BoundDirection::kAtLeast, std::move(seeds));
}

}  // namespace ndl
