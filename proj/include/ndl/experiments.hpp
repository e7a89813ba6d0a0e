// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "ndl/activations.hpp"
#include "ndl/dynamics.hpp"
#include "ndl/landscape.hpp"

namespace ndl {

/// Unit vector: a normalized standard Gaussian. Throws DomainError when d < 2.
std::vector<double> sphere_init(int d, std::uint64_t seed);
/// η times a standard Gaussian. Throws DomainError when d < 2 or η ≤ 0.
std::vector<double> gaussian_init(int d, double eta, std::uint64_t seed);
/// 1/(√2 d).
double default_eta(int d);

enum class BoundDirection { kAtLeast, kAtMost };

const char* to_string(BoundDirection direction);

struct ExperimentReport {
  std::string name;
  int trials = 0;
  int successes = 0;
  double fraction = 0.0;
  double std_error = 0.0;
  double theoretical_bound = 0.0;
  BoundDirection bound_direction = BoundDirection::kAtLeast;
  bool pass = false;
  std::vector<std::uint64_t> trial_seeds;

  /// Fills fraction, std_error = √(p(1−p)/trials) and pass: fraction ≥ bound − 3·SE
  /// (at least) or fraction ≤ bound + 3·SE (at most).
  static ExperimentReport make(std::string name, int trials, int successes, double bound, BoundDirection direction,
                               std::vector<std::uint64_t> seeds);

  /// JSON object with exactly the report fields.
  std::string to_json() const;
  /// One line, e.g. "high_prob: 497/500 = 0.9940 ± 0.0035 (bound >= 0.9966) PASS".
  std::string summary() const;
};

enum class Scenario { kConstantProb, kHighProb, kCounterexample, kTheorem1 };

const char* to_string(Scenario scenario);
/// Accepts constant_prob, high_prob, counterexample, theorem1. Throws ConfigError otherwise.
Scenario parse_scenario(std::string_view name);

struct StudyConfig {
  Scenario scenario = Scenario::kHighProb;
  Activation activation = Activation::silu();
  int d = 20;
  int trials = 500;
  FlowConfig flow;
  std::uint64_t seed = 0;
  /// High-probability margin δ; constant_prob uses it in c_k.
  double delta = 0.5;
  /// theorem1 init scale; 0 selects 1/(√2 d).
  double eta = 0.0;
  int degree = 40;
  int quadrature_order = 400;
  int tensor_order = kMinTensorOrder;
  /// Extra horizons granted to a trial whose risk at least halved over the last one.
  int max_extensions = 9;
};

/// Per-trial record. Sphere scenarios store the cosine a; theorem1 stores ‖w − w*‖.
struct TrialOutcome {
  std::uint64_t seed = 0;
  double initial = 0.0;
  double terminal = 0.0;
  double terminal_risk = 0.0;
  double final_time = 0.0;
  TerminalReason reason = TerminalReason::kHorizon;
  int extensions = 0;
  bool converged = false;
  bool envelope_ok = true;
  /// theorem1: ‖w_t − w*‖² never exceeded ‖w₀ − w*‖².
  bool monotone = true;
  bool success = false;
};

struct StudyResult {
  ExperimentReport report;
  std::vector<TrialOutcome> outcomes;
  /// Exponential rate of the envelope (1 − a_t or ‖w_t − w*‖² ≤ e^{−rate·t}).
  double rate = 0.0;
  /// Rate below 1e-8.
  bool rate_exponentially_small = false;
  /// Trials that converged but broke the envelope.
  int envelope_violations = 0;
  /// constant_prob: success fraction over all trials.
  double unconditional_fraction = 0.0;
};

/// Monte-Carlo study of one scenario, trial seeds derived from cfg.seed by
/// counter. Teacher w* = e₁. Success: terminal risk ≤ 1e-6 or a_T within 1e-3
/// of 1, and the rate envelope ·1.05 holds for t ≥ 1. counterexample counts
/// trials ending within 1e-2 of a = −2/3 instead and requires σ = h₂ + h₃;
/// constant_prob counts only a₀ > 0 trials and needs the unconditional fraction
/// ≥ 0.4 when d ≥ 50; theorem1 runs the full population flow and needs d ≤ 16.
/// Throws ConfigError on an inconsistent configuration.
StudyResult run_probability_study(const StudyConfig& cfg);

enum class InputDistribution { kGaussian };

struct Assumption1Report {
  ExperimentReport report;
  double min_ratio = 0.0;
  double lambda = 0.0;
  std::vector<double> argmin;
};

/// G(w)/‖w − w*‖² with G(w) = ⟨∇R(w), w − w*⟩ over `probes` random w with
/// θ(w, w*) ≤ π − delta and ‖w‖ uniform in [0.05, 2]. A probe succeeds when
/// its ratio is ≥ λ. With mc_samples > 0 each ratio is instead a Monte-Carlo
/// estimate over that many Gaussian inputs.
Assumption1Report assumption1_verify(const Activation& act, InputDistribution dist, int d, int probes,
                                     int mc_samples, double delta, const AssumptionBound& bound,
                                     std::uint64_t seed, int tensor_order = kMinTensorOrder);

/// AssumptionBound for `act` with α = 1, τ = 1: γ and ζ from assumption_profile
/// on grid 1e-3, β_density = min of the bivariate normal density on the unit disk.
AssumptionBound default_assumption_bound(const Activation& act, double delta);

/// CDF of a₀ = w₀ᵀw* for w₀ uniform on S^{d−1}: g(z) ∝ (1 − z²)^{(d−3)/2}.
double sphere_cosine_cdf(int d, double z);

/// Kolmogorov–Smirnov distance between `draws` sampled a₀ and sphere_cosine_cdf.
double sphere_cosine_ks(int d, int draws, std::uint64_t seed);

/// Fraction of draws with a₀ < −δ against 0.5e^{−dδ²} (at most).
ExperimentReport sphere_tail_check(int d, double delta, int draws, std::uint64_t seed);

/// Fraction of η-Gaussian draws with ‖w₀ − w*‖ < 1 against ½ − ηd/4 − 1.2^{−d} (at least).
ExperimentReport gaussian_ball_check(int d, double eta, int draws, std::uint64_t seed);

}  // namespace ndl
