// SPDX-License-Identifier: Apache-2.0
#include "ndl/acceptance.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <exception>
#include <memory>
#include <limits>
#include <numbers>
#include <numeric>
#include <span>

#include "ndl/activations.hpp"
#include "ndl/dynamics.hpp"
#include "ndl/empirical.hpp"
#include "ndl/error.hpp"
#include "ndl/experiments.hpp"
#include "ndl/hermite.hpp"
#include "ndl/landscape.hpp"
#include "ndl/random.hpp"

namespace ndl {

namespace {

using Clock = std::chrono::steady_clock;

std::string format(const char* fmt, ...) {
  char buf[1024];
  va_list args;
  va_start(args, fmt);
  std::vsnprintf(buf, sizeof buf, fmt, args);
  va_end(args);
  return buf;
}

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) s += a[k] * b[k];
  return s;
}

struct Outcome {
  bool pass;
  std::string detail;
};

Outcome relu_landscape() {
  const auto t0 = Clock::now();
  const auto act = Activation::relu();
  const auto& rule = cached_gauss_hermite(200);
  double worst = 0.0;
  for (int i = 0; i <= 100; ++i) {
    const double beta = 0.01 * i;
    worst = std::max(worst, std::abs(r_sigma(act, beta, rule) - 0.25 * (beta - 1.0) * (beta - 1.0)));
  }
  const double secs = seconds_since(t0);
  return {worst <= 1e-8 && secs < 1.0, format("max |r - (b-1)^2/4| = %.3e (<= 1e-8), %.3f s (< 1 s)", worst, secs)};
}

Outcome relu_zero_init() {
  FlowConfig cfg;
  cfg.step = 1e-3;
  cfg.horizon = 10.0;
  cfg.stop_when_converged = false;
  const Trajectory tr = flow_1d(Activation::relu(), 0.0, cfg, cached_gauss_hermite(200));
  double worst = 0.0;
  for (std::size_t i = 0; i < tr.size(); ++i) {
    worst = std::max(worst, std::abs((1.0 - tr.scalar(i)) - std::exp(-0.5 * tr.times[i])));
  }
  const bool reached = std::abs(tr.times.back() - 10.0) < 1e-9;
  return {worst <= 1e-4 && reached, format("max |(1-b_t) - e^{-t/2}| = %.3e on [0, %.1f] (<= 1e-4)", worst,
                                           tr.times.back())};
}

Outcome sine_coefficient() {
  bool ok = true;
  std::string detail;
  for (int d = 1; d <= 3; ++d) {
    const auto act = Activation::sine(d);
    const HermiteExpansion ex = expand(act);
    const double exact = d * std::exp(-0.5 * d * d);
    const double rel = std::abs(ex.coeffs()[1] - exact) / exact;
    ok = ok && rel <= 1e-6;
    detail += format("%sd=%d rel %.2e (m=%d)", d > 1 ? ", " : "", d, rel, ex.quadrature_order());
  }
  return {ok, detail + " (<= 1e-6)"};
}

int interior_minima(const Activation& act) {
  const OneDimLandscape land = scan_1d(act, 0.0, 1.5, 150, cached_gauss_hermite(resolve_order(act, 400)));
  int count = 0;
  for (const LocalMin& m : land.minima) count += m.beta > 0.0 && m.beta < 1.0 - 1e-6;
  return count;
}

Outcome sine_landscape() {
  const int two = interior_minima(Activation::sine(2.0));
  const int one = interior_minima(Activation::sine(1.0));
  return {two >= 1 && one == 0, format("interior minima in (0,1): sine:2 -> %d (>= 1), sine:1 -> %d (== 0)", two, one)};
}

Outcome counterexample_exact() {
  const auto act = Activation::parse("hermite:0,0,1,1");
  const CorrelationFunction cf(expand(act));
  const auto& p = cf.power_coeffs();
  double other = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (i != 2 && i != 3) other = std::max(other, std::abs(static_cast<double>(i) * p[i]));
  }
  const double c1 = std::abs(2.0 * p[2] - 2.0);
  const double c2 = std::abs(3.0 * p[3] - 3.0);
  const double risk = std::abs(sphere_risk(cf, -2.0 / 3.0) - 50.0 / 27.0);
  FlowConfig cfg;
  const Trajectory tr = flow_sphere_reduced(cf, -0.1, cfg);
  const double end = std::abs(tr.scalar(tr.size() - 1) + 2.0 / 3.0);
  const bool ok = c1 <= 1e-8 && c2 <= 1e-8 && other <= 1e-8 && risk <= 1e-10 && end <= 1e-4;
  return {ok, format("f' coeff errors %.1e, %.1e, others %.1e (<= 1e-8); |F(-2/3) - 50/27| = %.1e (<= 1e-10); "
                     "|a_T + 2/3| = %.1e (<= 1e-4)",
                     c1, c2, other, risk, end)};
}

Outcome counterexample_probability(std::uint64_t seed) {
  const auto t0 = Clock::now();
  StudyConfig cfg;
  cfg.scenario = Scenario::kCounterexample;
  cfg.activation = Activation::parse("hermite:0,0,1,1");
  cfg.d = 50;
  cfg.trials = 2000;
  cfg.seed = derive_seed(seed, 6);
  const StudyResult r = run_probability_study(cfg);
  const double band = 3.0 * std::sqrt(0.25 / 2000);
  const double secs = seconds_since(t0);
  const bool ok = std::abs(r.report.fraction - 0.5) <= band && secs < 60.0;
  return {ok, format("fraction at -2/3 = %.4f (0.5 +- %.4f), %.1f s (< 60 s)", r.report.fraction, band, secs)};
}

Outcome q_sigma_margins() {
  const double relu = CorrelationFunction(expand(Activation::relu(), 40, 400)).q_sigma(1.0);
  const double silu = CorrelationFunction(expand(Activation::silu(), 40, 400)).q_sigma(1.0);
  const double gelu = CorrelationFunction(expand(Activation::gelu(), 40, 400)).q_sigma(1.0);
  const bool ok = std::abs(relu) <= 2e-3 && silu > 0.0 && gelu > 0.0;
  return {ok, format("q(1): relu %.2e (|.| <= 2e-3), silu %.4f (> 0), gelu %.4f (> 0)", relu, silu, gelu)};
}

Outcome high_probability(std::uint64_t seed) {
  StudyConfig cfg;
  cfg.scenario = Scenario::kHighProb;
  cfg.activation = Activation::silu();
  cfg.d = 20;
  cfg.delta = 0.5;
  cfg.trials = 500;
  cfg.seed = derive_seed(seed, 8);
  const StudyResult r = run_probability_study(cfg);
  int broken = 0;
  for (const TrialOutcome& o : r.outcomes) broken += o.success && !o.envelope_ok;
  const double need = r.report.theoretical_bound - 3.0 * r.report.std_error;
  const bool ok = r.report.pass && broken == 0;
  return {ok, format("success %.4f (>= %.4f); converged trials breaking 1.05 e^{-q(1/2)t/2}: %d; q(1/2)/2 = %.4f",
                     r.report.fraction, need, r.envelope_violations, r.rate)};
}

Outcome gradient_oracle(std::uint64_t seed) {
  const auto& r400 = cached_gauss_hermite(400);
  const TensorRule rule = tensor_rule(kDefaultTensorOrder);
  const int d = 8;
  double worst = 0.0;
  for (const char* id : {"silu", "gelu"}) {
    const auto act = Activation::parse(id);
    Rng rng(derive_seed(seed, 9));
    for (int p = 0; p < 20; ++p) {
      const auto ws = uniform_sphere(d, rng);
      const auto w = ball_probe(ws, 2.0, rng);
      auto risk = [&](const std::vector<double>& v) {
        const double n = std::sqrt(dot(v, v));
        return offsphere_risk(act, n, std::clamp(dot(v, ws) / n, -1.0, 1.0), 128, r400);
      };
      const auto g = population_gradient(act, w, ws, rule);
      double err = 0.0, norm = 0.0;
      for (int k = 0; k < d; ++k) {
        auto up = w, down = w;
        up[k] += 1e-5;
        down[k] -= 1e-5;
        const double fd = (risk(up) - risk(down)) / 2e-5;
        err += (fd - g[k]) * (fd - g[k]);
        norm += fd * fd;
      }
      worst = std::max(worst, std::sqrt(err / norm));
    }
  }
  return {worst <= 1e-5, format("max relative gradient error %.2e over 40 points (<= 1e-5)", worst)};
}

Outcome monte_carlo_risk(std::uint64_t seed) {
  const int n = 1000000, d = 10;
  const GaussianDataset data = GaussianDataset::generate(n, d, derive_seed(seed, 10));
  const char* ids[] = {"relu", "silu", "gelu", "sigmoid", "tanh", "swish:2", "sine:1", "sine:2", "plateau",
                       "hermite:0,0,1,1"};
  Rng rng(derive_seed(seed, 1010));
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  double worst = 0.0;
  for (const char* id : ids) {
    const auto act = Activation::parse(id);
    const double a = unif(rng);
    const double b = std::sqrt(1.0 - a * a);
    // w* = e₁, w = a e₁ + b e₂.
    double mean = 0.0, sq = 0.0;
    for (int i = 0; i < n; ++i) {
      const double x1 = data.samples()(0, i), x2 = data.samples()(1, i);
      const double diff = act(a * x1 + b * x2) - act(x1);
      const double term = 0.5 * diff * diff;
      mean += term;
      sq += term * term;
    }
    mean /= n;
    const double se = std::sqrt(std::max(0.0, sq / n - mean * mean) / n);
    const double closed = sphere_risk(CorrelationFunction(expand(act)), a);
    worst = std::max(worst, std::abs(closed - mean) / se);
  }
  return {worst <= 4.0, format("max |closed - empirical| / SE = %.2f over 10 pairs (<= 4)", worst)};
}

Outcome sup_gap_scaling(std::uint64_t seed) {
  const auto t0 = Clock::now();
  const int d = 10, seeds = 10;
  std::vector<double> xs, ys;
  for (int e = 9; e <= 14; ++e) {
    const int n = 1 << e;
    double mean_log = 0.0;
    for (int s = 0; s < seeds; ++s) {
      auto data = std::make_shared<const GaussianDataset>(GaussianDataset::generate(n, d, derive_seed(seed, 1100 + s)));
      const EmpiricalContext ctx(data, Activation::silu(), sphere_init(d, derive_seed(seed, 1200 + s)), 1.0);
      mean_log += std::log(sup_gap(ctx, 100, derive_seed(seed, 1300 + s)).grad_gap);
    }
    xs.push_back(std::log(static_cast<double>(n)));
    ys.push_back(mean_log / seeds);
  }
  const double mx = std::accumulate(xs.begin(), xs.end(), 0.0) / xs.size();
  const double my = std::accumulate(ys.begin(), ys.end(), 0.0) / ys.size();
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxy += (xs[i] - mx) * (ys[i] - my);
    sxx += (xs[i] - mx) * (xs[i] - mx);
  }
  const double slope = sxy / sxx;
  const double secs = seconds_since(t0);
  return {slope >= -0.65 && slope <= -0.35 && secs < 300.0,
          format("slope of log grad_gap vs log n = %.3f (in [-0.65, -0.35]), %.1f s (< 300 s)", slope, secs)};
}

Outcome region_integral() {
  double worst = std::numeric_limits<double>::infinity();
  double worst_gap = 0.0;
  for (int i = 0; i < 10; ++i) {
    const double gap = 0.1 + i * (std::numbers::pi - 0.1) / 9.0;
    const RegionCheck c = region_integral_check(1.0, gap, 360);
    const double margin = c.numeric_inf - c.analytic_lb;
    if (margin < worst) {
      worst = margin;
      worst_gap = gap;
    }
  }
  return {worst >= -1e-9, format("min (numeric inf - lower bound) = %.3e at gap %.3f (>= -1e-9)", worst, worst_gap)};
}

Outcome theorem1(std::uint64_t seed) {
  StudyConfig cfg;
  cfg.scenario = Scenario::kTheorem1;
  cfg.activation = Activation::silu();
  cfg.d = 10;
  cfg.eta = default_eta(10);
  cfg.trials = 500;
  cfg.flow.step = 0.05;
  cfg.flow.tolerance = 1e-9;
  cfg.seed = derive_seed(seed, 13);
  const StudyResult r = run_probability_study(cfg);
  int not_monotone = 0;
  for (const TrialOutcome& o : r.outcomes) not_monotone += o.success && !o.monotone;
  const double need = r.report.theoretical_bound - 3.0 * r.report.std_error;
  return {r.report.pass && not_monotone == 0,
          format("success %.4f (>= %.4f); successful trials with non-monotone distance: %d", r.report.fraction,
                 need, not_monotone)};
}

Outcome geometry_bound(std::uint64_t seed) {
  const int d = 10;
  Rng rng(derive_seed(seed, 14));
  int exceptions = 0, pairs = 0;
  while (pairs < 10000) {
    const auto ws = uniform_sphere(d, rng);
    const auto w = ball_probe(ws, 1.0, rng);
    double dist2 = 0.0;
    for (int k = 0; k < d; ++k) dist2 += (w[k] - ws[k]) * (w[k] - ws[k]);
    if (!(dist2 < 1.0)) continue;
    ++pairs;
    const double cosine = dot(w, ws) / std::sqrt(dot(w, w));
    exceptions += !(std::acos(std::clamp(cosine, -1.0, 1.0)) < std::numbers::pi / 2);
  }
  return {exceptions == 0, format("%d pairs with |w - w*| < 1, exceptions to angle < pi/2: %d", pairs, exceptions)};
}

Outcome empirical_gd(std::uint64_t seed) {
  const int d = 10, seeds = 10;
  const int sizes[] = {1000, 10000, 100000};
  FlowConfig cfg;
  cfg.step = 0.25;
  cfg.horizon = 30.0;
  cfg.tolerance = 1e-12;
  cfg.record_every = 10;
  std::vector<double> zero_med, sphere_med;
  for (int n : sizes) {
    std::vector<double> zero, sphere;
    for (int s = 0; s < seeds; ++s) {
      auto data = std::make_shared<const GaussianDataset>(GaussianDataset::generate(n, d, derive_seed(seed, 1500 + s)));
      const auto ws = sphere_init(d, derive_seed(seed, 1600 + s));
      const EmpiricalContext ctx(data, Activation::silu(), ws, 1.0);
      zero.push_back(empirical_flow_zero_init(ctx, cfg).terminal_distance());
      std::vector<double> w0;
      for (std::uint64_t k = 0;; ++k) {
        w0 = sphere_init(d, derive_seed(derive_seed(seed, 1700 + s), k));
        if (dot(w0, ws) >= -0.5) break;
      }
      sphere.push_back(1.0 - empirical_flow_sphere(ctx, w0, cfg).terminal_cosine());
    }
    zero_med.push_back(median(zero));
    sphere_med.push_back(median(sphere));
  }
  bool monotone = true;
  for (std::size_t i = 1; i < zero_med.size(); ++i) {
    monotone = monotone && zero_med[i] <= zero_med[i - 1] && sphere_med[i] <= sphere_med[i - 1];
  }
  const bool ok = zero_med.back() <= 0.05 && sphere_med.back() <= 0.02 && monotone;
  return {ok, format("n=1e5 medians: zero-init |w_T - w*| = %.2e (<= 0.05), sphere 1 - a_T = %.2e (<= 0.02); "
                     "zero-init medians %.2e, %.2e, %.2e and sphere %.2e, %.2e, %.2e at n = 1e3, 1e4, 1e5 "
                     "non-increasing: %s",
                     zero_med.back(), sphere_med.back(), zero_med[0], zero_med[1], zero_med[2], sphere_med[0],
                     sphere_med[1], sphere_med[2], monotone ? "yes" : "no")};
}

Outcome init_law(std::uint64_t seed) {
  const double ks = sphere_cosine_ks(10, 10000, derive_seed(seed, 16));
  const ExperimentReport tail = sphere_tail_check(20, 0.3, 10000, derive_seed(seed, 1616));
  return {ks <= 0.02 && tail.pass,
          format("KS = %.4f (<= 0.02); P(a0 < -0.3) = %.4f +- %.4f vs 0.5e^{-1.8} = %.4f (<= bound + 3 SE)", ks,
                 tail.fraction, tail.std_error, tail.theoretical_bound)};
}

const char* title(int id) {
  static const char* titles[kAcceptanceCount] = {
      "ReLU 1-D landscape",
      "ReLU zero-init flow",
      "Sine Hermite coefficient",
      "Sine(2) landscape minima",
      "Counterexample exactness",
      "Counterexample probability",
      "q_sigma margins",
      "High-probability convergence",
      "Gradient oracle",
      "Monte-Carlo risk consistency",
      "Sup-gap scaling",
      "Region integral bound",
      "Gaussian-init convergence probability",
      "Angle geometry bound",
      "Empirical GD end-to-end",
      "Initialization law",
  };
  return titles[id - 1];
}

Outcome dispatch(int id, std::uint64_t seed) {
  switch (id) {
    case 1:
      return relu_landscape();
    case 2:
      return relu_zero_init();
    case 3:
      return sine_coefficient();
    case 4:
      return sine_landscape();
    case 5:
      return counterexample_exact();
    case 6:
      return counterexample_probability(seed);
    case 7:
      return q_sigma_margins();
    case 8:
      return high_probability(seed);
    case 9:
      return gradient_oracle(seed);
    case 10:
      return monte_carlo_risk(seed);
    case 11:
      return sup_gap_scaling(seed);
    case 12:
      return region_integral();
    case 13:
      return theorem1(seed);
    case 14:
      return geometry_bound(seed);
    case 15:
      return empirical_gd(seed);
    case 16:
      return init_law(seed);
  }
  throw ConfigError("acceptance criterion must be in 1..16");
}

}  // namespace

AcceptanceResult run_acceptance_check(int id, std::uint64_t seed) {
  if (id < 1 || id > kAcceptanceCount) throw ConfigError("acceptance criterion must be in 1..16");
  AcceptanceResult r;
  r.id = id;
  r.title = title(id);
  const auto t0 = Clock::now();
  try {
    const Outcome o = dispatch(id, seed);
    r.pass = o.pass;
    r.detail = o.detail;
  } catch (const std::exception& e) {
    r.pass = false;
    r.detail = std::string("error: ") + e.what();
  }
  r.seconds = seconds_since(t0);
  return r;
}

std::vector<AcceptanceResult> run_acceptance(const std::vector<int>& ids, std::uint64_t seed,
                                             const std::function<void(const AcceptanceResult&)>& on_result) {
  std::vector<int> todo = ids;
  if (todo.empty()) {
    for (int i = 1; i <= kAcceptanceCount; ++i) todo.push_back(i);
  }
  for (int id : todo) {
    if (id < 1 || id > kAcceptanceCount) throw ConfigError("acceptance criterion must be in 1..16");
  }
  std::vector<AcceptanceResult> out;
  for (int id : todo) {
    out.push_back(run_acceptance_check(id, seed));
    if (on_result) on_result(out.back());
  }
  return out;
}

std::string format_result(const AcceptanceResult& r) {
  return format("[%s] %02d %s: %s (%.2f s)", r.pass ? "PASS" : "FAIL", r.id, r.title.c_str(), r.detail.c_str(),
                r.seconds);
}

}  // namespace ndl
