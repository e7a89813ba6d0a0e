// SPDX-License-Identifier: Apache-2.0
#include "ndl/ndl.h"

#include <algorithm>
#include <exception>
#include <memory>
#include <new>
#include <optional>
#include <string>
#include <vector>

#include "ndl/acceptance.hpp"
#include "ndl/activations.hpp"
#include "ndl/dynamics.hpp"
#include "ndl/empirical.hpp"
#include "ndl/error.hpp"
#include "ndl/experiments.hpp"
#include "ndl/hermite.hpp"
#include "ndl/io.hpp"
#include "ndl/landscape.hpp"
#include "ndl/parallel.hpp"
#include "ndl/random.hpp"

struct ndl_activation {
  ndl::Activation act;
};

struct ndl_expansion {
  ndl::HermiteExpansion ex;
  ndl::CorrelationFunction cf;
};

struct ndl_landscape {
  ndl::OneDimLandscape land;
  std::vector<bool> flags;
};

struct ndl_trajectory {
  ndl::Trajectory tr;
};

struct ndl_dataset {
  std::shared_ptr<const ndl::GaussianDataset> data;
};

struct ndl_empirical {
  ndl::EmpiricalContext ctx;
};

struct ndl_report {
  ndl::ExperimentReport report;
  std::string json;
  std::string summary;
  double rate = 0.0;
  int exponentially_small = 0;
  int envelope_violations = 0;
  double min_ratio = 0.0;
  double lambda = 0.0;
};

namespace {

thread_local std::string last_error;

ndl_status fail(ndl_status status, const char* what) {
  last_error = what;
  return status;
}

template <class F>
ndl_status guard(F&& body) {
  try {
    body();
    last_error.clear();
    return NDL_OK;
  } catch (const ndl::DomainError& e) {
    return fail(NDL_ERR_DOMAIN, e.what());
  } catch (const ndl::RangeError& e) {
    return fail(NDL_ERR_RANGE, e.what());
  } catch (const ndl::UnsupportedError& e) {
    return fail(NDL_ERR_UNSUPPORTED, e.what());
  } catch (const ndl::ConfigError& e) {
    return fail(NDL_ERR_CONFIG, e.what());
  } catch (const ndl::DimensionError& e) {
    return fail(NDL_ERR_DIMENSION, e.what());
  } catch (const ndl::IoError& e) {
    return fail(NDL_ERR_IO, e.what());
  } catch (const std::bad_alloc&) {
    return fail(NDL_ERR_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return fail(NDL_ERR_INTERNAL, e.what());
  } catch (...) {
    return fail(NDL_ERR_INTERNAL, "unknown error");
  }
}

template <class... P>
bool any_null(const P*... p) {
  return ((p == nullptr) || ...);
}

ndl_status null_argument() { return fail(NDL_ERR_NULL_ARGUMENT, "required argument is null"); }

ndl::FlowConfig to_flow(const ndl_flow_config& c) {
  ndl::FlowConfig f;
  f.step = c.step;
  f.horizon = c.horizon;
  f.tolerance = c.tolerance;
  f.stop_when_converged = c.stop_when_converged != 0;
  f.record_every = c.record_every;
  return f;
}

std::vector<double> to_vector(const double* p, std::size_t n) { return std::vector<double>(p, p + n); }

ndl_report* wrap_report(ndl::ExperimentReport r) {
  auto* out = new ndl_report();
  out->report = std::move(r);
  out->json = out->report.to_json();
  out->summary = out->report.summary();
  return out;
}

}  // namespace

extern "C" {

const char* ndl_last_error(void) { return last_error.c_str(); }

const char* ndl_status_string(ndl_status status) {
  switch (status) {
    case NDL_OK:
      return "ok";
    case NDL_ERR_DOMAIN:
      return "domain error";
    case NDL_ERR_RANGE:
      return "range error";
    case NDL_ERR_UNSUPPORTED:
      return "unsupported";
    case NDL_ERR_CONFIG:
      return "configuration error";
    case NDL_ERR_DIMENSION:
      return "dimension mismatch";
    case NDL_ERR_IO:
      return "i/o error";
    case NDL_ERR_NULL_ARGUMENT:
      return "null argument";
    case NDL_ERR_INTERNAL:
      return "internal error";
  }
  return "unknown status";
}

const char* ndl_version(void) { return NDL_VERSION_STRING; }

int ndl_worker_count(void) { return ndl::worker_count(); }

uint64_t ndl_derive_seed(uint64_t master, uint64_t index) { return ndl::derive_seed(master, index); }

ndl_status ndl_sphere_init(int d, uint64_t seed, double* out) {
  if (out == nullptr) return null_argument();
  return guard([&] {
    const auto w = ndl::sphere_init(d, seed);
    std::copy(w.begin(), w.end(), out);
  });
}

ndl_status ndl_gaussian_init(int d, double eta, uint64_t seed, double* out) {
  if (out == nullptr) return null_argument();
  return guard([&] {
    const auto w = ndl::gaussian_init(d, eta > 0.0 ? eta : ndl::default_eta(d), seed);
    std::copy(w.begin(), w.end(), out);
  });
}

/* activations */

ndl_status ndl_activation_parse(const char* id, ndl_activation** out) {
  if (any_null(id, out)) return null_argument();
  return guard([&] { *out = new ndl_activation{ndl::Activation::parse(id)}; });
}

void ndl_activation_free(ndl_activation* act) { delete act; }

ndl_status ndl_activation_id(const ndl_activation* act, const char** out) {
  if (any_null(act, out)) return null_argument();
  *out = act->act.id().c_str();
  return NDL_OK;
}

ndl_status ndl_activation_eval(const ndl_activation* act, double z, double* value, double* slope) {
  if (act == nullptr) return null_argument();
  return guard([&] {
    const ndl::ValueAndSlope v = act->act.value_and_slope(z);
    if (value) *value = v.value;
    if (slope) *slope = v.slope;
  });
}

/* expansions */

ndl_status ndl_expand(const ndl_activation* act, int degree, int order, ndl_expansion** out) {
  if (any_null(act, out)) return null_argument();
  return guard([&] {
    ndl::HermiteExpansion ex =
        ndl::expand(act->act, degree, order > 0 ? order : ndl::kDefaultQuadratureOrder);
    ndl::CorrelationFunction cf(ex);
    *out = new ndl_expansion{std::move(ex), std::move(cf)};
  });
}

void ndl_expansion_free(ndl_expansion* ex) { delete ex; }

ndl_status ndl_expansion_degree(const ndl_expansion* ex, int* out) {
  if (any_null(ex, out)) return null_argument();
  *out = ex->ex.degree();
  return NDL_OK;
}

ndl_status ndl_expansion_quadrature_order(const ndl_expansion* ex, int* out) {
  if (any_null(ex, out)) return null_argument();
  *out = ex->ex.quadrature_order();
  return NDL_OK;
}

ndl_status ndl_expansion_coeffs(const ndl_expansion* ex, double* out, size_t len) {
  if (any_null(ex, out)) return null_argument();
  const auto& c = ex->ex.coeffs();
  if (len < c.size()) return fail(NDL_ERR_DIMENSION, "coefficient buffer shorter than degree + 1");
  std::copy(c.begin(), c.end(), out);
  return NDL_OK;
}

ndl_status ndl_expansion_l2(const ndl_expansion* ex, double* l2_total, double* residual, int* truncation_warning) {
  if (ex == nullptr) return null_argument();
  if (l2_total) *l2_total = ex->ex.l2_total();
  if (residual) *residual = ex->ex.residual();
  if (truncation_warning) *truncation_warning = ex->ex.truncation_warning() ? 1 : 0;
  return NDL_OK;
}

ndl_status ndl_expansion_correlation(const ndl_expansion* ex, double a, double* f, double* f_prime) {
  if (ex == nullptr) return null_argument();
  return guard([&] {
    if (f) *f = ex->cf.f(a);
    if (f_prime) *f_prime = ex->cf.f_prime(a);
  });
}

ndl_status ndl_expansion_q_sigma(const ndl_expansion* ex, double delta, double* out) {
  if (any_null(ex, out)) return null_argument();
  return guard([&] { *out = ex->cf.q_sigma(delta); });
}

ndl_status ndl_expansion_sphere_risk(const ndl_expansion* ex, double a, double* out) {
  if (any_null(ex, out)) return null_argument();
  return guard([&] { *out = ndl::sphere_risk(ex->cf, a); });
}

ndl_status ndl_expansion_write_csv(const ndl_expansion* ex, const char* path) {
  if (any_null(ex, path)) return null_argument();
  return guard([&] { ndl::write_expansion_csv(ex->ex, path); });
}

/* landscape */

ndl_status ndl_landscape_scan(const ndl_activation* act, double lo, double hi, int steps, int order,
                              ndl_landscape** out) {
  if (any_null(act, out)) return null_argument();
  return guard([&] {
    const int m = ndl::resolve_order(act->act, order > 0 ? order : ndl::kDefaultQuadratureOrder);
    ndl::OneDimLandscape land = ndl::scan_1d(act->act, lo, hi, steps, ndl::cached_gauss_hermite(m));
    auto flags = land.local_min_flags();
    *out = new ndl_landscape{std::move(land), std::move(flags)};
  });
}

void ndl_landscape_free(ndl_landscape* land) { delete land; }

ndl_status ndl_landscape_size(const ndl_landscape* land, size_t* out) {
  if (any_null(land, out)) return null_argument();
  *out = land->land.betas.size();
  return NDL_OK;
}

ndl_status ndl_landscape_row(const ndl_landscape* land, size_t i, double* beta, double* r, double* r_prime,
                             int* is_local_min) {
  if (land == nullptr) return null_argument();
  if (i >= land->land.betas.size()) return fail(NDL_ERR_RANGE, "landscape row out of range");
  if (beta) *beta = land->land.betas[i];
  if (r) *r = land->land.r[i];
  if (r_prime) *r_prime = land->land.r_prime[i];
  if (is_local_min) *is_local_min = land->flags[i] ? 1 : 0;
  return NDL_OK;
}

ndl_status ndl_landscape_minima_count(const ndl_landscape* land, size_t* out) {
  if (any_null(land, out)) return null_argument();
  *out = land->land.minima.size();
  return NDL_OK;
}

ndl_status ndl_landscape_minimum(const ndl_landscape* land, size_t i, double* beta, double* r, int* is_bad) {
  if (land == nullptr) return null_argument();
  if (i >= land->land.minima.size()) return fail(NDL_ERR_RANGE, "minimum index out of range");
  const ndl::LocalMin& m = land->land.minima[i];
  if (beta) *beta = m.beta;
  if (r) *r = m.r;
  if (is_bad) *is_bad = m.r > 1e-12 ? 1 : 0;
  return NDL_OK;
}

ndl_status ndl_landscape_write_csv(const ndl_landscape* land, const char* path) {
  if (any_null(land, path)) return null_argument();
  return guard([&] { ndl::write_landscape_csv(land->land, path); });
}

ndl_status ndl_pop_condition(const ndl_activation* act, int order, int* holds, double* c) {
  if (act == nullptr) return null_argument();
  return guard([&] {
    const int m = ndl::resolve_order(act->act, order > 0 ? order : ndl::kDefaultQuadratureOrder);
    const ndl::PopCondition p = ndl::check_pop_condition(act->act, ndl::cached_gauss_hermite(m));
    if (holds) *holds = p.holds ? 1 : 0;
    if (c) *c = p.C;
  });
}

/* flows */

void ndl_flow_config_default(ndl_flow_config* cfg) {
  if (cfg == nullptr) return;
  const ndl::FlowConfig f;
  cfg->step = f.step;
  cfg->horizon = f.horizon;
  cfg->tolerance = f.tolerance;
  cfg->stop_when_converged = f.stop_when_converged ? 1 : 0;
  cfg->record_every = f.record_every;
}

ndl_status ndl_flow_1d(const ndl_activation* act, double beta0, const ndl_flow_config* cfg, int order,
                       ndl_trajectory** out) {
  if (any_null(act, cfg, out)) return null_argument();
  return guard([&] {
    const int m = ndl::resolve_order(act->act, order > 0 ? order : ndl::kDefaultQuadratureOrder);
    *out = new ndl_trajectory{ndl::flow_1d(act->act, beta0, to_flow(*cfg), ndl::cached_gauss_hermite(m))};
  });
}

ndl_status ndl_flow_sphere(const ndl_expansion* ex, double a0, const ndl_flow_config* cfg, ndl_trajectory** out) {
  if (any_null(ex, cfg, out)) return null_argument();
  return guard([&] { *out = new ndl_trajectory{ndl::flow_sphere_reduced(ex->cf, a0, to_flow(*cfg))}; });
}

ndl_status ndl_flow_population(const ndl_activation* act, const double* w0, const double* w_star, size_t d,
                               const ndl_flow_config* cfg, int tensor_order, ndl_trajectory** out) {
  if (any_null(act, w0, w_star, cfg, out)) return null_argument();
  return guard([&] {
    const int order = ndl::resolve_tensor_order(act->act, tensor_order > 0 ? tensor_order : ndl::kDefaultTensorOrder);
    const ndl::TensorRule rule = ndl::tensor_rule(order);
    *out = new ndl_trajectory{ndl::flow_population_full(act->act, to_vector(w0, d), to_vector(w_star, d),
                                                        to_flow(*cfg), rule)};
  });
}

void ndl_trajectory_free(ndl_trajectory* tr) { delete tr; }

ndl_status ndl_trajectory_size(const ndl_trajectory* tr, size_t* rows, size_t* dim) {
  if (tr == nullptr) return null_argument();
  if (rows) *rows = tr->tr.size();
  if (dim) *dim = static_cast<size_t>(tr->tr.dim);
  return NDL_OK;
}

ndl_status ndl_trajectory_row(const ndl_trajectory* tr, size_t i, double* t, double* state, double* risk) {
  if (tr == nullptr) return null_argument();
  if (i >= tr->tr.size()) return fail(NDL_ERR_RANGE, "trajectory row out of range");
  if (t) *t = tr->tr.times[i];
  if (risk) *risk = tr->tr.risks[i];
  if (state) {
    const auto row = tr->tr.state(i);
    std::copy(row.begin(), row.end(), state);
  }
  return NDL_OK;
}

ndl_status ndl_trajectory_terminal_reason(const ndl_trajectory* tr, const char** out) {
  if (any_null(tr, out)) return null_argument();
  *out = ndl::to_string(tr->tr.terminal_reason);
  return NDL_OK;
}

ndl_status ndl_trajectory_write_csv(const ndl_trajectory* tr, const char* path, const char* state_label) {
  if (any_null(tr, path)) return null_argument();
  return guard([&] { ndl::write_trajectory_csv(tr->tr, path, state_label ? state_label : "state"); });
}

/* finite samples */

ndl_status ndl_dataset_generate(int n, int d, uint64_t seed, ndl_dataset** out) {
  if (out == nullptr) return null_argument();
  return guard([&] {
    *out = new ndl_dataset{std::make_shared<const ndl::GaussianDataset>(ndl::GaussianDataset::generate(n, d, seed))};
  });
}

ndl_status ndl_dataset_load(const char* path, ndl_dataset** out) {
  if (any_null(path, out)) return null_argument();
  return guard([&] {
    *out = new ndl_dataset{std::make_shared<const ndl::GaussianDataset>(ndl::GaussianDataset::load(path))};
  });
}

ndl_status ndl_dataset_save(const ndl_dataset* ds, const char* path) {
  if (any_null(ds, path)) return null_argument();
  return guard([&] { ds->data->save(path); });
}

ndl_status ndl_dataset_save_csv(const ndl_dataset* ds, const char* path) {
  if (any_null(ds, path)) return null_argument();
  return guard([&] { ds->data->save_csv(path); });
}

void ndl_dataset_free(ndl_dataset* ds) { delete ds; }

ndl_status ndl_dataset_shape(const ndl_dataset* ds, int* n, int* d) {
  if (ds == nullptr) return null_argument();
  if (n) *n = ds->data->n();
  if (d) *d = ds->data->d();
  return NDL_OK;
}

ndl_status ndl_empirical_create(const ndl_dataset* ds, const ndl_activation* act, const double* w_star, size_t d,
                                double radius, ndl_empirical** out) {
  if (any_null(ds, act, w_star, out)) return null_argument();
  return guard([&] { *out = new ndl_empirical{ndl::EmpiricalContext(ds->data, act->act, to_vector(w_star, d), radius)}; });
}

void ndl_empirical_free(ndl_empirical* ctx) { delete ctx; }

ndl_status ndl_empirical_eval(const ndl_empirical* ctx, const double* w, size_t d, double* risk, double* gradient) {
  if (any_null(ctx, w)) return null_argument();
  return guard([&] {
    const ndl::EmpiricalEval e = ndl::empirical_eval(ctx->ctx, {w, d});
    if (risk) *risk = e.risk;
    if (gradient) std::copy(e.gradient.data(), e.gradient.data() + e.gradient.size(), gradient);
  });
}

ndl_status ndl_empirical_sup_gap(const ndl_empirical* ctx, int probes, uint64_t seed, double* risk_gap,
                                 double* grad_gap) {
  if (ctx == nullptr) return null_argument();
  return guard([&] {
    const ndl::SupGap g = ndl::sup_gap(ctx->ctx, probes, seed);
    if (risk_gap) *risk_gap = g.risk_gap;
    if (grad_gap) *grad_gap = g.grad_gap;
  });
}

ndl_status ndl_empirical_flow_zero_init(const ndl_empirical* ctx, const ndl_flow_config* cfg, ndl_trajectory** out,
                                        double* best_distance) {
  if (any_null(ctx, cfg, out)) return null_argument();
  return guard([&] {
    ndl::EmpiricalRun run = ndl::empirical_flow_zero_init(ctx->ctx, to_flow(*cfg));
    if (best_distance) *best_distance = run.best_distance;
    *out = new ndl_trajectory{std::move(run.trajectory)};
  });
}

ndl_status ndl_empirical_flow_sphere(const ndl_empirical* ctx, const double* w0, size_t d, const ndl_flow_config* cfg,
                                     ndl_trajectory** out, double* best_distance) {
  if (any_null(ctx, w0, cfg, out)) return null_argument();
  return guard([&] {
    ndl::EmpiricalRun run = ndl::empirical_flow_sphere(ctx->ctx, {w0, d}, to_flow(*cfg));
    if (best_distance) *best_distance = run.best_distance;
    *out = new ndl_trajectory{std::move(run.trajectory)};
  });
}

/* studies */

void ndl_study_config_default(ndl_study_config* cfg) {
  if (cfg == nullptr) return;
  const ndl::StudyConfig s;
  cfg->scenario = "high_prob";
  cfg->activation = nullptr;
  cfg->d = s.d;
  cfg->trials = s.trials;
  ndl_flow_config_default(&cfg->flow);
  cfg->seed = s.seed;
  cfg->delta = s.delta;
  cfg->eta = s.eta;
  cfg->degree = s.degree;
  cfg->quadrature_order = s.quadrature_order;
  cfg->tensor_order = s.tensor_order;
  cfg->max_extensions = s.max_extensions;
}

ndl_status ndl_study_run(const ndl_study_config* cfg, ndl_report** out) {
  if (any_null(cfg, out) || cfg->scenario == nullptr) return null_argument();
  return guard([&] {
    ndl::StudyConfig s;
    s.scenario = ndl::parse_scenario(cfg->scenario);
    if (cfg->activation) {
      s.activation = cfg->activation->act;
    } else if (s.scenario == ndl::Scenario::kCounterexample) {
      s.activation = ndl::Activation::parse("hermite:0,0,1,1");
    }
    s.d = cfg->d;
    s.trials = cfg->trials;
    s.flow = to_flow(cfg->flow);
    s.seed = cfg->seed;
    s.delta = cfg->delta;
    s.eta = cfg->eta;
    s.degree = cfg->degree;
    s.quadrature_order = cfg->quadrature_order;
    s.tensor_order = cfg->tensor_order;
    s.max_extensions = cfg->max_extensions;
    ndl::StudyResult r = ndl::run_probability_study(s);
    ndl_report* rep = wrap_report(std::move(r.report));
    rep->rate = r.rate;
    rep->exponentially_small = r.rate_exponentially_small ? 1 : 0;
    rep->envelope_violations = r.envelope_violations;
    *out = rep;
  });
}

ndl_status ndl_assumption1_verify(const ndl_activation* act, int d, int probes, int mc_samples, double delta,
                                  uint64_t seed, ndl_report** out) {
  if (any_null(act, out)) return null_argument();
  return guard([&] {
    const ndl::AssumptionBound bound = ndl::default_assumption_bound(act->act, delta);
    ndl::Assumption1Report r = ndl::assumption1_verify(act->act, ndl::InputDistribution::kGaussian, d, probes,
                                                       mc_samples, delta, bound, seed);
    ndl_report* rep = wrap_report(std::move(r.report));
    rep->min_ratio = r.min_ratio;
    rep->lambda = r.lambda;
    *out = rep;
  });
}

ndl_status ndl_sphere_tail_check(int d, double delta, int draws, uint64_t seed, ndl_report** out) {
  if (out == nullptr) return null_argument();
  return guard([&] { *out = wrap_report(ndl::sphere_tail_check(d, delta, draws, seed)); });
}

ndl_status ndl_gaussian_ball_check(int d, double eta, int draws, uint64_t seed, ndl_report** out) {
  if (out == nullptr) return null_argument();
  return guard([&] { *out = wrap_report(ndl::gaussian_ball_check(d, eta > 0.0 ? eta : ndl::default_eta(d), draws, seed)); });
}

ndl_status ndl_sphere_cosine_ks(int d, int draws, uint64_t seed, double* out) {
  if (out == nullptr) return null_argument();
  return guard([&] { *out = ndl::sphere_cosine_ks(d, draws, seed); });
}

void ndl_report_free(ndl_report* r) { delete r; }

ndl_status ndl_report_json(const ndl_report* r, const char** out) {
  if (any_null(r, out)) return null_argument();
  *out = r->json.c_str();
  return NDL_OK;
}

ndl_status ndl_report_summary(const ndl_report* r, const char** out) {
  if (any_null(r, out)) return null_argument();
  *out = r->summary.c_str();
  return NDL_OK;
}

ndl_status ndl_report_pass(const ndl_report* r, int* out) {
  if (any_null(r, out)) return null_argument();
  *out = r->report.pass ? 1 : 0;
  return NDL_OK;
}

ndl_status ndl_report_rate(const ndl_report* r, double* rate, int* exponentially_small, int* envelope_violations) {
  if (r == nullptr) return null_argument();
  if (rate) *rate = r->rate;
  if (exponentially_small) *exponentially_small = r->exponentially_small;
  if (envelope_violations) *envelope_violations = r->envelope_violations;
  return NDL_OK;
}

ndl_status ndl_report_ratio(const ndl_report* r, double* min_ratio, double* lambda) {
  if (r == nullptr) return null_argument();
  if (min_ratio) *min_ratio = r->min_ratio;
  if (lambda) *lambda = r->lambda;
  return NDL_OK;
}

/* acceptance */

ndl_status ndl_acceptance_run(const int* ids, size_t count, uint64_t seed, ndl_acceptance_callback cb, void* user,
                              int* failed) {
  if (count > 0 && ids == nullptr) return null_argument();
  return guard([&] {
    std::vector<int> which = count > 0 ? std::vector<int>(ids, ids + count) : std::vector<int>{};
    int bad = 0;
    ndl::run_acceptance(which, seed, [&](const ndl::AcceptanceResult& r) {
      bad += !r.pass;
      if (cb) cb(r.id, r.pass ? 1 : 0, ndl::format_result(r).c_str(), user);
    });
    if (failed) *failed = bad;
  });
}

uint64_t ndl_acceptance_default_seed(void) { return ndl::kAcceptanceSeed; }

}  // extern "C"
