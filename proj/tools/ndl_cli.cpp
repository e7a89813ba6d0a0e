// SPDX-License-Identifier: Apache-2.0
// Command-line driver over the C API.
#include <openssl/evp.h>

#include <CLI11.hpp>
#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <json.hpp>
#include <map>
#include <memory>
#include <sstream>
#include <stdexcept>
#include <string>
#include <type_traits>
#include <vector>

#include "ndl/ndl.h"

namespace {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

constexpr int kExitOk = 0;
constexpr int kExitAcceptance = 1;
constexpr int kExitUsage = 2;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct RunError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

void check(ndl_status s, const std::string& context) {
  if (s == NDL_OK) return;
  throw RunError(context + ": " + ndl_status_string(s) + ": " + ndl_last_error());
}

template <class T>
using Owned = std::unique_ptr<T, void (*)(T*)>;

Owned<ndl_activation> parse_activation(const std::string& id) {
  ndl_activation* a = nullptr;
  const ndl_status s = ndl_activation_parse(id.c_str(), &a);
  if (s != NDL_OK) throw UsageError("invalid activation '" + id + "': " + ndl_last_error());
  return {a, ndl_activation_free};
}

std::string file_stem(const std::string& id) {
  std::string out = id;
  for (char& c : out) {
    const bool keep = std::isalnum(static_cast<unsigned char>(c)) || c == '.' || c == '-';
    if (!keep) c = '_';
  }
  return out;
}

// ---- strict config fields ----

enum class Bound { kPositive, kNonNegative, kAny };

template <class T>
T strict_get(const json& j, const std::string& key) {
  const auto fail = [&](const char* want) { return UsageError("config key '" + key + "' must be " + want); };
  if constexpr (std::is_same_v<T, std::string>) {
    if (!j.is_string()) throw fail("a string");
  } else if constexpr (std::is_same_v<T, std::vector<std::string>>) {
    if (!j.is_array() || !std::all_of(j.begin(), j.end(), [](const json& e) { return e.is_string(); }))
      throw fail("an array of strings");
  } else if constexpr (std::is_same_v<T, std::vector<int>>) {
    if (!j.is_array() || !std::all_of(j.begin(), j.end(), [](const json& e) { return e.is_number_integer(); }))
      throw fail("an array of integers");
  } else if constexpr (std::is_same_v<T, bool>) {
    if (!j.is_boolean()) throw fail("a boolean");
  } else if constexpr (std::is_integral_v<T>) {
    if (!j.is_number_integer()) throw fail("an integer");
    if (std::is_unsigned_v<T> && j.is_number_integer() && !j.is_number_unsigned()) throw fail("non-negative");
  } else {
    if (!j.is_number()) throw fail("a number");
  }
  return j.get<T>();
}

struct Field {
  CLI::Option* option = nullptr;
  std::function<void(const json&)> assign;
  std::function<json()> echo;
  std::function<void()> validate;
};

class Command {
 public:
  Command(CLI::App& app, const std::string& name, const std::string& description)
      : name_(name), sub_(app.add_subcommand(name, description)) {
    sub_->add_option("--config", config_path_, "JSON config file; flags override its keys")
        ->check(CLI::ExistingFile);
  }

  template <class T>
  void add(const std::string& key, T& value, const std::string& description, Bound bound = Bound::kPositive) {
    std::string flag = "--" + key;
    std::replace(flag.begin(), flag.end(), '_', '-');
    Field f;
    f.option = sub_->add_option(flag, value, description)->capture_default_str();
    f.assign = [&value, key](const json& j) { value = strict_get<T>(j, key); };
    f.echo = [&value] { return json(value); };
    f.validate = [&value, key, bound] {
      if constexpr (std::is_arithmetic_v<T>) {
        if (bound == Bound::kPositive && !(value > 0)) throw UsageError(key + " must be positive");
        if (bound == Bound::kNonNegative && !(value >= 0)) throw UsageError(key + " must be non-negative");
        if constexpr (std::is_floating_point_v<T>) {
          if (!std::isfinite(value)) throw UsageError(key + " must be finite");
        }
      }
    };
    fields_.emplace(key, std::move(f));
    order_.push_back(key);
  }

  [[nodiscard]] bool active() const { return sub_->parsed(); }

  // Applies config-file keys not given as flags, then checks every bound.
  void finalize() {
    if (!config_path_.empty()) {
      std::ifstream in(config_path_, std::ios::binary);
      if (!in) throw UsageError("cannot read config file " + config_path_);
      json j;
      try {
        j = json::parse(in);
      } catch (const json::parse_error& e) {
        throw UsageError("config file " + config_path_ + ": " + e.what());
      }
      if (!j.is_object()) throw UsageError("config file must hold a JSON object");
      for (const auto& [key, value] : j.items()) {
        if (key == "command") {
          if (value != name_) throw UsageError("config command does not match '" + name_ + "'");
          continue;
        }
        const auto it = fields_.find(key);
        if (it == fields_.end()) throw UsageError("unknown config key '" + key + "' for " + name_);
        if (it->second.option->count() == 0) it->second.assign(value);
      }
    }
    for (const auto& key : order_) fields_.at(key).validate();
  }

  [[nodiscard]] json echo() const {
    json j;
    j["command"] = name_;
    for (const auto& key : order_) j[key] = fields_.at(key).echo();
    return j;
  }

 private:
  std::string name_;
  CLI::App* sub_;
  std::string config_path_;
  std::map<std::string, Field> fields_;
  std::vector<std::string> order_;
};

// ---- outputs and manifest ----

std::string git_blob_sha1(const std::string& content) {
  const std::string header = "blob " + std::to_string(content.size()) + '\0';
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  std::unique_ptr<EVP_MD_CTX, void (*)(EVP_MD_CTX*)> ctx(EVP_MD_CTX_new(), EVP_MD_CTX_free);
  if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha1(), nullptr) != 1 ||
      EVP_DigestUpdate(ctx.get(), header.data(), header.size()) != 1 ||
      EVP_DigestUpdate(ctx.get(), content.data(), content.size()) != 1 ||
      EVP_DigestFinal_ex(ctx.get(), md, &len) != 1) {
    throw RunError("sha1 digest failed");
  }
  static constexpr char kHex[] = "0123456789abcdef";
  std::string hex;
  for (unsigned int i = 0; i < len; ++i) {
    hex += kHex[md[i] >> 4];
    hex += kHex[md[i] & 15];
  }
  return hex;
}

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw RunError("cannot read " + p.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const fs::path& p, const std::string& content) {
  std::ofstream out(p, std::ios::binary);
  out << content;
  if (!out) throw RunError("cannot write " + p.string());
}

class Run {
 public:
  explicit Run(const std::string& out_dir) : dir_(out_dir) {
    std::error_code ec;
    fs::create_directories(dir_, ec);
    if (ec || !fs::is_directory(dir_)) throw RunError("cannot create output directory " + dir_.string());
  }

  [[nodiscard]] std::string path(const std::string& name) const { return (dir_ / name).string(); }
  void record(const std::string& name) { outputs_.push_back(name); }
  void write_json(const std::string& name, const json& j) {
    write_file(dir_ / name, j.dump(2) + "\n");
    record(name);
  }

  // Config echo, blob hash per output, hash of the output listing, master seed.
  void manifest(const json& config, const json& master_seed) const {
    json m;
    m["tool_version"] = ndl_version();
    m["config"] = config;
    m["master_seed"] = master_seed;
    json outs = json::array();
    std::string listing;
    for (const auto& name : outputs_) {
      const std::string content = read_file(dir_ / name);
      const std::string h = git_blob_sha1(content);
      outs.push_back({{"path", name}, {"bytes", content.size()}, {"git_sha1", h}});
      listing += h + " " + name + "\n";
    }
    m["outputs"] = outs;
    m["content_hash"] = git_blob_sha1(listing);
    write_file(dir_ / ("manifest_" + config["command"].get<std::string>() + ".json"), m.dump(2) + "\n");
  }

 private:
  fs::path dir_;
  std::vector<std::string> outputs_;
};

ndl_flow_config flow_config(double step, double horizon, double tolerance, int record_every) {
  ndl_flow_config f;
  ndl_flow_config_default(&f);
  f.step = step;
  f.horizon = horizon;
  f.tolerance = tolerance;
  f.record_every = record_every;
  return f;
}

struct Terminal {
  double t = 0.0;
  std::vector<double> state;
  double risk = 0.0;
  std::string reason;
};

Terminal terminal_of(const ndl_trajectory* tr) {
  size_t rows = 0;
  size_t dim = 0;
  check(ndl_trajectory_size(tr, &rows, &dim), "trajectory");
  Terminal t;
  t.state.resize(dim);
  check(ndl_trajectory_row(tr, rows - 1, &t.t, t.state.data(), &t.risk), "trajectory");
  const char* reason = nullptr;
  check(ndl_trajectory_terminal_reason(tr, &reason), "trajectory");
  t.reason = reason;
  return t;
}

// ---- subcommands ----

struct LandscapeArgs {
  std::vector<std::string> activations{"relu", "silu", "gelu", "sigmoid", "tanh"};
  double lo = 0.0;
  double hi = 1.5;
  int steps = 150;
  int order = 200;
  double flat_tolerance = 1e-8;
  std::string out = "out";
};

int cmd_landscape(const LandscapeArgs& a, const json& config) {
  if (!(a.hi > a.lo)) throw UsageError("hi must exceed lo");
  std::vector<Owned<ndl_activation>> acts;
  for (const auto& id : a.activations) acts.push_back(parse_activation(id));
  Run run(a.out);
  json summary = json::array();
  for (std::size_t i = 0; i < acts.size(); ++i) {
    const std::string& id = a.activations[i];
    ndl_landscape* raw = nullptr;
    check(ndl_landscape_scan(acts[i].get(), a.lo, a.hi, a.steps, a.order, &raw), "landscape " + id);
    const Owned<ndl_landscape> land(raw, ndl_landscape_free);
    const std::string csv = "landscape_" + file_stem(id) + ".csv";
    check(ndl_landscape_write_csv(land.get(), run.path(csv).c_str()), "landscape " + id);
    run.record(csv);

    size_t rows = 0;
    check(ndl_landscape_size(land.get(), &rows), "landscape");
    double flat = 0.0;
    bool any_near_zero = false;
    for (size_t k = 0; k < rows; ++k) {
      double beta = 0.0;
      double r = 0.0;
      double rp = 0.0;
      int is_min = 0;
      check(ndl_landscape_row(land.get(), k, &beta, &r, &rp, &is_min), "landscape");
      if (std::abs(beta) <= 0.1) {
        any_near_zero = true;
        flat = std::max(flat, std::abs(rp));
      }
    }
    size_t count = 0;
    check(ndl_landscape_minima_count(land.get(), &count), "landscape");
    json minima = json::array();
    json bad = json::array();
    int interior = 0;
    for (size_t k = 0; k < count; ++k) {
      double beta = 0.0;
      double r = 0.0;
      int is_bad = 0;
      check(ndl_landscape_minimum(land.get(), k, &beta, &r, &is_bad), "landscape");
      const json m = {{"beta", beta}, {"r", r}, {"bad", is_bad != 0}};
      minima.push_back(m);
      if (is_bad != 0) bad.push_back(m);
      if (beta > 0.0 && beta < 1.0 && std::abs(beta - 1.0) > 1e-6) ++interior;
    }
    const bool flat_near_zero = any_near_zero && flat <= a.flat_tolerance;
    summary.push_back({{"activation", id},
                       {"csv", csv},
                       {"minima", minima},
                       {"bad_minima", bad},
                       {"interior_minima_0_1", interior},
                       {"flat_near_zero", flat_near_zero}});
    std::cout << id << ": " << count << " minima, " << bad.size() << " bad, " << interior
              << " interior in (0,1)" << (flat_near_zero ? ", flat near beta = 0" : "") << "\n";
  }
  run.write_json("landscape_summary.json", json{{"activations", summary}});
  run.manifest(config, nullptr);
  return kExitOk;
}

struct ExpandArgs {
  std::string activation = "silu";
  int degree = 40;
  int order = 0;
  double delta = 0.5;
  std::string out = "out";
};

int cmd_expand(const ExpandArgs& a, const json& config) {
  const auto act = parse_activation(a.activation);
  Run run(a.out);
  ndl_expansion* raw = nullptr;
  check(ndl_expand(act.get(), a.degree, a.order, &raw), "expand " + a.activation);
  const Owned<ndl_expansion> ex(raw, ndl_expansion_free);
  const std::string stem = "expansion_" + file_stem(a.activation);
  check(ndl_expansion_write_csv(ex.get(), run.path(stem + ".csv").c_str()), "expand");
  run.record(stem + ".csv");

  std::vector<double> c(static_cast<std::size_t>(a.degree) + 1);
  check(ndl_expansion_coeffs(ex.get(), c.data(), c.size()), "expand");
  int order = 0;
  check(ndl_expansion_quadrature_order(ex.get(), &order), "expand");
  double l2 = 0.0;
  double residual = 0.0;
  int warning = 0;
  check(ndl_expansion_l2(ex.get(), &l2, &residual, &warning), "expand");
  double q = 0.0;
  check(ndl_expansion_q_sigma(ex.get(), a.delta, &q), "expand");
  double f1 = 0.0;
  check(ndl_expansion_correlation(ex.get(), 1.0, &f1, nullptr), "expand");
  const json j = {{"activation", a.activation},
                  {"degree", a.degree},
                  {"quadrature_order", order},
                  {"l2_total", l2},
                  {"residual", residual},
                  {"truncation_warning", warning != 0},
                  {"sigma_hat_1", c.size() > 1 ? c[1] : 0.0},
                  {"delta", a.delta},
                  {"q_sigma", q},
                  {"f_at_1", f1}};
  run.write_json(stem + ".json", j);
  std::cout << a.activation << ": degree " << a.degree << ", order " << order << ", sigma_hat_1 = " << j["sigma_hat_1"]
            << ", residual = " << residual << ", q_sigma(" << a.delta << ") = " << q
            << (warning != 0 ? " [truncation warning]" : "") << "\n";
  run.manifest(config, nullptr);
  return kExitOk;
}

struct FlowArgs {
  std::string mode = "1d";
  std::string activation = "relu";
  double init = 0.0;
  int d = 10;
  double eta = 0.0;
  std::uint64_t seed = 0;
  int degree = 40;
  int order = 0;
  int tensor_order = 0;
  double step = 1e-3;
  double horizon = 10.0;
  double tolerance = 1e-10;
  int record_every = 1;
  std::string out = "out";
};

int cmd_flow(const FlowArgs& a, const json& config) {
  const auto act = parse_activation(a.activation);
  const ndl_flow_config f = flow_config(a.step, a.horizon, a.tolerance, a.record_every);
  ndl_trajectory* raw = nullptr;
  std::string label;
  if (a.mode == "1d") {
    check(ndl_flow_1d(act.get(), a.init, &f, a.order, &raw), "flow 1d");
    label = "beta";
  } else if (a.mode == "sphere") {
    ndl_expansion* ex_raw = nullptr;
    check(ndl_expand(act.get(), a.degree, a.order, &ex_raw), "expand " + a.activation);
    const Owned<ndl_expansion> ex(ex_raw, ndl_expansion_free);
    check(ndl_flow_sphere(ex.get(), a.init, &f, &raw), "flow sphere");
    label = "a";
  } else if (a.mode == "population") {
    std::vector<double> w0(static_cast<std::size_t>(a.d));
    std::vector<double> w_star(w0.size(), 0.0);
    w_star[0] = 1.0;
    check(ndl_gaussian_init(a.d, a.eta, a.seed, w0.data()), "flow population init");
    check(ndl_flow_population(act.get(), w0.data(), w_star.data(), w0.size(), &f, a.tensor_order, &raw),
          "flow population");
    label = "w";
  } else {
    throw UsageError("mode must be 1d, sphere or population");
  }
  const Owned<ndl_trajectory> tr(raw, ndl_trajectory_free);
  Run run(a.out);
  const std::string csv = "flow_" + a.mode + "_" + file_stem(a.activation) + ".csv";
  check(ndl_trajectory_write_csv(tr.get(), run.path(csv).c_str(), label.c_str()), "flow");
  run.record(csv);
  const Terminal t = terminal_of(tr.get());
  std::cout << a.mode << " flow (" << a.activation << "): " << t.reason << " at t = " << t.t << ", risk = " << t.risk;
  if (t.state.size() == 1) std::cout << ", " << label << " = " << t.state[0];
  std::cout << "\n";
  run.manifest(config, a.mode == "population" ? json(a.seed) : json(nullptr));
  return kExitOk;
}

struct EmpiricalArgs {
  std::string mode = "zero-init";
  std::string activation = "silu";
  int d = 10;
  int n = 10000;
  std::uint64_t seed = 0;
  double radius = 1.0;
  int probes = 200;
  int tensor_order = 100;
  double step = 0.25;
  double horizon = 30.0;
  double tolerance = 1e-12;
  int record_every = 10;
  std::string dataset;
  std::string save_dataset;
  std::string save_csv;
  std::string out = "out";
};

int cmd_empirical(EmpiricalArgs& a, const json& config) {
  if (a.mode != "zero-init" && a.mode != "sphere" && a.mode != "sup-gap")
    throw UsageError("mode must be zero-init, sphere or sup-gap");
  const auto act = parse_activation(a.activation);
  ndl_dataset* ds_raw = nullptr;
  if (a.dataset.empty()) {
    check(ndl_dataset_generate(a.n, a.d, ndl_derive_seed(a.seed, 0), &ds_raw), "dataset generate");
  } else {
    check(ndl_dataset_load(a.dataset.c_str(), &ds_raw), "dataset load " + a.dataset);
  }
  const Owned<ndl_dataset> ds(ds_raw, ndl_dataset_free);
  check(ndl_dataset_shape(ds.get(), &a.n, &a.d), "dataset");

  Run run(a.out);
  if (!a.save_dataset.empty()) {
    check(ndl_dataset_save(ds.get(), run.path(a.save_dataset).c_str()), "dataset save");
    run.record(a.save_dataset);
  }
  if (!a.save_csv.empty()) {
    check(ndl_dataset_save_csv(ds.get(), run.path(a.save_csv).c_str()), "dataset csv");
    run.record(a.save_csv);
  }

  std::vector<double> w_star(static_cast<std::size_t>(a.d), 0.0);
  w_star[0] = 1.0;
  ndl_empirical* ctx_raw = nullptr;
  check(ndl_empirical_create(ds.get(), act.get(), w_star.data(), w_star.size(), a.radius, &ctx_raw), "empirical");
  const Owned<ndl_empirical> ctx(ctx_raw, ndl_empirical_free);

  json j = {{"activation", a.activation}, {"mode", a.mode}, {"n", a.n}, {"d", a.d}, {"radius", a.radius}};
  if (a.mode == "sup-gap") {
    double risk_gap = 0.0;
    double grad_gap = 0.0;
    check(ndl_empirical_sup_gap(ctx.get(), a.probes, ndl_derive_seed(a.seed, 2), &risk_gap, &grad_gap), "sup gap");
    j["probes"] = a.probes;
    j["risk_gap"] = risk_gap;
    j["grad_gap"] = grad_gap;
    std::cout << "sup gap over " << a.probes << " probes: risk " << risk_gap << ", gradient " << grad_gap << "\n";
  } else {
    const ndl_flow_config f = flow_config(a.step, a.horizon, a.tolerance, a.record_every);
    ndl_trajectory* raw = nullptr;
    double best = 0.0;
    if (a.mode == "zero-init") {
      check(ndl_empirical_flow_zero_init(ctx.get(), &f, &raw, &best), "empirical flow");
    } else {
      std::vector<double> w0(w_star.size());
      check(ndl_sphere_init(a.d, ndl_derive_seed(a.seed, 1), w0.data()), "sphere init");
      j["a0"] = w0[0];
      check(ndl_empirical_flow_sphere(ctx.get(), w0.data(), w0.size(), &f, &raw, &best), "empirical flow");
    }
    const Owned<ndl_trajectory> tr(raw, ndl_trajectory_free);
    const std::string csv = "empirical_" + a.mode + "_" + file_stem(a.activation) + ".csv";
    check(ndl_trajectory_write_csv(tr.get(), run.path(csv).c_str(), "w"), "empirical flow");
    run.record(csv);
    const Terminal t = terminal_of(tr.get());
    double dist2 = 0.0;
    for (std::size_t i = 0; i < t.state.size(); ++i) dist2 += (t.state[i] - w_star[i]) * (t.state[i] - w_star[i]);
    j["terminal_reason"] = t.reason;
    j["terminal_time"] = t.t;
    j["terminal_risk"] = t.risk;
    j["terminal_distance"] = std::sqrt(dist2);
    j["best_distance"] = best;
    std::cout << a.mode << " flow on n = " << a.n << ", d = " << a.d << ": " << t.reason << ", distance "
              << std::sqrt(dist2) << " (best " << best << ")\n";
  }
  run.write_json("empirical_" + a.mode + "_" + file_stem(a.activation) + ".json", j);
  run.manifest(config, a.seed);
  return kExitOk;
}

struct StudyArgs {
  std::string scenario = "high_prob";
  std::string activation;
  int d = 20;
  int trials = 500;
  std::uint64_t seed = 0;
  double delta = 0.5;
  double eta = 0.0;
  int mc_samples = 0;
  int degree = 40;
  int order = 400;
  int tensor_order = 64;
  int max_extensions = 9;
  double step = 0.0;
  double horizon = 0.0;
  double tolerance = 0.0;
  std::string out = "out";
};

int cmd_study(const StudyArgs& a, const json& config) {
  ndl_report* raw = nullptr;
  const auto activation = [&](const char* fallback) {
    return parse_activation(a.activation.empty() ? std::string(fallback) : a.activation);
  };
  bool probability = false;
  if (a.scenario == "assumption1") {
    const auto act = activation("silu");
    check(ndl_assumption1_verify(act.get(), a.d, a.trials, a.mc_samples, a.delta, a.seed, &raw), "assumption1");
  } else if (a.scenario == "sphere_tail") {
    check(ndl_sphere_tail_check(a.d, a.delta, a.trials, a.seed, &raw), "sphere_tail");
  } else if (a.scenario == "gaussian_ball") {
    check(ndl_gaussian_ball_check(a.d, a.eta, a.trials, a.seed, &raw), "gaussian_ball");
  } else {
    probability = true;
    ndl_study_config c;
    ndl_study_config_default(&c);
    const auto act = activation(a.scenario == "counterexample" ? "hermite:0,0,1,1" : "silu");
    c.scenario = a.scenario.c_str();
    c.activation = act.get();
    c.d = a.d;
    c.trials = a.trials;
    c.seed = a.seed;
    c.delta = a.delta;
    c.eta = a.eta;
    c.degree = a.degree;
    c.quadrature_order = a.order;
    c.tensor_order = a.tensor_order;
    c.max_extensions = a.max_extensions;
    if (a.step > 0.0) c.flow.step = a.step;
    if (a.horizon > 0.0) c.flow.horizon = a.horizon;
    if (a.tolerance > 0.0) c.flow.tolerance = a.tolerance;
    const ndl_status s = ndl_study_run(&c, &raw);
    if (s == NDL_ERR_CONFIG) throw UsageError(std::string("study: ") + ndl_last_error());
    check(s, "study " + a.scenario);
  }
  const Owned<ndl_report> report(raw, ndl_report_free);
  const char* text = nullptr;
  check(ndl_report_json(report.get(), &text), "report");
  const json j = json::parse(text);
  check(ndl_report_summary(report.get(), &text), "report");
  const std::string summary = text;

  Run run(a.out);
  run.write_json("study_" + a.scenario + ".json", j);
  std::cout << summary << "\n";
  if (probability) {
    double rate = 0.0;
    int small = 0;
    int violations = 0;
    check(ndl_report_rate(report.get(), &rate, &small, &violations), "report");
    std::cout << "rate: " << rate << (small != 0 ? " (exponentially small)" : "") << ", envelope violations: "
              << violations << "\n";
  } else if (a.scenario == "assumption1") {
    double min_ratio = 0.0;
    double lambda = 0.0;
    check(ndl_report_ratio(report.get(), &min_ratio, &lambda), "report");
    std::cout << "min ratio: " << min_ratio << ", lambda: " << lambda << "\n";
  }
  run.manifest(config, a.seed);
  return kExitOk;
}

struct VerifyArgs {
  std::vector<int> only;
  std::uint64_t seed = ndl_acceptance_default_seed();
  std::string out = "out";
};

int cmd_verify_all(const VerifyArgs& a, const json& config) {
  for (int id : a.only) {
    if (id < 1 || id > 16) throw UsageError("criterion ids must lie in [1, 16]");
  }
  Run run(a.out);
  std::string table;
  const auto on_line = [](int, int, const char* line, void* user) {
    std::cout << line << std::endl;
    *static_cast<std::string*>(user) += std::string(line) + "\n";
  };
  int failed = 0;
  check(ndl_acceptance_run(a.only.data(), a.only.size(), a.seed, on_line, &table, &failed), "verify-all");
  const std::string footer = failed == 0 ? "ALL PASSED" : std::to_string(failed) + " FAILED";
  std::cout << footer << "\n";
  write_file(run.path("verify_all.txt"), table + footer + "\n");
  run.record("verify_all.txt");
  run.manifest(config, a.seed);
  return failed == 0 ? kExitOk : kExitAcceptance;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Single-neuron learning dynamics driver"};
  app.set_version_flag("--version", std::string(ndl_version()));
  app.require_subcommand(1);

  LandscapeArgs land;
  Command c_land(app, "landscape", "1-D risk landscapes r(beta) per activation");
  c_land.add("activations", land.activations, "Activation ids");
  c_land.add("lo", land.lo, "Grid start", Bound::kNonNegative);
  c_land.add("hi", land.hi, "Grid end");
  c_land.add("steps", land.steps, "Grid intervals");
  c_land.add("order", land.order, "Gauss-Hermite order");
  c_land.add("flat_tolerance", land.flat_tolerance, "Max |r'| on [0, 0.1] counted as flat");
  c_land.add("out", land.out, "Output directory");

  ExpandArgs expand_args;
  Command c_exp(app, "expand", "Hermite coefficients of an activation");
  c_exp.add("activation", expand_args.activation, "Activation id");
  c_exp.add("degree", expand_args.degree, "Truncation degree K");
  c_exp.add("order", expand_args.order, "Quadrature order (0: default)", Bound::kNonNegative);
  c_exp.add("delta", expand_args.delta, "Margin for q_sigma");
  c_exp.add("out", expand_args.out, "Output directory");

  FlowArgs flow;
  Command c_flow(app, "flow", "Population gradient flows");
  c_flow.add("mode", flow.mode, "1d, sphere or population");
  c_flow.add("activation", flow.activation, "Activation id");
  c_flow.add("init", flow.init, "beta0 (1d) or a0 (sphere)", Bound::kAny);
  c_flow.add("d", flow.d, "Dimension (population)");
  c_flow.add("eta", flow.eta, "Gaussian init scale (0: 1/(sqrt(2) d))", Bound::kNonNegative);
  c_flow.add("seed", flow.seed, "Master seed", Bound::kNonNegative);
  c_flow.add("degree", flow.degree, "Expansion degree (sphere)");
  c_flow.add("order", flow.order, "Quadrature order (0: default)", Bound::kNonNegative);
  c_flow.add("tensor_order", flow.tensor_order, "Tensor rule order (0: default)", Bound::kNonNegative);
  c_flow.add("step", flow.step, "RK4 step");
  c_flow.add("horizon", flow.horizon, "Time horizon");
  c_flow.add("tolerance", flow.tolerance, "Convergence tolerance");
  c_flow.add("record_every", flow.record_every, "Record every k-th step");
  c_flow.add("out", flow.out, "Output directory");

  EmpiricalArgs emp;
  Command c_emp(app, "empirical", "Finite-sample risk and flows");
  c_emp.add("mode", emp.mode, "zero-init, sphere or sup-gap");
  c_emp.add("activation", emp.activation, "Activation id");
  c_emp.add("d", emp.d, "Dimension");
  c_emp.add("n", emp.n, "Sample count");
  c_emp.add("seed", emp.seed, "Master seed", Bound::kNonNegative);
  c_emp.add("radius", emp.radius, "Ball radius Q");
  c_emp.add("probes", emp.probes, "Probe count (sup-gap)");
  c_emp.add("tensor_order", emp.tensor_order, "Tensor rule order (sup-gap)");
  c_emp.add("step", emp.step, "RK4 step");
  c_emp.add("horizon", emp.horizon, "Time horizon");
  c_emp.add("tolerance", emp.tolerance, "Convergence tolerance");
  c_emp.add("record_every", emp.record_every, "Record every k-th step");
  c_emp.add("dataset", emp.dataset, "Load samples from an NDL1 file");
  c_emp.add("save_dataset", emp.save_dataset, "Write samples as NDL1 into the output directory");
  c_emp.add("save_csv", emp.save_csv, "Write samples as CSV into the output directory");
  c_emp.add("out", emp.out, "Output directory");

  StudyArgs st;
  Command c_st(app, "study", "Success-probability studies and assumption checks");
  c_st.add("scenario", st.scenario,
           "constant_prob, high_prob, counterexample, theorem1, assumption1, sphere_tail or gaussian_ball");
  c_st.add("activation", st.activation, "Activation id (default per scenario)");
  c_st.add("d", st.d, "Dimension");
  c_st.add("trials", st.trials, "Trials, probes or draws");
  c_st.add("seed", st.seed, "Master seed", Bound::kNonNegative);
  c_st.add("delta", st.delta, "Margin delta");
  c_st.add("eta", st.eta, "Gaussian init scale (0: 1/(sqrt(2) d))", Bound::kNonNegative);
  c_st.add("mc_samples", st.mc_samples, "Monte-Carlo samples (assumption1; 0: quadrature)", Bound::kNonNegative);
  c_st.add("degree", st.degree, "Expansion degree");
  c_st.add("order", st.order, "Quadrature order");
  c_st.add("tensor_order", st.tensor_order, "Tensor rule order");
  c_st.add("max_extensions", st.max_extensions, "Extra horizons for slow trials", Bound::kNonNegative);
  c_st.add("step", st.step, "RK4 step (0: default)", Bound::kNonNegative);
  c_st.add("horizon", st.horizon, "Time horizon (0: default)", Bound::kNonNegative);
  c_st.add("tolerance", st.tolerance, "Convergence tolerance (0: default)", Bound::kNonNegative);
  c_st.add("out", st.out, "Output directory");

  VerifyArgs ver;
  Command c_ver(app, "verify-all", "Run the acceptance suite");
  c_ver.add("only", ver.only, "Criterion ids to run (default: all)", Bound::kAny);
  c_ver.add("seed", ver.seed, "Master seed", Bound::kNonNegative);
  c_ver.add("out", ver.out, "Output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    for (Command* c : {&c_land, &c_exp, &c_flow, &c_emp, &c_st, &c_ver}) {
      if (!c->active()) continue;
      c->finalize();
      const json config = c->echo();
      if (c == &c_land) return cmd_landscape(land, config);
      if (c == &c_exp) return cmd_expand(expand_args, config);
      if (c == &c_flow) return cmd_flow(flow, config);
      if (c == &c_emp) return cmd_empirical(emp, config);
      if (c == &c_st) return cmd_study(st, config);
      return cmd_verify_all(ver, config);
    }
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  }
  return kExitUsage;
}
