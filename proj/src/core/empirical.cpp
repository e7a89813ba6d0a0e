// SPDX-License-Identifier: Apache-2.0
#include "ndl/empirical.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <random>
#include <string>

#include "ndl/error.hpp"
#include "ndl/hermite.hpp"
#include "ndl/landscape.hpp"
#include "ndl/parallel.hpp"

namespace ndl {

namespace {

constexpr char kMagic[4] = {'N', 'D', 'L', '1'};
constexpr std::size_t kHeaderBytes = 16;
constexpr Eigen::Index kChunk = 2048;

template <class T>
T to_little(T v) {
  if constexpr (std::endian::native == std::endian::little) {
    return v;
  } else {
    std::array<unsigned char, sizeof(T)> b;
    std::memcpy(b.data(), &v, sizeof(T));
    for (std::size_t i = 0; i < sizeof(T) / 2; ++i) std::swap(b[i], b[sizeof(T) - 1 - i]);
    std::memcpy(&v, b.data(), sizeof(T));
    return v;
  }
}

void put_u32(char* out, std::uint32_t v) {
  v = to_little(v);
  std::memcpy(out, &v, 4);
}

std::uint32_t get_u32(const char* in) {
  std::uint32_t v;
  std::memcpy(&v, in, 4);
  return to_little(v);
}

Eigen::VectorXd to_vec(std::span<const double> v) {
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

EmpiricalRun summarize(Trajectory tr, const Eigen::VectorXd& w_star) {
  EmpiricalRun run;
  run.best_distance = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < tr.size(); ++i) {
    const Eigen::VectorXd w = to_vec(tr.state(i));
    const double dist = (w - w_star).norm();
    run.distance.push_back(dist);
    const double wn = w.norm();
    run.cosine.push_back(wn > 0.0 ? w.dot(w_star) / wn : 0.0);
    if (dist < run.best_distance) {
      run.best_distance = dist;
      run.best_time = tr.times[i];
    }
  }
  run.trajectory = std::move(tr);
  return run;
}

}  // namespace

GaussianDataset GaussianDataset::generate(int n, int d, std::uint64_t seed) {
  if (n < 1 || d < 1) throw DimensionError("dataset needs n >= 1 and d >= 1");
  Eigen::MatrixXd x(d, n);
  Rng rng(seed);
  std::normal_distribution<double> normal;
  double* p = x.data();
  for (Eigen::Index i = 0; i < x.size(); ++i) p[i] = normal(rng);
  return GaussianDataset(std::move(x), seed);
}

GaussianDataset GaussianDataset::from_samples(Eigen::MatrixXd samples, std::uint64_t seed) {
  if (samples.rows() < 1 || samples.cols() < 1) throw DimensionError("dataset needs n >= 1 and d >= 1");
  return GaussianDataset(std::move(samples), seed);
}

GaussianDataset GaussianDataset::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open dataset " + path.string());
  char header[kHeaderBytes];
  if (!in.read(header, kHeaderBytes)) throw IoError("dataset header truncated: " + path.string());
  if (std::memcmp(header, kMagic, 4) != 0) throw IoError("not an NDL1 dataset: " + path.string());
  const std::uint32_t n = get_u32(header + 4);
  const std::uint32_t d = get_u32(header + 8);
  if (n == 0 || d == 0) throw IoError("dataset has an empty dimension: " + path.string());
  Eigen::MatrixXd x(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(n));
  const std::streamsize bytes = static_cast<std::streamsize>(x.size() * sizeof(double));
  if (!in.read(reinterpret_cast<char*>(x.data()), bytes)) throw IoError("dataset body truncated: " + path.string());
  if (in.peek() != std::char_traits<char>::eof()) throw IoError("trailing bytes after dataset: " + path.string());
  if constexpr (std::endian::native != std::endian::little) {
    for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = to_little(x.data()[i]);
  }
  return GaussianDataset(std::move(x), 0);
}

void GaussianDataset::save(const std::filesystem::path& path) const {
  if (samples_.cols() > std::numeric_limits<std::uint32_t>::max() ||
      samples_.rows() > std::numeric_limits<std::uint32_t>::max()) {
    throw RangeError("dataset too large for the NDL1 header");
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write dataset " + path.string());
  char header[kHeaderBytes] = {};
  std::memcpy(header, kMagic, 4);
  put_u32(header + 4, static_cast<std::uint32_t>(n()));
  put_u32(header + 8, static_cast<std::uint32_t>(d()));
  out.write(header, kHeaderBytes);
  if constexpr (std::endian::native == std::endian::little) {
    out.write(reinterpret_cast<const char*>(samples_.data()),
              static_cast<std::streamsize>(samples_.size() * sizeof(double)));
  } else {
    for (Eigen::Index i = 0; i < samples_.size(); ++i) {
      const double v = to_little(samples_.data()[i]);
      out.write(reinterpret_cast<const char*>(&v), sizeof v);
    }
  }
  if (!out) throw IoError("failed writing dataset " + path.string());
}

void GaussianDataset::save_csv(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write dataset " + path.string());
  for (int k = 0; k < d(); ++k) out << (k ? ",x" : "x") << k + 1;
  out << '\n';
  char buf[32];
  for (int i = 0; i < n(); ++i) {
    for (int k = 0; k < d(); ++k) {
      if (k) out << ',';
      const auto res = std::to_chars(buf, buf + sizeof buf, samples_(k, i));
      out.write(buf, res.ptr - buf);
    }
    out << '\n';
  }
  if (!out) throw IoError("failed writing dataset " + path.string());
}

EmpiricalContext::EmpiricalContext(std::shared_ptr<const GaussianDataset> data, Activation act,
                                   std::vector<double> w_star, double radius)
    : data_(std::move(data)), act_(std::move(act)), radius_(radius) {
  if (!data_) throw ConfigError("empirical context needs a dataset");
  if (static_cast<int>(w_star.size()) != data_->d()) throw DimensionError("teacher dimension differs from dataset");
  w_star_ = to_vec(w_star);
  if (!(std::abs(w_star_.norm() - 1.0) <= 1e-12)) throw DomainError("teacher must be a unit vector");
  if (!(radius >= 0.0) || !std::isfinite(radius)) throw DomainError("ball radius must be non-negative");
  const Eigen::VectorXd z = data_->samples().transpose() * w_star_;
  labels_.resize(z.size());
  for (Eigen::Index i = 0; i < z.size(); ++i) labels_[i] = act_(z[i]);
}

EmpiricalEval empirical_eval(const EmpiricalContext& ctx, std::span<const double> w) {
  if (static_cast<int>(w.size()) != ctx.d()) throw DimensionError("w dimension differs from dataset");
  const Eigen::Map<const Eigen::VectorXd> wv(w.data(), static_cast<Eigen::Index>(w.size()));
  const Eigen::MatrixXd& x = ctx.data().samples();
  const Eigen::Index n = x.cols();
  const Eigen::Index d = x.rows();
  const std::size_t chunks = static_cast<std::size_t>((n + kChunk - 1) / kChunk);

  std::vector<double> risk(chunks);
  Eigen::MatrixXd grad(d, static_cast<Eigen::Index>(chunks));
  parallel_for(chunks, [&](std::size_t c) {
    const Eigen::Index begin = static_cast<Eigen::Index>(c) * kChunk;
    const Eigen::Index len = std::min(kChunk, n - begin);
    const auto block = x.middleCols(begin, len);
    Eigen::VectorXd z = block.transpose() * wv;
    double r = 0.0;
    for (Eigen::Index i = 0; i < len; ++i) {
      const ValueAndSlope s = ctx.activation().value_and_slope(z[i]);
      const double diff = s.value - ctx.labels()[begin + i];
      r += diff * diff;
      z[i] = diff * s.slope;
    }
    risk[c] = r;
    grad.col(static_cast<Eigen::Index>(c)).noalias() = block * z;
  });

  // Pairwise tree over chunk partials.
  for (std::size_t width = 1; width < chunks; width *= 2) {
    for (std::size_t i = 0; i + width < chunks; i += 2 * width) {
      risk[i] += risk[i + width];
      grad.col(static_cast<Eigen::Index>(i)) += grad.col(static_cast<Eigen::Index>(i + width));
    }
  }
  const double inv_n = 1.0 / static_cast<double>(n);
  return {0.5 * risk[0] * inv_n, grad.col(0) * inv_n};
}

double empirical_risk(const EmpiricalContext& ctx, std::span<const double> w) { return empirical_eval(ctx, w).risk; }

Eigen::VectorXd empirical_gradient(const EmpiricalContext& ctx, std::span<const double> w) {
  return empirical_eval(ctx, w).gradient;
}

std::vector<double> ball_probe(std::span<const double> center, double radius, Rng& rng) {
  const int d = static_cast<int>(center.size());
  std::vector<double> out(center.begin(), center.end());
  if (radius == 0.0) return out;
  const auto dir = uniform_sphere(d, rng);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  const double rho = radius * std::pow(unif(rng), 1.0 / d);
  for (int k = 0; k < d; ++k) out[k] += rho * dir[k];
  return out;
}

SupGap sup_gap(const EmpiricalContext& ctx, int probes, std::uint64_t seed, int tensor_order) {
  if (probes < 100) throw ConfigError("sup_gap needs at least 100 probes");
  const Activation& act = ctx.activation();
  const TensorRule rule = tensor_rule(resolve_tensor_order(act, tensor_order), 1e-14);
  const QuadratureRule& qr = cached_gauss_hermite(resolve_order(act, kDefaultQuadratureOrder));
  const std::span<const double> ws(ctx.teacher().data(), static_cast<std::size_t>(ctx.d()));

  std::vector<double> risk_gap(static_cast<std::size_t>(probes)), grad_gap(static_cast<std::size_t>(probes));
  parallel_for(static_cast<std::size_t>(probes), [&](std::size_t p) {
    Rng rng(derive_seed(seed, p));
    const auto w = ball_probe(ws, ctx.radius(), rng);
    const Eigen::VectorXd wv = to_vec(w);
    const EmpiricalEval emp = empirical_eval(ctx, w);
    const double dist = (wv - ctx.teacher()).norm();
    if (dist == 0.0) {
      // Realizable labels: both risks and gradients vanish at w*.
      risk_gap[p] = std::abs(emp.risk);
      grad_gap[p] = emp.gradient.norm();
      return;
    }
    const double norm = wv.norm();
    const double a = std::clamp(wv.dot(ctx.teacher()) / norm, -1.0, 1.0);
    const double pop_risk = offsphere_risk(act, norm, a, kDefaultExpansionDegree, qr);
    const PopulationEval pop = population_eval(act, w, ws, rule);
    risk_gap[p] = std::abs(emp.risk - pop_risk);
    grad_gap[p] = (emp.gradient - to_vec(pop.gradient)).norm();
  });
  SupGap out{0.0, 0.0};
  for (int p = 0; p < probes; ++p) {
    out.risk_gap = std::max(out.risk_gap, risk_gap[p]);
    out.grad_gap = std::max(out.grad_gap, grad_gap[p]);
  }
  return out;
}

EmpiricalRun empirical_flow_zero_init(const EmpiricalContext& ctx, const FlowConfig& cfg) {
  const std::vector<double> w0(static_cast<std::size_t>(ctx.d()), 0.0);
  auto field = [&](std::span<const double> w, std::span<double> v) {
    const EmpiricalEval e = empirical_eval(ctx, w);
    for (std::size_t k = 0; k < v.size(); ++k) v[k] = -e.gradient[static_cast<Eigen::Index>(k)];
    return e.risk;
  };
  return summarize(integrate_flow(w0, field, {}, cfg), ctx.teacher());
}

EmpiricalRun empirical_flow_sphere(const EmpiricalContext& ctx, std::span<const double> w0, const FlowConfig& cfg) {
  if (static_cast<int>(w0.size()) != ctx.d()) throw DimensionError("w0 dimension differs from dataset");
  if (!(std::abs(to_vec(w0).norm() - 1.0) <= 1e-10)) throw DomainError("w0 must be a unit vector");
  auto field = [&](std::span<const double> w, std::span<double> v) {
    const EmpiricalEval e = empirical_eval(ctx, w);
    const Eigen::Map<const Eigen::VectorXd> wv(w.data(), static_cast<Eigen::Index>(w.size()));
    Eigen::Map<Eigen::VectorXd> out(v.data(), static_cast<Eigen::Index>(v.size()));
    out = -(e.gradient - wv.dot(e.gradient) * wv);
    return e.risk;
  };
  auto renormalize = [](std::span<double> w) {
    Eigen::Map<Eigen::VectorXd> wv(w.data(), static_cast<Eigen::Index>(w.size()));
    wv /= wv.norm();
  };
  return summarize(integrate_flow(w0, field, renormalize, cfg), ctx.teacher());
}

}  // namespace ndl
