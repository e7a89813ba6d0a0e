// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <span>
#include <vector>

#include "ndl/activations.hpp"
#include "ndl/dynamics.hpp"
#include "ndl/random.hpp"

namespace ndl {

/// n i.i.d. N(0, I_d) inputs, stored column-major as a d×n matrix.
class GaussianDataset {
 public:
  /// Bit-identical for equal (n, d, seed).
  static GaussianDataset generate(int n, int d, std::uint64_t seed);
  /// Wraps existing d×n samples.
  static GaussianDataset from_samples(Eigen::MatrixXd samples, std::uint64_t seed = 0);

  /// Binary layout: "NDL1", u32 n, u32 d, u32 reserved (16 bytes), then n·d
  /// little-endian f64, row-major. The seed is not stored and reads back as 0.
  static GaussianDataset load(const std::filesystem::path& path);
  void save(const std::filesystem::path& path) const;
  /// Header x1..xd, one sample per row.
  void save_csv(const std::filesystem::path& path) const;

  int n() const { return static_cast<int>(samples_.cols()); }
  int d() const { return static_cast<int>(samples_.rows()); }
  std::uint64_t seed() const { return seed_; }
  const Eigen::MatrixXd& samples() const { return samples_; }

 private:
  GaussianDataset(Eigen::MatrixXd samples, std::uint64_t seed) : samples_(std::move(samples)), seed_(seed) {}

  Eigen::MatrixXd samples_;
  std::uint64_t seed_;
};

/// Dataset, activation, unit teacher w* and ball radius Q; labels σ(w*ᵀxᵢ) are cached.
class EmpiricalContext {
 public:
  /// Throws DomainError unless ‖w*‖ = 1 ± 1e-12 and Q ≥ 0, DimensionError on size mismatch.
  EmpiricalContext(std::shared_ptr<const GaussianDataset> data, Activation act, std::vector<double> w_star,
                   double radius = 1.0);

  const GaussianDataset& data() const { return *data_; }
  const Activation& activation() const { return act_; }
  const Eigen::VectorXd& teacher() const { return w_star_; }
  double radius() const { return radius_; }
  const Eigen::VectorXd& labels() const { return labels_; }
  int n() const { return data_->n(); }
  int d() const { return data_->d(); }

 private:
  std::shared_ptr<const GaussianDataset> data_;
  Activation act_;
  Eigen::VectorXd w_star_;
  double radius_;
  Eigen::VectorXd labels_;
};

struct EmpiricalEval {
  double risk;
  Eigen::VectorXd gradient;
};

/// R̂ₙ(w) = 1/(2n) Σ (σ(wᵀxᵢ) − yᵢ)² and its gradient in one pass. Samples are
/// summed in fixed chunks combined by a pairwise tree, so the result does not
/// depend on the thread count.
EmpiricalEval empirical_eval(const EmpiricalContext& ctx, std::span<const double> w);
double empirical_risk(const EmpiricalContext& ctx, std::span<const double> w);
Eigen::VectorXd empirical_gradient(const EmpiricalContext& ctx, std::span<const double> w);

/// Uniform point of the ball ‖w − center‖ ≤ radius.
std::vector<double> ball_probe(std::span<const double> center, double radius, Rng& rng);

struct SupGap {
  double risk_gap;
  double grad_gap;
};

/// Maxima of |R̂ₙ − R| and ‖∇R̂ₙ − ∇R‖ over `probes` uniform points of E_Q.
/// R from the Hermite series, ∇R from the 2-D rule. Throws ConfigError when probes < 100.
SupGap sup_gap(const EmpiricalContext& ctx, int probes, std::uint64_t seed, int tensor_order = kDefaultTensorOrder);

/// Trajectory plus the teacher distance ‖ŵ_t − w*‖ and cosine ŵ_tᵀw* per recorded row.
struct EmpiricalRun {
  Trajectory trajectory;
  std::vector<double> distance;
  std::vector<double> cosine;
  double best_distance = 0.0;
  double best_time = 0.0;

  double terminal_distance() const { return distance.back(); }
  double terminal_cosine() const { return cosine.back(); }
  bool diverged() const { return trajectory.terminal_reason == TerminalReason::kDiverged; }
};

/// RK4 on ẇ = −∇R̂ₙ(w) from w = 0.
EmpiricalRun empirical_flow_zero_init(const EmpiricalContext& ctx, const FlowConfig& cfg);

/// ẇ = −(I − wwᵀ)∇R̂ₙ(w), renormalized every step. Throws DomainError unless ‖w0‖ = 1 ± 1e-10.
EmpiricalRun empirical_flow_sphere(const EmpiricalContext& ctx, std::span<const double> w0, const FlowConfig& cfg);

}  // namespace ndl
