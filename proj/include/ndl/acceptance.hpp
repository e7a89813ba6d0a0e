// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace ndl {

inline constexpr int kAcceptanceCount = 16;
inline constexpr std::uint64_t kAcceptanceSeed = 20240917;

struct AcceptanceResult {
  int id = 0;
  std::string title;
  bool pass = false;
  /// Measured quantities against their thresholds.
  std::string detail;
  double seconds = 0.0;
};

/// Runs criterion `id` in [1, 16]. Throws ConfigError for other ids; errors
/// raised inside a check are reported as a failed result.
AcceptanceResult run_acceptance_check(int id, std::uint64_t seed = kAcceptanceSeed);

/// Runs `ids` (all when empty) in order, calling `on_result` after each one.
std::vector<AcceptanceResult> run_acceptance(const std::vector<int>& ids = {},
                                             std::uint64_t seed = kAcceptanceSeed,
                                             const std::function<void(const AcceptanceResult&)>& on_result = {});

/// "[PASS] 07 q_sigma margins: ... (0.12 s)".
std::string format_result(const AcceptanceResult& r);

}  // namespace ndl
