// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>
#include <string>
#include <string_view>

namespace ndl {

class HermiteExpansion;
struct OneDimLandscape;
struct Trajectory;

/// Shortest round-trip decimal form with '.' as separator, independent of locale.
std::string format_double(double x);

/// Columns beta, r, r_prime, is_local_min (0 or 1).
void write_landscape_csv(const OneDimLandscape& land, const std::filesystem::path& path);

/// Columns k, sigma_hat.
void write_expansion_csv(const HermiteExpansion& ex, const std::filesystem::path& path);

/// Columns t, the state, risk. A 1-D state is one column named `state_label`;
/// otherwise columns `state_label`1..`state_label`d.
void write_trajectory_csv(const Trajectory& tr, const std::filesystem::path& path,
                          std::string_view state_label = "state");

/// Writes `text` verbatim, creating parent directories. Throws IoError.
void write_text(const std::filesystem::path& path, std::string_view text);

}  // namespace ndl
