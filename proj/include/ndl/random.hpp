// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <random>
#include <vector>

namespace ndl {

using Rng = std::mt19937_64;

/// One splitmix64 output for state x.
std::uint64_t splitmix64(std::uint64_t x);

/// Counter-based child seed: independent of the order in which children are drawn.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index);

/// d i.i.d. N(0, 1) draws.
std::vector<double> gaussian_vector(int d, Rng& rng);

/// Uniform on the unit sphere S^{d−1}.
std::vector<double> uniform_sphere(int d, Rng& rng);

}  // namespace ndl
