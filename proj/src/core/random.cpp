// SPDX-License-Identifier: Apache-2.0
#include "ndl/random.hpp"

#include <cmath>

#include "ndl/error.hpp"

namespace ndl {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) {
  return splitmix64(splitmix64(master) ^ splitmix64(index + 0x632BE59BD9B4E019ULL));
}

std::vector<double> gaussian_vector(int d, Rng& rng) {
  if (d < 1) throw DimensionError("dimension must be positive");
  std::normal_distribution<double> normal;
  std::vector<double> v(static_cast<std::size_t>(d));
  for (double& x : v) x = normal(rng);
  return v;
}

std::vector<double> uniform_sphere(int d, Rng& rng) {
  for (;;) {
    auto v = gaussian_vector(d, rng);
    double n2 = 0.0;
    for (double x : v) n2 += x * x;
    if (n2 == 0.0) continue;
    const double inv = 1.0 / std::sqrt(n2);
    for (double& x : v) x *= inv;
    return v;
  }
}

}  // namespace ndl
