// SPDX-License-Identifier: Apache-2.0
#include "ndl/io.hpp"

#include <charconv>
#include <fstream>

#include "ndl/dynamics.hpp"
#include "ndl/error.hpp"
#include "ndl/hermite.hpp"
#include "ndl/landscape.hpp"

namespace ndl {

std::string format_double(double x) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

void write_text(const std::filesystem::path& path, std::string_view text) {
  std::error_code ec;
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path(), ec);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!out) throw IoError("failed writing " + path.string());
}

void write_landscape_csv(const OneDimLandscape& land, const std::filesystem::path& path) {
  const auto flags = land.local_min_flags();
  std::string s = "beta,r,r_prime,is_local_min\n";
  for (std::size_t i = 0; i < land.betas.size(); ++i) {
    s += format_double(land.betas[i]) + ',' + format_double(land.r[i]) + ',' + format_double(land.r_prime[i]) +
         ',' + (flags[i] ? '1' : '0') + '\n';
  }
  write_text(path, s);
}

void write_expansion_csv(const HermiteExpansion& ex, const std::filesystem::path& path) {
  std::string s = "k,sigma_hat\n";
  for (std::size_t k = 0; k < ex.coeffs().size(); ++k) s += std::to_string(k) + ',' + format_double(ex.coeffs()[k]) + '\n';
  write_text(path, s);
}

void write_trajectory_csv(const Trajectory& tr, const std::filesystem::path& path, std::string_view state_label) {
  std::string s = "t";
  if (tr.dim == 1) {
    s += ',';
    s += state_label;
  } else {
    for (int k = 1; k <= tr.dim; ++k) s += ',' + std::string(state_label) + std::to_string(k);
  }
  s += ",risk\n";
  for (std::size_t i = 0; i < tr.size(); ++i) {
    s += format_double(tr.times[i]);
    for (double x : tr.state(i)) s += ',' + format_double(x);
    s += ',' + format_double(tr.risks[i]) + '\n';
  }
  write_text(path, s);
}

}  // namespace ndl
