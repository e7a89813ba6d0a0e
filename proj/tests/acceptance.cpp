// SPDX-License-Identifier: Apache-2.0
// Acceptance suite: one pass/fail line per criterion. Optional arguments
// select criteria by number. Exit status 1 when any selected criterion fails.
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <vector>

#include "ndl/acceptance.hpp"

int main(int argc, char** argv) {
  std::vector<int> ids;
  for (int i = 1; i < argc; ++i) ids.push_back(std::atoi(argv[i]));
  try {
    int failed = 0;
    ndl::run_acceptance(ids, ndl::kAcceptanceSeed, [&](const ndl::AcceptanceResult& r) {
      std::printf("%s\n", ndl::format_result(r).c_str());
      std::fflush(stdout);
      failed += !r.pass;
    });
    std::printf("%s: %d failed\n", failed ? "ACCEPTANCE FAILED" : "ACCEPTANCE PASSED", failed);
    return failed ? 1 : 0;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "acceptance: %s\n", e.what());
    return 2;
  }
}
