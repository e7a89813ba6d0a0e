// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <json.hpp>
#include <string>
#include <vector>

#include "ndl/ndl.h"

namespace {

TEST(CApi, VersionAndStatusStrings) {
  EXPECT_STRNE(ndl_version(), "");
  EXPECT_STREQ(ndl_status_string(NDL_OK), "ok");
  EXPECT_GE(ndl_worker_count(), 1);
}

TEST(CApi, ParseErrorsSetLastError) {
  ndl_activation* a = nullptr;
  EXPECT_EQ(ndl_activation_parse("nope", &a), NDL_ERR_CONFIG);
  EXPECT_EQ(a, nullptr);
  EXPECT_STRNE(ndl_last_error(), "");
  EXPECT_EQ(ndl_activation_parse(nullptr, &a), NDL_ERR_NULL_ARGUMENT);
  ASSERT_EQ(ndl_activation_parse("relu", &a), NDL_OK);
  EXPECT_STREQ(ndl_last_error(), "");
  double v = 0.0;
  double s = 0.0;
  ASSERT_EQ(ndl_activation_eval(a, 2.0, &v, &s), NDL_OK);
  EXPECT_EQ(v, 2.0);
  EXPECT_EQ(s, 1.0);
  ndl_activation_free(a);
  ndl_activation_free(nullptr);
}

TEST(CApi, ReluLandscapeAndExpansion) {
  ndl_activation* a = nullptr;
  ASSERT_EQ(ndl_activation_parse("relu", &a), NDL_OK);
  ndl_landscape* land = nullptr;
  ASSERT_EQ(ndl_landscape_scan(a, 0.0, 1.0, 100, 200, &land), NDL_OK);
  size_t rows = 0;
  ASSERT_EQ(ndl_landscape_size(land, &rows), NDL_OK);
  EXPECT_EQ(rows, 101u);
  for (size_t i = 0; i < rows; ++i) {
    double beta = 0.0;
    double r = 0.0;
    ASSERT_EQ(ndl_landscape_row(land, i, &beta, &r, nullptr, nullptr), NDL_OK);
    EXPECT_NEAR(r, (beta - 1.0) * (beta - 1.0) / 4.0, 1e-8);
  }
  EXPECT_EQ(ndl_landscape_row(land, rows, nullptr, nullptr, nullptr, nullptr), NDL_ERR_RANGE);
  ndl_landscape_free(land);

  ndl_expansion* ex = nullptr;
  ASSERT_EQ(ndl_expand(a, 10, 0, &ex), NDL_OK);
  std::vector<double> c(11);
  EXPECT_EQ(ndl_expansion_coeffs(ex, c.data(), 5), NDL_ERR_DIMENSION);
  ASSERT_EQ(ndl_expansion_coeffs(ex, c.data(), c.size()), NDL_OK);
  EXPECT_NEAR(c[1], 0.5, 1e-12);
  ndl_expansion_free(ex);
  ndl_activation_free(a);
}

TEST(CApi, ReluZeroInitFlow) {
  ndl_activation* a = nullptr;
  ASSERT_EQ(ndl_activation_parse("relu", &a), NDL_OK);
  ndl_flow_config cfg;
  ndl_flow_config_default(&cfg);
  cfg.step = 1e-3;
  cfg.horizon = 4.0;
  cfg.stop_when_converged = 0;
  cfg.record_every = 1000;
  ndl_trajectory* tr = nullptr;
  ASSERT_EQ(ndl_flow_1d(a, 0.0, &cfg, 200, &tr), NDL_OK);
  size_t rows = 0;
  size_t dim = 0;
  ASSERT_EQ(ndl_trajectory_size(tr, &rows, &dim), NDL_OK);
  EXPECT_EQ(dim, 1u);
  for (size_t i = 0; i < rows; ++i) {
    double t = 0.0;
    double beta = 0.0;
    ASSERT_EQ(ndl_trajectory_row(tr, i, &t, &beta, nullptr), NDL_OK);
    EXPECT_NEAR(1.0 - beta, std::exp(-t / 2.0), 1e-4);
  }
  ndl_trajectory_free(tr);
  ndl_activation_free(a);
}

TEST(CApi, DatasetRoundTripAndEmpirical) {
  const auto path = std::filesystem::temp_directory_path() / "ndl_capi_test.bin";
  ndl_dataset* ds = nullptr;
  ASSERT_EQ(ndl_dataset_generate(64, 3, 7, &ds), NDL_OK);
  ASSERT_EQ(ndl_dataset_save(ds, path.string().c_str()), NDL_OK);
  ndl_dataset* back = nullptr;
  ASSERT_EQ(ndl_dataset_load(path.string().c_str(), &back), NDL_OK);
  int n = 0;
  int d = 0;
  ASSERT_EQ(ndl_dataset_shape(back, &n, &d), NDL_OK);
  EXPECT_EQ(n, 64);
  EXPECT_EQ(d, 3);

  ndl_activation* a = nullptr;
  ASSERT_EQ(ndl_activation_parse("silu", &a), NDL_OK);
  const double w_star[3] = {1.0, 0.0, 0.0};
  ndl_empirical* ctx = nullptr;
  ASSERT_EQ(ndl_empirical_create(back, a, w_star, 3, 1.0, &ctx), NDL_OK);
  // The context holds its own dataset reference.
  ndl_dataset_free(back);
  double risk = 1.0;
  double g[3] = {1.0, 1.0, 1.0};
  ASSERT_EQ(ndl_empirical_eval(ctx, w_star, 3, &risk, g), NDL_OK);
  EXPECT_EQ(risk, 0.0);
  for (double x : g) EXPECT_EQ(x, 0.0);
  const double bad[2] = {1.0, 0.0};
  EXPECT_EQ(ndl_empirical_create(ds, a, bad, 2, 1.0, &ctx), NDL_ERR_DIMENSION);

  ndl_empirical_free(ctx);
  ndl_activation_free(a);
  ndl_dataset_free(ds);
  std::filesystem::remove(path);
}

TEST(CApi, StudyReportJson) {
  ndl_study_config cfg;
  ndl_study_config_default(&cfg);
  cfg.scenario = "counterexample";
  cfg.d = 20;
  cfg.trials = 40;
  ndl_report* r = nullptr;
  ASSERT_EQ(ndl_study_run(&cfg, &r), NDL_OK);
  const char* text = nullptr;
  ASSERT_EQ(ndl_report_json(r, &text), NDL_OK);
  const auto j = nlohmann::json::parse(text);
  EXPECT_EQ(j.size(), 9u);
  EXPECT_EQ(j["name"], "counterexample");
  EXPECT_EQ(j["trials"], 40);
  EXPECT_EQ(j["trial_seeds"].size(), 40u);
  ndl_report_free(r);

  cfg.scenario = "nope";
  EXPECT_EQ(ndl_study_run(&cfg, &r), NDL_ERR_CONFIG);
}

struct Lines {
  int calls = 0;
  int passed = 0;
};

TEST(CApi, AcceptanceCallback) {
  const int ids[2] = {3, 12};
  Lines lines;
  int failed = -1;
  const auto cb = [](int, int pass, const char* line, void* user) {
    auto* l = static_cast<Lines*>(user);
    ++l->calls;
    l->passed += pass;
    EXPECT_NE(std::string(line).find("PASS"), std::string::npos);
  };
  ASSERT_EQ(ndl_acceptance_run(ids, 2, ndl_acceptance_default_seed(), cb, &lines, &failed), NDL_OK);
  EXPECT_EQ(lines.calls, 2);
  EXPECT_EQ(lines.passed, 2);
  EXPECT_EQ(failed, 0);
  const int bad[1] = {17};
  EXPECT_EQ(ndl_acceptance_run(bad, 1, 0, nullptr, nullptr, &failed), NDL_ERR_CONFIG);
}

}  // namespace
