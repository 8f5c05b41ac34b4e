#include <gtest/gtest.h>

#include <cmath>
#include <cstring>
#include <filesystem>
#include <string>
#include <vector>

#include "mimodpd/mimodpd.h"

namespace fs = std::filesystem;

TEST(CApi, VersionAndStatusNames) {
  EXPECT_STRNE(mimodpd_version(), "");
  EXPECT_STREQ(mimodpd_status_name(MIMODPD_OK), "ok");
  EXPECT_STREQ(mimodpd_status_name(MIMODPD_ERR_CONFIG), "configuration error");
}

TEST(CApi, NullArgumentsAreRejected) {
  EXPECT_EQ(mimodpd_config_new(nullptr), MIMODPD_ERR_INVALID_ARGUMENT);
  EXPECT_NE(std::string(mimodpd_last_error()).find("out"), std::string::npos);
  EXPECT_EQ(mimodpd_config_from_preset(nullptr, nullptr), MIMODPD_ERR_INVALID_ARGUMENT);
  EXPECT_EQ(mimodpd_config_apply_json(nullptr, "{}"), MIMODPD_ERR_INVALID_ARGUMENT);
  EXPECT_EQ(mimodpd_config_validate(nullptr), MIMODPD_ERR_INVALID_ARGUMENT);
  EXPECT_EQ(mimodpd_run(nullptr, nullptr, nullptr), MIMODPD_ERR_INVALID_ARGUMENT);
  EXPECT_EQ(mimodpd_flops(nullptr, MIMODPD_FLOPS_FD_GMP, nullptr, nullptr, nullptr),
            MIMODPD_ERR_INVALID_ARGUMENT);
  EXPECT_EQ(mimodpd_report_scheme_count(nullptr), 0u);
  EXPECT_EQ(mimodpd_report_scheme_name(nullptr, 0), nullptr);
  mimodpd_config_free(nullptr);
  mimodpd_report_free(nullptr);
}

TEST(CApi, PresetsAndErrorCodes) {
  ASSERT_GT(mimodpd_preset_count(), 0u);
  EXPECT_EQ(mimodpd_preset_name(mimodpd_preset_count()), nullptr);
  mimodpd_config* c = nullptr;
  EXPECT_EQ(mimodpd_config_from_preset("nonexistent", &c), MIMODPD_ERR_CONFIG);
  EXPECT_NE(std::string(mimodpd_last_error()).find("nonexistent"), std::string::npos);
  ASSERT_EQ(mimodpd_config_from_preset(mimodpd_preset_name(0), &c), MIMODPD_OK);
  EXPECT_STREQ(mimodpd_last_error(), "");
  EXPECT_EQ(mimodpd_config_apply_json(c, R"({"bogus": 1})"), MIMODPD_ERR_CONFIG);
  EXPECT_EQ(mimodpd_config_apply_file(c, "/nonexistent/cfg.json"), MIMODPD_ERR_IO);
  EXPECT_EQ(mimodpd_config_validate(c), MIMODPD_OK);
  mimodpd_config_free(c);

  ASSERT_EQ(mimodpd_config_new(&c), MIMODPD_OK);
  EXPECT_EQ(mimodpd_config_validate(c), MIMODPD_ERR_CONFIG);  // no seed
  EXPECT_NE(std::string(mimodpd_last_error()).find("seed"), std::string::npos);
  EXPECT_EQ(mimodpd_config_set_seed(c, 4), MIMODPD_OK);
  EXPECT_EQ(mimodpd_config_validate(c), MIMODPD_ERR_CONFIG);  // no users yet
  ASSERT_EQ(mimodpd_config_apply_json(c, R"({"channel": {"users": [{"distance_m": 30, "angle_deg": 10}]}})"),
            MIMODPD_OK);
  EXPECT_EQ(mimodpd_config_validate(c), MIMODPD_OK) << mimodpd_last_error();
  mimodpd_config_free(c);
}

TEST(CApi, ToJsonReportsSizeAndTruncates) {
  mimodpd_config* c = nullptr;
  ASSERT_EQ(mimodpd_config_from_preset("los_u1", &c), MIMODPD_OK);
  size_t needed = 0;
  ASSERT_EQ(mimodpd_config_to_json(c, nullptr, 0, &needed), MIMODPD_OK);
  ASSERT_GT(needed, 2u);
  std::vector<char> full(needed);
  ASSERT_EQ(mimodpd_config_to_json(c, full.data(), full.size(), nullptr), MIMODPD_OK);
  EXPECT_EQ(std::strlen(full.data()), needed - 1);
  EXPECT_EQ(full[0], '{');
  char small[8];
  ASSERT_EQ(mimodpd_config_to_json(c, small, sizeof small, nullptr), MIMODPD_OK);
  EXPECT_EQ(std::string(small), std::string(full.data(), 7));
  EXPECT_EQ(mimodpd_config_to_json(c, nullptr, 4, nullptr), MIMODPD_ERR_INVALID_ARGUMENT);

  // canonical text reapplies to itself
  mimodpd_config* d = nullptr;
  ASSERT_EQ(mimodpd_config_new(&d), MIMODPD_OK);
  ASSERT_EQ(mimodpd_config_apply_json(d, full.data()), MIMODPD_OK);
  EXPECT_EQ(mimodpd_config_scheme_count(d), mimodpd_config_scheme_count(c));
  mimodpd_config_free(d);
  mimodpd_config_free(c);
}

TEST(CApi, FlopsMatchHandValue) {
  mimodpd_complexity_params p;
  mimodpd_complexity_defaults(&p);
  p.B = 1;
  int64_t num = 0, den = 0;
  double approx = 0;
  ASSERT_EQ(mimodpd_flops(&p, MIMODPD_FLOPS_TD_GMP_R1, &num, &den, &approx), MIMODPD_OK);
  EXPECT_EQ(num, 1010);
  EXPECT_EQ(den, 1);
  p.K = 0;
  EXPECT_NE(mimodpd_flops(&p, MIMODPD_FLOPS_TD_GMP, &num, &den, &approx), MIMODPD_OK);
}

TEST(CApi, TinyRunProducesReport) {
  mimodpd_config* c = nullptr;
  ASSERT_EQ(mimodpd_config_from_preset("los_u2", &c), MIMODPD_OK);
  ASSERT_EQ(mimodpd_config_apply_json(c, R"({
    "ofdm": {"n_data": 16, "osr": 4}, "channel": {"antennas": 4},
    "dpd": {"schemes": ["none", "fd_gmp"]},
    "training": {"symbols_per_batch": 2, "max_batches": 4},
    "eval": {"symbols": 4, "psd_segment": 64, "angles": 91, "victims": 8}})"),
            MIMODPD_OK)
      << mimodpd_last_error();
  const fs::path dir = fs::path(::testing::TempDir()) / "mimodpd_capi";
  fs::remove_all(dir);
  const std::string out = dir.string();
  mimodpd_run_options opt{out.c_str(), MIMODPD_MODE_RUN, 1, 1};
  mimodpd_report* r = nullptr;
  ASSERT_EQ(mimodpd_run(c, &opt, &r), MIMODPD_OK) << mimodpd_last_error();
  ASSERT_EQ(mimodpd_report_scheme_count(r), 2u);
  EXPECT_STREQ(mimodpd_report_scheme_name(r, 1), "fd_gmp");
  EXPECT_EQ(mimodpd_report_user_count(r), 2u);
  double evm = -1;
  ASSERT_EQ(mimodpd_report_evm(r, 0, 1, &evm), MIMODPD_OK);
  EXPECT_GT(evm, 0.0);
  EXPECT_EQ(mimodpd_report_evm(r, 0, 2, &evm), MIMODPD_ERR_INVALID_ARGUMENT);
  mimodpd_scheme_metrics m;
  ASSERT_EQ(mimodpd_report_metrics(r, 1, &m), MIMODPD_OK);
  EXPECT_EQ(m.batches, 4u);
  EXPECT_TRUE(std::isfinite(m.victim_median_mimo_dbm));
  ASSERT_EQ(mimodpd_report_metrics(r, 0, &m), MIMODPD_OK);
  EXPECT_TRUE(std::isnan(m.initial_loss));
  EXPECT_GT(mimodpd_report_gain(r), 0.0);
  ASSERT_GT(mimodpd_report_file_count(r), 0u);
  for (size_t i = 0; i < mimodpd_report_file_count(r); ++i)
    EXPECT_TRUE(fs::exists(mimodpd_report_file(r, i))) << mimodpd_report_file(r, i);
  mimodpd_report_free(r);
  mimodpd_config_free(c);
  fs::remove_all(dir);
}
