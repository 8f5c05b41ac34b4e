#include <gtest/gtest.h>

#include "mimodpd/channel.hpp"
#include "mimodpd/metrics.hpp"
#include "mimodpd/rng.hpp"

using namespace mimodpd;

namespace {

OfdmConfig ofdm(int nd, int osr) {
  OfdmConfig c;
  c.n_data = nd;
  c.osr = osr;
  return c;
}

// |sum_b e^{j pi b (sin t0 - sin t)}|^2 for a uniform half-wavelength array
double array_factor(int B, double t0, double t) {
  cplx acc = 0.0;
  for (int b = 0; b < B; ++b) acc += std::polar(1.0, kPi * b * (std::sin(t0) - std::sin(t)));
  return std::norm(acc);
}

}  // namespace

TEST(BandPlan, ThreeEqualBandsAtOsrFour) {
  auto plan = make_band_plan(ofdm(64, 4));
  EXPECT_EQ(plan.n_bins, 256);
  EXPECT_EQ(plan.inband.size(), 64u);
  EXPECT_EQ(plan.upper.size(), 64u);
  EXPECT_EQ(plan.lower.size(), 64u);
  auto bins = data_bins(ofdm(64, 4));
  std::sort(bins.begin(), bins.end());
  auto in = plan.inband;
  std::sort(in.begin(), in.end());
  EXPECT_EQ(in, bins);
  for (int k : plan.upper) EXPECT_GT(signed_bin(k, 256), 0);
  for (int k : plan.lower) EXPECT_LT(signed_bin(k, 256), 0);
}

TEST(BandPlan, CoarserWelchGridAndLowOsrRejected) {
  auto plan = make_band_plan(ofdm(64, 4), 64);
  EXPECT_EQ(plan.inband.size(), 16u);
  EXPECT_THROW(make_band_plan(ofdm(64, 2)), Error);
}

TEST(Evm, ScaleInvariantAndKnownValue) {
  std::vector<cplx> ref{1.0, 1.0, cplx(0, 1), cplx(0, -1)};
  EXPECT_NEAR(evm_pct(ref, ref), 0.0, 1e-12);
  std::vector<cplx> scaled;
  for (auto v : ref) scaled.push_back(v * std::polar(3.0, 0.4));
  EXPECT_NEAR(evm_pct(scaled, ref), 0.0, 1e-12);
  // error orthogonal to ref: c stays 1, EVM = sqrt(0.04 / 4)
  std::vector<cplx> rx{1.1, 0.9, cplx(0.1, 1), cplx(0.1, -1)};
  EXPECT_NEAR(evm_pct(rx, ref), 10.0, 1e-9);
  std::vector<cplx> zero(4, 0.0);
  EXPECT_TRUE(std::isinf(evm_pct(zero, ref)));
  EXPECT_THROW(evm_pct(std::vector<cplx>(3), ref), Error);
}

TEST(Evm, PerSubcarrierRemovesPerBinScaling) {
  Rng rng(1);
  CMat ref(20, 8), rx(20, 8);
  for (int s = 0; s < 20; ++s)
    for (int k = 0; k < 8; ++k) {
      ref(s, k) = rng.cnormal();
      rx(s, k) = ref(s, k) * std::polar(1.0 + 0.1 * k, 0.2 * k);
    }
  EXPECT_NEAR(evm_pct(rx, ref, true), 0.0, 1e-10);
  EXPECT_GT(evm_pct(rx, ref, false), 1.0);
}

TEST(Spectrum, ToneAmplitudeSquaredInItsBin) {
  const int n = 32;
  SignalBlock b{CMat(2, 3 * n)};
  for (int r = 0; r < 2; ++r)
    for (int t = 0; t < 3 * n; ++t) b.data(r, t) = std::polar(0.5 * (r + 1), 2 * kPi * 5 * t / n);
  auto p = symbol_spectrum(b, n);
  EXPECT_NEAR(p[5], 0.25 + 1.0, 1e-12);
  double rest = 0;
  for (int k = 0; k < n; ++k)
    if (k != 5) rest += p[k];
  EXPECT_LT(rest, 1e-20);
}

TEST(Aclr, WorstAdjacentBandAndSentinel) {
  auto cfg = ofdm(16, 4);
  auto plan = make_band_plan(cfg);
  std::vector<double> psd(64, 0.0);
  for (int k : plan.inband) psd[k] = 1.0;
  for (int k : plan.upper) psd[k] = 1e-3;
  for (int k : plan.lower) psd[k] = 2e-3;
  EXPECT_NEAR(aclr_dbc(psd, plan), 10 * std::log10(1.0 / 2e-3), 1e-12);
  for (int k : plan.upper) psd[k] = 0;
  for (int k : plan.lower) psd[k] = 0;
  EXPECT_EQ(aclr_dbc(psd, plan), kSentinelDb);
}

TEST(Pattern, SteeredArrayMatchesClosedFormAndPeaksAtTarget) {
  const int B = 16, n = 64;
  auto cfg = ofdm(16, 4);
  auto plan = make_band_plan(cfg);
  const double t0 = 30 * kPi / 180;
  // one data tone, conjugate-steered towards t0
  SignalBlock x{CMat(B, n)};
  const int k = plan.inband[3];
  for (int b = 0; b < B; ++b)
    for (int t = 0; t < n; ++t)
      x.data(b, t) = std::polar(1.0, kPi * b * std::sin(t0)) *
                     std::polar(1.0 / std::sqrt(n), 2 * kPi * k * t / n);
  auto grid = angle_grid(721);
  auto p = far_field_pattern(x, grid, plan);
  for (std::size_t a = 0; a < grid.size(); a += 37)
    EXPECT_NEAR(p.inband[a], array_factor(B, t0, grid[a]) / n, 1e-9);
  auto sll = side_lobe_level(p.inband);
  EXPECT_NEAR(grid[sll.main_index], t0, kPi / 720 + 1e-12);
  EXPECT_NEAR(sll.sll_db, -13.0, 0.5);
  for (double v : p.oob()) EXPECT_LT(v, 1e-20);
}

TEST(Pattern, TrpAclrIntegratesOverAngles) {
  BeamPattern p;
  p.inband = {1, 2, 3};
  p.upper = {0.01, 0.0, 0.0};
  p.lower = {0.0, 0.0, 0.03};
  EXPECT_NEAR(trp_aclr_dbc(p), 10 * std::log10(6.0 / 0.03), 1e-12);
}

TEST(SideLobe, SyntheticPattern) {
  std::vector<double> pat{0.1, 0.2, 0.1, 0.3, 1.0, 0.6, 0.05, 0.25, 0.01};
  auto s = side_lobe_level(pat);
  EXPECT_EQ(s.main_index, 4);
  // 0.6 is inside the half-power region; 0.3 is on the main lobe's flank;
  // the local maxima left are 0.2 and 0.25
  EXPECT_NEAR(s.sll_db, 10 * std::log10(0.25), 1e-12);
  std::vector<double> mono{1, 2, 3, 4};
  EXPECT_EQ(side_lobe_level(mono).sll_db, kSentinelDb);
}

TEST(ReceivedPower, SumsChannelWeightedBins) {
  Rng rng(3);
  const int B = 4, n = 16;
  ChannelScenario sc;
  sc.kind = ChannelKind::kIsotropicRayleigh;
  sc.n_antennas = B;
  sc.n_users = 1;
  sc.taps = 2;
  sc.pathloss = {0, 0, 0};
  sc.ue_positions = {{1.0, 0.0}};
  auto ch = sample_rayleigh(sc, n, rng);
  SignalBlock x{CMat(B, 2 * n)};
  for (int b = 0; b < B; ++b)
    for (int t = 0; t < 2 * n; ++t) x.data(b, t) = rng.cnormal();
  std::vector<int> bins{1, 5, 9};
  double want = 0;
  for (int s = 0; s < 2; ++s) {
    SignalBlock part{x.data.middleCols(s * n, n)};
    SignalGrid g = ofdm_demodulate(part);
    for (int k : bins) {
      cplx y = 0;
      for (int b = 0; b < B; ++b) y += ch.fd[k](b, 0) * g.data(b, k);
      want += std::norm(y);
    }
  }
  EXPECT_NEAR(received_band_power(x, ch, bins), want / 2, 1e-12);
}

TEST(Quantile, LinearInterpolation) {
  EXPECT_DOUBLE_EQ(quantile({4, 1, 3, 2}, 0.5), 2.5);
  EXPECT_DOUBLE_EQ(quantile({4, 1, 3, 2}, 0.0), 1.0);
  EXPECT_DOUBLE_EQ(quantile({4, 1, 3, 2}, 1.0), 4.0);
  EXPECT_THROW(quantile({}, 0.5), Error);
}
