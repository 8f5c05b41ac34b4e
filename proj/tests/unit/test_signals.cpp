#include <gtest/gtest.h>

#include <set>

#include "mimodpd/fft.hpp"
#include "mimodpd/rng.hpp"
#include "mimodpd/signals.hpp"
#include "oracles.hpp"

using namespace mimodpd;

TEST(Fft, MatchesDirectDftUpTo64) {
  Rng rng(11);
  for (int n : {1, 2, 4, 8, 16, 32, 64}) {
    std::vector<cplx> x(n);
    for (auto& v : x) v = rng.cnormal();
    for (bool inv : {false, true}) {
      auto want = oracle::direct_dft(x, inv);
      auto got = x;
      fft_unitary(got.data(), got.size(), inv);
      for (int k = 0; k < n; ++k) EXPECT_LT(std::abs(got[k] - want[k]), 1e-9) << n << " " << k;
    }
  }
}

TEST(Fft, RoundTripAndParseval) {
  Rng rng(3);
  std::vector<cplx> x(1024);
  for (auto& v : x) v = rng.cnormal();
  auto y = x;
  fft_unitary(y.data(), y.size(), false);
  double ex = 0, ey = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    ex += std::norm(x[i]);
    ey += std::norm(y[i]);
  }
  EXPECT_NEAR(ex, ey, 1e-9 * ex);
  fft_unitary(y.data(), y.size(), true);
  for (std::size_t i = 0; i < x.size(); ++i) EXPECT_LT(std::abs(y[i] - x[i]), 1e-12);
}

TEST(Fft, RejectsEmptyBuffer) {
  std::vector<cplx> x;
  EXPECT_THROW(fft_unitary(x.data(), 0, false), Error);
}

TEST(Qam, UnitAveragePowerAndDistinctPoints) {
  for (int order : {4, 16, 64, 256}) {
    auto pts = qam_constellation(order);
    ASSERT_EQ(static_cast<int>(pts.size()), order);
    double p = 0;
    std::set<std::pair<double, double>> uniq;
    for (auto c : pts) {
      p += std::norm(c);
      uniq.insert({std::round(c.real() * 1e9), std::round(c.imag() * 1e9)});
    }
    EXPECT_NEAR(p / order, 1.0, 1e-12) << order;
    EXPECT_EQ(static_cast<int>(uniq.size()), order);
  }
}

TEST(Qam, GrayNeighboursDifferInOneBit) {
  // nearest horizontal/vertical neighbours of each 16-QAM point differ in one label bit
  const int order = 16;
  auto pts = qam_constellation(order);
  const double d = 2.0 / std::sqrt(10.0);
  for (int a = 0; a < order; ++a)
    for (int b = 0; b < order; ++b)
      if (std::abs(std::abs(pts[a] - pts[b]) - d) < 1e-9)
        EXPECT_EQ(__builtin_popcount(a ^ b), 1) << a << " " << b;
}

TEST(Qam, BitLengthMustDivide) {
  std::vector<std::uint8_t> bits(7, 0);
  EXPECT_THROW(map_qam(bits, 16), Error);
  EXPECT_THROW(qam_constellation(8), Error);
}

TEST(Ofdm, GridHasExactlyGuardZeroColumnsAndRoundTrips) {
  OfdmConfig cfg;
  cfg.n_data = 64;
  cfg.osr = 4;
  Rng rng(5);
  CMat s = random_qam(rng, 3, cfg.n_data, 16);
  SignalGrid g = build_grid(s, cfg);
  int zero_cols = 0;
  for (int k = 0; k < cfg.n_total(); ++k) zero_cols += g.data.col(k).norm() == 0.0;
  EXPECT_EQ(zero_cols, cfg.n_guard());
  // data sits symmetrically around DC: bins [-N_d/2, N_d/2)
  for (int k : data_bins(cfg)) {
    const int f = signed_bin(k, cfg.n_total());
    EXPECT_GE(f, -cfg.n_data / 2);
    EXPECT_LT(f, cfg.n_data / 2);
  }
  SignalGrid back = ofdm_demodulate(ofdm_modulate(g));
  EXPECT_LT((extract_data(back, cfg) - s).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Ofdm, ModulateIsRowwiseInverseDft) {
  OfdmConfig cfg;
  cfg.n_data = 8;
  cfg.osr = 4;
  Rng rng(9);
  SignalGrid g = build_grid(random_qam(rng, 2, cfg.n_data, 4), cfg);
  SignalBlock b = ofdm_modulate(g);
  for (int r = 0; r < 2; ++r) {
    std::vector<cplx> row(g.data.row(r).data(), g.data.row(r).data() + cfg.n_total());
    auto want = oracle::direct_dft(row, true);
    for (int k = 0; k < cfg.n_total(); ++k) EXPECT_LT(std::abs(b.data(r, k) - want[k]), 1e-12);
  }
}

TEST(Ofdm, ConfigValidation) {
  OfdmConfig bad;
  bad.n_data = 100;
  EXPECT_THROW(bad.validate(), Error);
  OfdmConfig ok;
  EXPECT_NO_THROW(ok.validate());
  EXPECT_EQ(ok.n_total(), ok.n_data * ok.osr);
}

TEST(Psd, WhiteNoiseIsFlatWithCorrectTotalPower) {
  Rng rng(21);
  std::vector<cplx> x(1 << 16);
  for (auto& v : x) v = rng.cnormal(2.0);
  auto p = estimate_psd(x.data(), x.size(), 256, 0.5);
  double total = 0;
  for (double v : p) total += v;
  EXPECT_NEAR(total, 2.0, 0.05);
  for (double v : p) EXPECT_NEAR(v, 2.0 / 256, 0.25 * 2.0 / 256);
}

TEST(Psd, ToneLandsInItsBin) {
  const int n = 4096, L = 64, bin = 5;
  std::vector<cplx> x(n);
  for (int i = 0; i < n; ++i) x[i] = std::polar(1.0, 2 * M_PI * bin * i / L);
  auto p = estimate_psd(x.data(), x.size(), L, 0.5);
  const auto peak = std::max_element(p.begin(), p.end()) - p.begin();
  EXPECT_EQ(peak, bin);
}

TEST(Rng, ForkedStreamsAreReproducibleAndDistinct) {
  Rng a(42), b(42);
  EXPECT_EQ(a.next_u64(), b.next_u64());
  Rng f1 = Rng(42).fork(1), f2 = Rng(42).fork(2), f1b = Rng(42).fork(1);
  const auto x = f1.next_u64();
  EXPECT_EQ(x, f1b.next_u64());
  EXPECT_NE(x, f2.next_u64());
  // cnormal variance
  Rng r(7);
  double s = 0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) s += std::norm(r.cnormal(3.0));
  EXPECT_NEAR(s / n, 3.0, 0.05);
}
