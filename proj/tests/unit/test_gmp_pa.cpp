#include <gtest/gtest.h>

#include <cstdio>

#include "mimodpd/gmp.hpp"
#include "mimodpd/ila.hpp"
#include "mimodpd/pa.hpp"
#include "mimodpd/rng.hpp"
#include "oracles.hpp"

using namespace mimodpd;

namespace {

GmpModel random_model(const GmpStructure& s, Rng& rng, double scale = 0.1) {
  std::vector<cplx> theta(s.coeff_count());
  for (auto& v : theta) v = rng.cnormal(scale * scale);
  return GmpModel::unflatten(s, theta);
}

std::vector<cplx> random_signal(Rng& rng, std::size_t n, double var = 1.0) {
  std::vector<cplx> x(n);
  for (auto& v : x) v = rng.cnormal(var);
  return x;
}

}  // namespace

TEST(Gmp, CoefficientCount) {
  EXPECT_EQ((GmpStructure{7, 5, 1}.coeff_count()), 7 * 6 + 2 * 6 * 6 * 1);
  EXPECT_EQ((GmpStructure{1, 0, 0}.coeff_count()), 1);
  EXPECT_EQ((GmpStructure{3, 2, 0}.coeff_count()), 9);
}

TEST(Gmp, ForwardMatchesTripleLoop) {
  Rng rng(1);
  for (GmpStructure s : {GmpStructure{1, 0, 0}, GmpStructure{3, 2, 0}, GmpStructure{5, 3, 2},
                         GmpStructure{7, 5, 1}, GmpStructure{4, 0, 3}}) {
    GmpModel m = random_model(s, rng);
    auto u = random_signal(rng, 200);
    auto want = oracle::gmp_triple_loop(m, u);
    auto got = gmp_forward(m, u);
    for (std::size_t i = 0; i < u.size(); ++i)
      EXPECT_LT(std::abs(got[i] - want[i]), 1e-12 * (1 + std::abs(want[i])));
  }
}

TEST(Gmp, ForwardClampsInputMagnitude) {
  Rng rng(2);
  GmpModel m = random_model({5, 2, 1}, rng);
  m.sat_level = 0.8;
  auto u = random_signal(rng, 100, 2.0);
  auto want = oracle::gmp_triple_loop(m, u);
  auto got = gmp_forward(m, u);
  for (std::size_t i = 0; i < u.size(); ++i) EXPECT_LT(std::abs(got[i] - want[i]), 1e-12);
  EXPECT_LT(std::abs(clamp_magnitude(cplx(3, 4), 1.0) - cplx(0.6, 0.8)), 1e-15);
  EXPECT_EQ(clamp_magnitude(cplx(3, 4), 0.0), cplx(3, 4));
}

TEST(Gmp, RegressorTimesCoefficientsEqualsForward) {
  Rng rng(3);
  GmpStructure s{5, 3, 2};
  GmpModel m = random_model(s, rng);
  auto u = random_signal(rng, 128);
  CMat phi = gmp_regressor(s, u.data(), u.size());
  auto theta = m.flatten();
  CVec th = Eigen::Map<CVec>(theta.data(), theta.size());
  CVec y = phi * th;
  auto want = gmp_forward(m, u);
  for (std::size_t i = 0; i < u.size(); ++i) EXPECT_LT(std::abs(y(i) - want[i]), 1e-12);
}

TEST(Gmp, FlattenRoundTrip) {
  Rng rng(4);
  GmpModel m = random_model({4, 2, 2}, rng);
  GmpModel back = GmpModel::unflatten(m.structure, m.flatten(), 0.5);
  EXPECT_EQ(back.flatten(), m.flatten());
  EXPECT_EQ(back.sat_level, 0.5);
  EXPECT_THROW(GmpModel::unflatten(m.structure, std::vector<cplx>(3)), Error);
}

TEST(Gmp, IdentityPassesThrough) {
  Rng rng(5);
  auto u = random_signal(rng, 50);
  EXPECT_EQ(gmp_forward(GmpModel::identity({7, 5, 1}), u), u);
}

TEST(Gmp, LeastSquaresRecoversNoiselessModel) {
  Rng rng(6);
  GmpStructure s{5, 2, 1};
  GmpModel m = random_model(s, rng);
  auto u = random_signal(rng, 2000, 0.5);
  auto y = gmp_forward(m, u);
  GmpFit fit = fit_gmp_ls(u, y, s);
  auto a = fit.model.flatten(), b = m.flatten();
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_LT(std::abs(a[i] - b[i]), 1e-8);
  EXPECT_LT(fit.nmse_db, -150.0);
}

TEST(Gmp, LeastSquaresReportsRankDeficiency) {
  // constant-envelope input makes |u|^k columns collinear
  std::vector<cplx> u(300);
  for (std::size_t i = 0; i < u.size(); ++i) u[i] = std::polar(1.0, 0.37 * i);
  try {
    fit_gmp_ls(u, u, GmpStructure{5, 1, 0});
    FAIL() << "expected an error";
  } catch (const Error& e) {
    EXPECT_TRUE(e.code() == ErrorCode::kRankDeficient || e.code() == ErrorCode::kIllConditioned);
  }
}

TEST(Gmp, NmseOfIdenticalSignalsIsVeryNegative) {
  Rng rng(7);
  auto u = random_signal(rng, 100);
  auto v = u;
  v[0] += 0.1;
  EXPECT_NEAR(nmse_db(v, u), 10 * std::log10(0.01 / [&] {
                double p = 0;
                for (auto x : u) p += std::norm(x);
                return p;
              }()),
              1e-9);
}

TEST(Pa, FixtureIsCompressiveAndWellFitted) {
  PaFixture fx = synth_pa_fixture(7, 37.6);
  const double A = fx.reference.sat_amplitude;
  EXPECT_NEAR(A, std::sqrt(dbm_to_v2(37.6)), 1e-12);
  EXPECT_LT(fx.fit_nmse_db, -30.0);
  // AM/AM: small-signal gain ~1, gain at A well below it
  std::vector<cplx> lo(64, cplx(0.01 * A)), hi(64, cplx(A));
  const double g_lo = std::abs(reference_pa(fx.reference, lo).back()) / (0.01 * A);
  const double g_hi = std::abs(reference_pa(fx.reference, hi).back()) / A;
  EXPECT_NEAR(g_lo, 1.0, 1e-3);
  EXPECT_NEAR(g_hi, 1.0 / std::sqrt(2.0), 1e-3);
}

TEST(Pa, FixtureIsDeterministicPerSeed) {
  auto a = synth_pa_fixture(3, 37.6), b = synth_pa_fixture(3, 37.6), c = synth_pa_fixture(4, 37.6);
  EXPECT_EQ(a.model.flatten(), b.model.flatten());
  EXPECT_NE(a.model.flatten(), c.model.flatten());
}

TEST(Pa, CrosstalkPresetAndMixing) {
  CMat g = crosstalk_preset(4, -10.0);
  for (int b = 0; b < 4; ++b) EXPECT_EQ(g(b, b), cplx(0.0));
  EXPECT_NEAR(std::abs(g(0, 1)), std::pow(10.0, -0.5), 1e-12);
  EXPECT_NEAR(std::abs(g(0, 2)), std::pow(10.0, -0.5) / 4, 1e-12);
  SignalBlock x{CMat::Zero(4, 3)};
  x.data(1, 0) = 1.0;
  SignalBlock y = apply_crosstalk(g, x);
  for (int b = 0; b < 4; ++b)
    EXPECT_LT(std::abs(y.data(b, 0) - (b == 1 ? cplx(1.0) : g(b, 1))), 1e-15);
}

TEST(Pa, BankForwardWithoutCrosstalkIsPerBranch) {
  Rng rng(8);
  PaBank bank;
  for (int b = 0; b < 3; ++b) bank.models.push_back(random_model({3, 1, 1}, rng));
  bank.crosstalk_in = crosstalk_preset(3, -10);
  bank.crosstalk_out = crosstalk_preset(3, -10);
  SignalBlock x{CMat(3, 40)};
  for (int b = 0; b < 3; ++b)
    for (int n = 0; n < 40; ++n) x.data(b, n) = rng.cnormal();
  SignalBlock y = pa_bank_forward(bank, x, false);
  for (int b = 0; b < 3; ++b) {
    std::vector<cplx> row(x.data.row(b).data(), x.data.row(b).data() + 40);
    auto want = gmp_forward(bank.models[b], row);
    for (int n = 0; n < 40; ++n) EXPECT_LT(std::abs(y.data(b, n) - want[n]), 1e-12);
  }
  SignalBlock yc = pa_bank_forward(bank, x, true);
  SignalBlock want = apply_crosstalk(bank.crosstalk_out,
                                     pa_bank_forward(bank, apply_crosstalk(bank.crosstalk_in, x), false));
  EXPECT_LT((yc.data - want.data).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Pa, RecordRoundTripAndErrors) {
  PaRecord rec{{cplx(1, 2), cplx(-0.5, 1e-9)}, {cplx(3, 4), cplx(0.1, -0.2)}};
  const std::string path = ::testing::TempDir() + "pa_record.csv";
  write_pa_record(path, rec);
  PaRecord back = read_pa_record(path);
  EXPECT_EQ(back.in, rec.in);
  EXPECT_EQ(back.out, rec.out);
  std::remove(path.c_str());
  try {
    read_pa_record(path);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kIo);
  }
}

TEST(Ila, ImprovesCascadeOnFixtureAtBackoff) {
  PaFixture fx = synth_pa_fixture(7, 37.6);
  Rng rng(9);
  // Gaussian-like probe 3 dB below the drive used by the scenarios
  const double rms = std::sqrt(dbm_to_v2(37.6 - 10.0 - 3.0));
  auto probe = random_signal(rng, 4096, rms * rms);
  IlaOptions opt;
  opt.iters = 2;
  IlaResult r = ila_train(fx.model, probe, GmpStructure{7, 5, 1}, opt);
  ASSERT_EQ(r.nmse_db.size(), 3u);  // before any DPD, then each iteration
  EXPECT_LT(r.nmse_db.back(), r.nmse_db.front() - 20.0);
}
