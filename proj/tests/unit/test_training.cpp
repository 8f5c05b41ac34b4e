#include <gtest/gtest.h>

#include "mimodpd/channel.hpp"
#include "mimodpd/dpd.hpp"
#include "mimodpd/pa.hpp"
#include "mimodpd/precoding.hpp"
#include "mimodpd/training.hpp"

using namespace mimodpd;

TEST(Adam, MatchesHandComputedSteps) {
  ad::ParamTensor p("p", {2}, 0);
  p.values = {1.0, -2.0};
  AdamState st;
  AdamConfig cfg{0.1, 0.9, 0.999, 1e-8};
  const std::vector<std::vector<double>> grads{{0.5, -1.0}, {0.2, 3.0}, {-0.4, 0.0}};
  std::vector<double> m(2, 0), v(2, 0), x = p.values;
  for (std::size_t t = 0; t < grads.size(); ++t) {
    p.grad = grads[t];
    adam_step({&p}, st, cfg);
    for (int i = 0; i < 2; ++i) {
      m[i] = 0.9 * m[i] + 0.1 * grads[t][i];
      v[i] = 0.999 * v[i] + 0.001 * grads[t][i] * grads[t][i];
      const double mh = m[i] / (1 - std::pow(0.9, t + 1));
      const double vh = v[i] / (1 - std::pow(0.999, t + 1));
      x[i] -= 0.1 * mh / (std::sqrt(vh) + 1e-8);
      EXPECT_NEAR(p.values[i], x[i], 1e-14);
    }
  }
  // first step moves every coordinate with a nonzero gradient by lr
  ad::ParamTensor q("q", {1}, 0);
  q.grad = {1234.5};
  AdamState s2;
  adam_step({&q}, s2, cfg);
  EXPECT_NEAR(q.values[0], -0.1, 1e-9);
}

TEST(Adam, RejectsNonFiniteGradientWithoutUpdating) {
  ad::ParamTensor p("weights", {2}, 0);
  p.values = {1.0, 2.0};
  p.grad = {0.1, std::nan("")};
  AdamState st;
  try {
    adam_step({&p}, st, AdamConfig{});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kNonFinite);
    EXPECT_NE(std::string(e.what()).find("weights"), std::string::npos);
  }
  EXPECT_EQ(p.values, (std::vector<double>{1.0, 2.0}));
}

TEST(Smoothing, BlockMeansDropPartialTail) {
  auto s = smooth_blocks({1, 2, 3, 4, 5, 6, 7}, 3);
  ASSERT_EQ(s.size(), 2u);
  EXPECT_DOUBLE_EQ(s[0], 2.0);
  EXPECT_DOUBLE_EQ(s[1], 5.0);
}

namespace {

struct TinySetup {
  OfdmConfig ofdm;
  PaBank bank;
  Precoder w;
  TrainingEnv env;

  TinySetup() {
    ofdm.n_data = 16;
    ofdm.osr = 4;
    ChannelScenario sc;
    sc.kind = ChannelKind::kFlatLos;
    sc.n_antennas = 4;
    sc.n_users = 1;
    sc.carrier_hz = 30e9;
    sc.pathloss = {0.0, 0.0, 0.0};
    sc.ue_positions = {{10.0, 0.3}};
    Rng rng(1);
    auto ch = sample_los(sc, ofdm.n_total(), rng);
    w = zf(ch, ofdm, 1.0);
    GmpModel pa = GmpModel::identity({3, 1, 0});
    pa.a(2, 0) = cplx(-0.05, 0.01);
    bank.models.assign(4, pa);
    env.ofdm = ofdm;
    env.users = 1;
    env.bank = &bank;
    env.gain = 1.0;
    env.next_precoder = [this](Rng&) { return w; };
  }
};

}  // namespace

TEST(Training, FdGmpLossDropsAndRunIsDeterministic) {
  TinySetup s;
  TrainConfig cfg;
  cfg.adam.lr = 3e-3;
  cfg.symbols_per_batch = 4;
  cfg.max_batches = 150;
  cfg.epsilon_fraction = 1e-9;
  auto run = [&] {
    DpdModel m = make_fd_gmp(1, {3, 1, 0}, 1.0);
    Rng rng(7);
    return train_fd_dpd(m, s.env, cfg, rng).loss;
  };
  auto a = run(), b = run();
  ASSERT_EQ(a.size(), 150u);
  EXPECT_EQ(a, b);
  auto sm = smooth_blocks(a, 25);
  EXPECT_LT(sm.back(), 0.1 * sm.front());
}

TEST(Training, StopsAtEpsilon) {
  TinySetup s;
  TrainConfig cfg;
  cfg.adam.lr = 3e-3;
  cfg.symbols_per_batch = 2;
  cfg.max_batches = 500;
  cfg.epsilon_fraction = 0.5;
  DpdModel m = make_fd_gmp(1, {3, 1, 0}, 1.0);
  Rng rng(3);
  auto r = train_fd_dpd(m, s.env, cfg, rng);
  EXPECT_TRUE(r.reached_epsilon);
  EXPECT_LT(r.batches, 500);
  EXPECT_LE(r.loss.back(), 0.5 * r.loss.front());
}

TEST(Training, DivergenceIsReportedWithTrace) {
  TinySetup s;
  TrainConfig cfg;
  cfg.adam.lr = 5.0;
  cfg.symbols_per_batch = 1;
  cfg.max_batches = 300;
  cfg.divergence_factor = 2.0;
  cfg.divergence_patience = 5;
  DpdModel m = make_fd_gmp(1, {3, 1, 0}, 1.0);
  Rng rng(3);
  try {
    train_fd_dpd(m, s.env, cfg, rng);
    FAIL() << "expected divergence";
  } catch (const DivergedError& e) {
    EXPECT_EQ(e.code(), ErrorCode::kDiverged);
    EXPECT_GE(e.trace().size(), 5u);
  } catch (const Error& e) {
    // a blow-up to inf/NaN before the patience window is also a divergence signal
    EXPECT_EQ(e.code(), ErrorCode::kNonFinite);
  }
}

TEST(Training, RejectsTimeDomainModel) {
  TinySetup s;
  DpdModel m = TdGmpDpd{};
  Rng rng(1);
  EXPECT_THROW(train_fd_dpd(m, s.env, TrainConfig{}, rng), Error);
}
