#include <gtest/gtest.h>

#include "mimodpd/ad_ops.hpp"
#include "mimodpd/channel.hpp"
#include "mimodpd/dpd.hpp"
#include "mimodpd/pa.hpp"
#include "mimodpd/precoding.hpp"
#include "mimodpd/training.hpp"
#include "oracles.hpp"

using namespace mimodpd;
using namespace mimodpd::ad;

namespace {

constexpr double kTol = 1e-4;

ParamTensor random_tensor(const std::string& name, Shape s, Rng& rng, double scale = 1.0,
                          int id = 0) {
  ParamTensor p(name, std::move(s), id);
  for (double& v : p.values) v = scale * rng.normal();
  return p;
}

Var random_target(Tape& t, const Shape& s, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<double> v(numel(s));
  for (double& x : v) x = rng.normal();
  return t.constant(s, v);
}

// mse against a random target for a real-valued tensor: repacked as one complex row,
// zero-padded to even length
Var real_mse(Tape& t, Var x, std::size_t n, std::uint64_t seed) {
  const int half = static_cast<int>((n + 1) / 2);
  std::vector<long> idx(2 * half, -1);
  for (std::size_t i = 0; i < n; ++i) idx[i] = static_cast<long>(i);
  return mse(t, gather(t, x, idx, {1, half, 2}), random_target(t, {1, half, 2}, seed));
}

double check(const std::function<Var(Tape&)>& op_loss, std::vector<ParamTensor*> params) {
  return oracle::gradient_mismatch(op_loss, params);
}

}  // namespace

TEST(Tape, BackwardConsumesTape) {
  Rng rng(1);
  ParamTensor p = random_tensor("p", {2, 3, 2}, rng);
  Tape t;
  Var x = t.parameter(p);
  Var l = mse(t, x, random_target(t, {2, 3, 2}, 2));
  t.backward(l);
  try {
    t.backward(l);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kTapeConsumed);
  }
  EXPECT_THROW(t.constant({1}, {1.0}), Error);
}

TEST(Tape, LossMustBeScalar) {
  Tape t;
  Var x = t.constant({2}, {1.0, 2.0});
  EXPECT_THROW(t.backward(x), Error);
}

TEST(Ops, MseValueAndGradient) {
  Rng rng(2);
  ParamTensor p = random_tensor("x", {3, 4, 2}, rng);
  {
    Tape t;
    Var tgt = random_target(t, {3, 4, 2}, 3);
    const double l = t.value(mse(t, t.parameter(p), tgt))[0];
    double want = 0;
    for (std::size_t i = 0; i < p.values.size(); ++i) {
      const double d = p.values[i] - t.value(tgt)[i];
      want += d * d;
    }
    EXPECT_NEAR(l, want / 12.0, 1e-14);
  }
  EXPECT_LT(check([&](Tape& t) { return mse(t, t.parameter(p), random_target(t, {3, 4, 2}, 3)); },
                  {&p}),
            kTol);
}

TEST(Ops, CfftForwardAndInverse) {
  Rng rng(4);
  ParamTensor p = random_tensor("x", {2, 16, 2}, rng);
  for (bool inv : {false, true}) {
    EXPECT_LT(check([&](Tape& t) {
                return mse(t, cfft(t, t.parameter(p), inv), random_target(t, {2, 16, 2}, 5));
              }, {&p}),
              kTol);
  }
  Tape t;
  CMat m = to_cmat(t, cfft(t, t.parameter(p), false));
  std::vector<cplx> row(16);
  for (int i = 0; i < 16; ++i) row[i] = {p.values[2 * i], p.values[2 * i + 1]};
  auto want = oracle::direct_dft(row, false);
  for (int i = 0; i < 16; ++i) EXPECT_LT(std::abs(m(0, i) - want[i]), 1e-12);
}

TEST(Ops, Precode) {
  Rng rng(6);
  const int S = 2, U = 2, B = 3, N = 4;
  std::vector<CMat> w(N, CMat(B, U));
  for (auto& m : w)
    for (int i = 0; i < B; ++i)
      for (int j = 0; j < U; ++j) m(i, j) = rng.cnormal();
  ParamTensor p = random_tensor("x", {S * U, N, 2}, rng);
  EXPECT_LT(check([&](Tape& t) {
              return mse(t, precode(t, w, t.parameter(p)), random_target(t, {S * B, N, 2}, 7));
            }, {&p}),
            kTol);
  Tape t;
  CMat x = to_cmat(t, t.parameter(p));
  CMat y = to_cmat(t, precode(t, w, t.parameter(p)));
  for (int s = 0; s < S; ++s)
    for (int k = 0; k < N; ++k) {
      CVec want = w[k] * x.block(s * U, k, U, 1);
      for (int b = 0; b < B; ++b) EXPECT_LT(std::abs(y(s * B + b, k) - want(b)), 1e-12);
    }
}

TEST(Ops, Mix) {
  Rng rng(8);
  CMat g = crosstalk_preset(3, -10);
  ParamTensor p = random_tensor("x", {6, 5, 2}, rng);
  EXPECT_LT(check([&](Tape& t) {
              return mse(t, mix(t, g, t.parameter(p)), random_target(t, {6, 5, 2}, 9));
            }, {&p}),
            kTol);
}

TEST(Ops, GmpInputsAndCoefficients) {
  Rng rng(10);
  GmpOpConfig cfg{GmpStructure{5, 2, 1}, 1.3, 0.0};
  const int P = cfg.structure.coeff_count();
  ParamTensor x = random_tensor("x", {4, 12, 2}, rng, 0.7, 0);
  ParamTensor c = random_tensor("c", {2, P, 2}, rng, 0.2, 1);
  EXPECT_LT(check([&](Tape& t) {
              return mse(t, gmp(t, t.parameter(x), t.parameter(c), cfg),
                         random_target(t, {4, 12, 2}, 11));
            }, {&x, &c}),
            kTol);
  // value: row r uses model r % 2, y = s * GMP(x / s)
  Tape t;
  CMat y = to_cmat(t, gmp(t, t.parameter(x), t.parameter(c), cfg));
  CMat xin = to_cmat(t, t.parameter(x));
  for (int r = 0; r < 4; ++r) {
    std::vector<cplx> theta(P);
    for (int i = 0; i < P; ++i)
      theta[i] = {c.values[(r % 2) * P * 2 + 2 * i], c.values[(r % 2) * P * 2 + 2 * i + 1]};
    GmpModel m = GmpModel::unflatten(cfg.structure, theta);
    std::vector<cplx> u(12);
    for (int i = 0; i < 12; ++i) u[i] = xin(r, i) / 1.3;
    auto want = oracle::gmp_triple_loop(m, u);
    for (int i = 0; i < 12; ++i) EXPECT_LT(std::abs(y(r, i) - 1.3 * want[i]), 1e-12);
  }
}

TEST(Ops, DenseReluScaleAdd) {
  Rng rng(12);
  ParamTensor x = random_tensor("x", {5, 4}, rng, 1.0, 0);
  ParamTensor w = random_tensor("w", {3, 4}, rng, 1.0, 1);
  ParamTensor b = random_tensor("b", {3}, rng, 1.0, 2);
  EXPECT_LT(check([&](Tape& t) {
              Var h = dense(t, t.parameter(x), t.parameter(w), t.parameter(b));
              Var r = relu(t, h);
              Var s = add(t, scale(t, r, 0.7), h);
              return real_mse(t, s, 15, 13);
            }, {&x, &w, &b}),
            kTol);
  Tape t;
  auto v = t.value(relu(t, dense(t, t.parameter(x), t.parameter(w), t.parameter(b))));
  for (int n = 0; n < 5; ++n)
    for (int o = 0; o < 3; ++o) {
      double acc = b.values[o];
      for (int i = 0; i < 4; ++i) acc += w.values[o * 4 + i] * x.values[n * 4 + i];
      EXPECT_NEAR(v[n * 3 + o], std::max(acc, 0.0), 1e-12);
    }
}

TEST(Ops, Conv2dStrideOneAndTwo) {
  Rng rng(14);
  for (int stride : {1, 2}) {
    ParamTensor x = random_tensor("x", {2, 3, 5, 5}, rng, 1.0, 0);
    ParamTensor k = random_tensor("k", {4, 3, 3, 3}, rng, 1.0, 1);
    ParamTensor b = random_tensor("b", {4}, rng, 1.0, 2);
    const int out = (5 + stride - 1) / stride;
    EXPECT_LT(check([&](Tape& t) {
                return real_mse(t, conv2d(t, t.parameter(x), t.parameter(k), t.parameter(b), stride),
                                2 * 4 * out * out, 15);
              }, {&x, &k, &b}),
              kTol);
    // direct evaluation with zero padding K/2
    Tape t;
    auto v = t.value(conv2d(t, t.parameter(x), t.parameter(k), t.parameter(b), stride));
    ASSERT_EQ(v.size(), static_cast<std::size_t>(2 * 4 * out * out));
    auto X = [&](int s, int c, int i, int j) {
      return (i < 0 || j < 0 || i >= 5 || j >= 5) ? 0.0 : x.values[((s * 3 + c) * 5 + i) * 5 + j];
    };
    for (int s = 0; s < 2; ++s)
      for (int o = 0; o < 4; ++o)
        for (int i = 0; i < out; ++i)
          for (int j = 0; j < out; ++j) {
            double acc = b.values[o];
            for (int c = 0; c < 3; ++c)
              for (int di = 0; di < 3; ++di)
                for (int dj = 0; dj < 3; ++dj)
                  acc += k.values[((o * 3 + c) * 3 + di) * 3 + dj] *
                         X(s, c, i * stride + di - 1, j * stride + dj - 1);
            EXPECT_NEAR(v[((s * 4 + o) * out + i) * out + j], acc, 1e-12);
          }
  }
}

TEST(Ops, Gather) {
  Rng rng(16);
  ParamTensor x = random_tensor("x", {6}, rng);
  std::vector<long> idx{5, -1, 0, 0, 3};
  EXPECT_LT(check([&](Tape& t) {
              return real_mse(t, gather(t, t.parameter(x), idx, {5}), 5, 17);
            }, {&x}),
            kTol);
  Tape t;
  auto v = t.value(gather(t, t.parameter(x), idx, {5}));
  EXPECT_EQ(v[0], x.values[5]);
  EXPECT_EQ(v[1], 0.0);
  EXPECT_EQ(v[3], x.values[0]);
}

namespace {

// B=4 antennas, U=2 users, N=32 (N_d=8, R=4), order-3 PAs with memory.
struct SmallChain {
  OfdmConfig ofdm;
  PaBank bank;
  Precoder w;
  TrainingEnv env;
  CMat symbols;

  explicit SmallChain(bool crosstalk) {
    ofdm.n_data = 8;
    ofdm.osr = 4;
    Rng rng(100);
    ChannelScenario sc;
    sc.kind = ChannelKind::kIsotropicRayleigh;
    sc.n_antennas = 4;
    sc.n_users = 2;
    sc.taps = 3;
    sc.pathloss = {0.0, 0.0, 0.0};
    sc.ue_positions = {{1.0, 0.0}, {1.0, 0.0}};
    auto ch = sample_rayleigh(sc, ofdm.n_total(), rng);
    w = zf(ch, ofdm, 1.0);
    for (int b = 0; b < 4; ++b) {
      GmpModel m = GmpModel::identity({3, 1, 1});
      m.a(2, 0) = cplx(-0.08, 0.02 * b);
      m.a(1, 1) = cplx(0.03, -0.01);
      m.c_at(2, 0, 1) = cplx(0.01, 0.005);
      bank.models.push_back(m);
    }
    bank.crosstalk_in = crosstalk_preset(4, -15);
    bank.crosstalk_out = crosstalk_preset(4, -15);
    env.ofdm = ofdm;
    env.users = 2;
    env.bank = &bank;
    env.with_crosstalk = crosstalk;
    env.gain = 0.9;
    symbols = random_qam(rng, 2 * 2, ofdm.n_data, 16);
  }
};

void perturb(std::vector<ParamTensor*> ps, double scale, std::uint64_t seed) {
  Rng rng(seed);
  for (auto* p : ps)
    for (double& v : p->values) v += scale * rng.normal();
}

}  // namespace

TEST(ChainGradient, FdGmpThroughPrecoderAndPaBank) {
  for (bool xt : {false, true}) {
    SmallChain c(xt);
    DpdModel m = make_fd_gmp(2, {3, 1, 1}, 1.0);
    perturb(parameters(m), 0.02, 1);
    EXPECT_LT(oracle::gradient_mismatch(
                  [&](Tape& t) { return batch_loss(t, &m, c.env, c.w, c.symbols); }, parameters(m)),
              kTol)
        << "crosstalk=" << xt;
  }
}

TEST(ChainGradient, FdNn) {
  SmallChain c(false);
  Rng rng(2);
  DpdModel m = make_fd_nn(2, 2, 5, 1, rng);
  // random biases keep ReLU inputs away from the kink at zero
  for (auto& b : std::get<FdNnDpd>(m).biases)
    for (double& v : b.values) v = rng.uniform(-0.5, 0.5);
  EXPECT_LT(oracle::gradient_mismatch(
                [&](Tape& t) { return batch_loss(t, &m, c.env, c.w, c.symbols); }, parameters(m)),
            kTol);
}

TEST(ChainGradient, FdCnn) {
  SmallChain c(false);
  Rng rng(3);
  DpdModel m = make_fd_cnn(2, 8, 3, 3, 1, rng);
  auto& d = std::get<FdCnnDpd>(m);
  for (double& v : d.conv1_b.values) v = rng.uniform(-0.5, 0.5);
  for (double& v : d.conv2_b.values) v = rng.uniform(-0.5, 0.5);
  EXPECT_LT(oracle::gradient_mismatch(
                [&](Tape& t) { return batch_loss(t, &m, c.env, c.w, c.symbols); }, parameters(m)),
            kTol);
}

TEST(ChainGradient, NoDpdLossEqualsDirectChain) {
  SmallChain c(false);
  Tape t;
  const double l = t.value(batch_loss(t, nullptr, c.env, c.w, c.symbols))[0];
  // direct: per symbol precode -> IDFT -> PA, compare with gain * undistorted
  double acc = 0;
  int count = 0;
  for (int s = 0; s < 2; ++s) {
    SignalGrid g = build_grid(c.symbols.middleRows(s * 2, 2), c.ofdm);
    SignalBlock x = ofdm_modulate(precode(c.w, g));
    SignalBlock y = pa_bank_forward(c.bank, x, false);
    acc += (y.data - c.env.gain * x.data).squaredNorm();
    count += static_cast<int>(x.data.size());
  }
  EXPECT_NEAR(l, acc / count, 1e-12 * (1 + l));
}
