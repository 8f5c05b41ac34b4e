#include "mimodpd/channel.hpp"

#include <cmath>
#include <cstdio>

namespace mimodpd {

void ChannelScenario::validate() const {
  require(n_antennas >= 1 && n_users >= 1, ErrorCode::kInvalidArgument,
          "channel: antennas and users must be positive");
  require(taps >= 1, ErrorCode::kInvalidArgument, "channel: taps must be >= 1");
  require(static_cast<int>(ue_positions.size()) == n_users, ErrorCode::kInvalidArgument,
          "channel: need one position per user");
  for (const auto& p : ue_positions) {
    require(p.distance_m > 0.0, ErrorCode::kInvalidArgument, "channel: distance must be > 0");
    require(std::abs(p.angle_rad) <= kPi / 2 + 1e-12, ErrorCode::kInvalidArgument,
            "channel: angle outside [-pi/2, pi/2]");
  }
  if (n_users >= n_antennas)
    std::fprintf(stderr, "warning: %d users with %d antennas is not a massive-MIMO setup\n",
                 n_users, n_antennas);
}

double large_scale_fading(double distance_m, const PathlossParams& p, Rng& rng) {
  require(distance_m > 0.0, ErrorCode::kInvalidArgument, "pathloss: distance must be > 0");
  double g = p.median_gain_db - 10.0 * p.exponent * std::log10(distance_m);
  if (p.shadow_sigma_db > 0.0) g += p.shadow_sigma_db * rng.normal();
  return g;
}

namespace {

void fill_fd_from_taps(ChannelRealization& ch, int n) {
  const int B = static_cast<int>(ch.td_taps[0].rows());
  const int U = static_cast<int>(ch.td_taps[0].cols());
  ch.fd.assign(n, CMat::Zero(B, U));
  for (int k = 0; k < n; ++k) {
    for (std::size_t t = 0; t < ch.td_taps.size(); ++t) {
      const double ph = -2.0 * kPi * static_cast<double>((static_cast<long>(k) * t) % n) / n;
      ch.fd[k] += ch.td_taps[t] * cplx(std::cos(ph), std::sin(ph));
    }
  }
}

}  // namespace

ChannelRealization sample_rayleigh(const ChannelScenario& sc, int n_subcarriers, Rng& rng) {
  require(sc.kind == ChannelKind::kIsotropicRayleigh, ErrorCode::kInvalidArgument,
          "sample_rayleigh: scenario is not Rayleigh");
  require(sc.taps >= 1, ErrorCode::kInvalidArgument, "sample_rayleigh: taps must be >= 1");
  require(sc.taps <= n_subcarriers, ErrorCode::kInvalidArgument,
          "sample_rayleigh: more taps than subcarriers");
  const int B = sc.n_antennas, U = sc.n_users;
  ChannelRealization ch;
  ch.large_scale_db.resize(U);
  for (int u = 0; u < U; ++u)
    ch.large_scale_db[u] = large_scale_fading(sc.ue_positions[u].distance_m, sc.pathloss, rng);
  ch.td_taps.assign(sc.taps, CMat::Zero(B, U));
  for (int t = 0; t < sc.taps; ++t)
    for (int b = 0; b < B; ++b)
      for (int u = 0; u < U; ++u) {
        const double var = db_to_lin(ch.large_scale_db[u]) / sc.taps;
        ch.td_taps[t](b, u) = rng.cnormal(var);
      }
  fill_fd_from_taps(ch, n_subcarriers);
  return ch;
}

CVec los_response(int n_antennas, double angle_rad, double distance_m, double carrier_hz,
                  double beta) {
  CVec h(n_antennas);
  const double tau = distance_m / kSpeedOfLight;
  // f_c * tau can be ~1e3 cycles; keep only the fractional part before scaling.
  const double cyc = carrier_hz * tau;
  const double frac = cyc - std::floor(cyc);
  for (int b = 0; b < n_antennas; ++b) {
    const double ph = -2.0 * kPi * (frac + b * std::sin(angle_rad) / 2.0);
    h(b) = beta * cplx(std::cos(ph), std::sin(ph));
  }
  return h;
}

ChannelRealization sample_los(const ChannelScenario& sc, int n_subcarriers, Rng& rng) {
  require(sc.kind == ChannelKind::kFlatLos, ErrorCode::kInvalidArgument,
          "sample_los: scenario is not LOS");
  const int B = sc.n_antennas, U = sc.n_users;
  ChannelRealization ch;
  ch.large_scale_db.resize(U);
  CMat h(B, U);
  for (int u = 0; u < U; ++u) {
    const auto& pos = sc.ue_positions[u];
    ch.large_scale_db[u] = large_scale_fading(pos.distance_m, sc.pathloss, rng);
    const double beta = std::sqrt(db_to_lin(ch.large_scale_db[u]));
    h.col(u) = los_response(B, pos.angle_rad, pos.distance_m, sc.carrier_hz, beta);
  }
  ch.td_taps.assign(1, h);
  ch.fd.assign(n_subcarriers, h);
  return ch;
}

ChannelRealization sample_channel(const ChannelScenario& sc, int n_subcarriers, Rng& rng) {
  return sc.kind == ChannelKind::kFlatLos ? sample_los(sc, n_subcarriers, rng)
                                          : sample_rayleigh(sc, n_subcarriers, rng);
}

SignalGrid apply_channel(const ChannelRealization& ch, const SignalGrid& x, double noise_v2,
                         Rng& rng) {
  require(x.data.cols() == ch.n_subcarriers(), ErrorCode::kShapeMismatch,
          "apply_channel: grid width differs from channel subcarriers");
  const int B = ch.n_antennas(), U = ch.n_users();
  require(x.data.rows() == B, ErrorCode::kShapeMismatch,
          "apply_channel: grid rows differ from antenna count");
  SignalGrid y{CMat::Zero(U, x.data.cols())};
  for (Eigen::Index k = 0; k < x.data.cols(); ++k)
    y.data.col(k) = ch.fd[k].transpose() * x.data.col(k);
  if (noise_v2 > 0.0)
    for (Eigen::Index u = 0; u < y.data.rows(); ++u)
      for (Eigen::Index k = 0; k < y.data.cols(); ++k) y.data(u, k) += rng.cnormal(noise_v2);
  return y;
}

SignalBlock apply_channel_td(const ChannelRealization& ch, const SignalBlock& x) {
  const int B = ch.n_antennas(), U = ch.n_users();
  require(x.data.rows() == B, ErrorCode::kShapeMismatch,
          "apply_channel_td: block rows differ from antenna count");
  const Eigen::Index n = x.data.cols();
  SignalBlock y{CMat::Zero(U, n), x.sample_rate_hz};
  // fd is the plain DFT of the taps, so the unitary DFT of this circular
  // convolution is fd[k] X[k] exactly.
  for (int u = 0; u < U; ++u)
    for (int b = 0; b < B; ++b)
      for (std::size_t t = 0; t < ch.td_taps.size(); ++t) {
        const cplx h = ch.td_taps[t](b, u);
        if (h == cplx(0.0)) continue;
        for (Eigen::Index m = 0; m < n; ++m)
          y.data(u, m) += h * x.data(b, ((m - static_cast<Eigen::Index>(t)) % n + n) % n);
      }
  return y;
}

}  // namespace mimodpd
