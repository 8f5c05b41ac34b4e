#pragma once

#include <vector>

#include "mimodpd/common.hpp"
#include "mimodpd/rng.hpp"
#include "mimodpd/signals.hpp"

namespace mimodpd {

enum class ChannelKind { kIsotropicRayleigh, kFlatLos };

struct PathlossParams {
  double median_gain_db = -35.3;
  double exponent = 3.76;
  double shadow_sigma_db = 0.0;
};

struct UePosition {
  double distance_m = 25.0;
  double angle_rad = 0.0;
};

struct ChannelScenario {
  ChannelKind kind = ChannelKind::kIsotropicRayleigh;
  int n_antennas = 16;
  int n_users = 1;
  int taps = 100;
  double carrier_hz = 3.5e9;
  std::vector<UePosition> ue_positions;
  PathlossParams pathloss;
  double noise_power_dbm = -200.0;

  void validate() const;
};

/// fd[k] and td_taps[t] are B x U; column u is UE u's channel vector.
struct ChannelRealization {
  std::vector<CMat> fd;
  std::vector<CMat> td_taps;
  std::vector<double> large_scale_db;

  int n_antennas() const { return fd.empty() ? 0 : static_cast<int>(fd[0].rows()); }
  int n_users() const { return fd.empty() ? 0 : static_cast<int>(fd[0].cols()); }
  int n_subcarriers() const { return static_cast<int>(fd.size()); }
};

double large_scale_fading(double distance_m, const PathlossParams& p, Rng& rng);

/// Taps ~ CN(0, beta^2 / taps); fd is the N-point DFT of the zero-padded taps.
ChannelRealization sample_rayleigh(const ChannelScenario& sc, int n_subcarriers, Rng& rng);
/// Shadowing (if configured) is drawn from rng; pass sigma 0 for a fixed channel.
ChannelRealization sample_los(const ChannelScenario& sc, int n_subcarriers, Rng& rng);
ChannelRealization sample_channel(const ChannelScenario& sc, int n_subcarriers, Rng& rng);

/// Half-wavelength ULA response toward angle theta with amplitude beta.
CVec los_response(int n_antennas, double angle_rad, double distance_m, double carrier_hz,
                  double beta);

/// y_u[k] = sum_b fd[k](b, u) x_b[k] + CN(0, noise_v2). noise_v2 = 0 skips the RNG.
SignalGrid apply_channel(const ChannelRealization& ch, const SignalGrid& x, double noise_v2,
                         Rng& rng);

/// Time-domain path: circular convolution of each branch with the taps, summed
/// over branches. Equals apply_channel (noise-free) after demodulation.
SignalBlock apply_channel_td(const ChannelRealization& ch, const SignalBlock& x);

}  // namespace mimodpd
