#pragma once

#include <vector>

#include "mimodpd/channel.hpp"
#include "mimodpd/signals.hpp"

namespace mimodpd {

/// Reported instead of a ratio whose denominator is at the numeric floor
/// (ACLR, TRP-ACLR) or when no side lobe exists (SLL).
inline constexpr double kSentinelDb = 200.0;

/// Bin sets of an n-bin spectrum in natural FFT order. The adjacent bands are
/// N_d wide and sit directly above and below the data block.
struct BandPlan {
  int n_bins = 0;
  std::vector<int> inband, upper, lower;
};

/// Needs osr >= 3 so both adjacent bands fit below Nyquist. n_bins defaults to N;
/// any power of two >= 2 * (3 N_d / N) resolution works (bins are assigned by
/// their centre frequency).
BandPlan make_band_plan(const OfdmConfig& cfg, int n_bins = 0);

/// Single complex scale c fitted by LS: 100 sqrt(sum|rx - c ref|^2 / sum|c ref|^2).
double evm_pct(const std::vector<cplx>& rx, const std::vector<cplx>& ref);
/// rx, ref: symbols x N_d for one UE. per_subcarrier fits one scale per column
/// (one-tap equalizer); otherwise one scale for the whole matrix.
double evm_pct(const CMat& rx, const CMat& ref, bool per_subcarrier);

/// Mean |X[k]|^2 per bin over whole OFDM symbols of length n (rectangular
/// window, exact for cyclic symbols). Rows are summed. Bins sum to mean power.
std::vector<double> symbol_spectrum(const SignalBlock& block, int n);

/// 10 log10(inband / max(upper, lower)).
double aclr_dbc(const std::vector<double>& psd, const BandPlan& plan);

struct BeamPattern {
  std::vector<double> angles_rad;
  /// Mean radiated power per angle in each band (v^2, same units as a branch's
  /// mean power).
  std::vector<double> inband, upper, lower;

  std::vector<double> oob() const;  // upper + lower
};

/// angles uniform over [-pi/2, pi/2]
std::vector<double> angle_grid(int points = 721);

/// x: B x (S N) time samples, S whole symbols. Half-wavelength ULA array
/// factor sum_b e^{-j pi b sin(theta)} X_b[k] per bin, averaged over symbols.
BeamPattern far_field_pattern(const SignalBlock& x, const std::vector<double>& angles,
                              const BandPlan& plan);

/// Uniform quadrature over the angle grid, worst adjacent side.
double trp_aclr_dbc(const BeamPattern& p);

struct SideLobe {
  double sll_db = kSentinelDb;
  double main_lobe_db = 0.0;  // dBm of the in-band peak
  int main_index = 0;
};
/// SLL of a linear power pattern: largest local maximum outside the main
/// lobe's -3 dB region, relative to the global maximum.
SideLobe side_lobe_level(const std::vector<double>& pattern);

/// Mean over symbols of sum_{k in bins} |sum_b h_b[k] X_b[k]|^2 for a
/// single-receiver channel (fd[k] is B x 1). x as in far_field_pattern.
double received_band_power(const SignalBlock& x, const ChannelRealization& ch,
                           const std::vector<int>& bins);

/// Value at quantile q in [0, 1] of an unsorted sample (linear interpolation).
double quantile(std::vector<double> v, double q);

}  // namespace mimodpd
