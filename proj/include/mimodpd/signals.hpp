#pragma once

#include <cstdint>
#include <vector>

#include "mimodpd/common.hpp"
#include "mimodpd/rng.hpp"

namespace mimodpd {

struct OfdmConfig {
  int n_data = 256;
  int osr = 4;
  double subcarrier_spacing_hz = 120e3;
  int qam_order = 16;

  int n_total() const { return n_data * osr; }
  int n_guard() const { return n_total() - n_data; }
  double sample_rate_hz() const { return subcarrier_spacing_hz * n_total(); }
  double data_bandwidth_hz() const { return subcarrier_spacing_hz * n_data; }

  /// Throws kInvalidArgument when N is not a power of two, the order is not a
  /// square QAM size, or any count is nonpositive.
  void validate() const;
};

/// Frequency-domain grid: rows are streams or branches, columns are the N
/// subcarriers in natural FFT order.
struct SignalGrid {
  CMat data;
};

/// Time-domain block: rows are branches, columns are samples.
struct SignalBlock {
  CMat data;
  double sample_rate_hz = 0.0;
};

std::vector<cplx> map_qam(const std::vector<std::uint8_t>& bits, int order);
/// All points of the normalized constellation, in label order.
std::vector<cplx> qam_constellation(int order);
/// streams x n_data matrix of uniformly random QAM symbols.
CMat random_qam(Rng& rng, int streams, int n_data, int order);

/// FFT-bin index of the i-th data subcarrier (i = 0 is the lowest frequency).
int data_bin(const OfdmConfig& cfg, int i);
std::vector<int> data_bins(const OfdmConfig& cfg);

SignalGrid build_grid(const CMat& symbols, const OfdmConfig& cfg);
/// Inverse of build_grid: the data columns in frequency order.
CMat extract_data(const SignalGrid& grid, const OfdmConfig& cfg);

SignalBlock ofdm_modulate(const SignalGrid& grid, double sample_rate_hz = 0.0);
SignalGrid ofdm_demodulate(const SignalBlock& block);

/// Welch estimate with a Hann window. Each output bin holds power, so the bins
/// sum to the mean power of the row. Multiple rows are summed.
/// Bins are in natural FFT order (bin k is frequency k*fs/seg_len, wrapped).
std::vector<double> estimate_psd(const SignalBlock& block, int seg_len = 256,
                                 double overlap = 0.5);
std::vector<double> estimate_psd(const cplx* x, std::size_t n, int seg_len, double overlap);

/// Map FFT-order bin k of an n-bin spectrum to its signed frequency index.
int signed_bin(int k, int n);

}  // namespace mimodpd
