#pragma once

#include <vector>

#include "mimodpd/channel.hpp"
#include "mimodpd/signals.hpp"

namespace mimodpd {

enum class PrecoderKind { kMrt, kZf };
enum class PowerAllocation { kEqual, kPathlossInverse };

/// matrices[k] is B x U for every bin k. Guard bins get the same rule applied
/// to the channel at that bin, so an undistorted grid (zero guards) stays zero
/// there while FD predistorters that write guard bins are still precoded.
/// The power normalization only counts data bins.
struct Precoder {
  PrecoderKind kind = PrecoderKind::kZf;
  std::vector<CMat> matrices;
  double norm_factor = 1.0;
};

/// p_t is the average of E||x[k]||^2 over data subcarriers for unit-power,
/// i.i.d. symbols (v^2 units).
Precoder mrt(const ChannelRealization& ch, const OfdmConfig& cfg, double p_t,
             PowerAllocation alloc = PowerAllocation::kEqual);
/// Throws kRankDeficient listing the offending subcarrier bins.
Precoder zf(const ChannelRealization& ch, const OfdmConfig& cfg, double p_t,
            PowerAllocation alloc = PowerAllocation::kEqual);
Precoder make_precoder(PrecoderKind kind, const ChannelRealization& ch, const OfdmConfig& cfg,
                       double p_t, PowerAllocation alloc = PowerAllocation::kEqual);

SignalGrid precode(const Precoder& p, const SignalGrid& s);

}  // namespace mimodpd
