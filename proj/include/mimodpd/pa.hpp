#pragma once

#include <string>
#include <vector>

#include "mimodpd/gmp.hpp"
#include "mimodpd/rng.hpp"
#include "mimodpd/signals.hpp"

namespace mimodpd {

/// Crosstalk matrices hold only the coupling: the diagonal is ignored and
/// out_b = in_b + sum_{b' != b} g(b, b') in_b'.
struct PaBank {
  std::vector<GmpModel> models;
  double gain = 1.0;  // measured amplitude gain sqrt(P_out / P_in)
  CMat crosstalk_in;
  CMat crosstalk_out;

  int branches() const { return static_cast<int>(models.size()); }
};

SignalBlock apply_crosstalk(const CMat& coupling, const SignalBlock& x);
SignalBlock pa_bank_forward(const PaBank& bank, const SignalBlock& x, bool with_crosstalk);

/// Nearest-neighbour coupling level_db below the direct path, decaying with the
/// square of the element distance d, phase -pi d (half-wavelength spacing).
CMat crosstalk_preset(int branches, double level_db);

/// amplitude gain sqrt(sum |y|^2 / sum |x|^2)
double measure_gain(const SignalBlock& in, const SignalBlock& out);

/// Saturation amplitude (volts) for a saturated output power in dBm.
double saturation_amplitude(double sat_dbm);

struct PaReference {
  double sat_amplitude = 1.0;
  std::vector<cplx> memory_filter;  // unity DC gain
};

PaReference make_pa_reference(std::uint64_t seed, double sat_dbm);
/// Soft limiter u / sqrt(1 + (|u|/A)^2) followed by the memory filter.
std::vector<cplx> reference_pa(const PaReference& ref, const std::vector<cplx>& u);

struct PaFixture {
  PaReference reference;
  GmpModel model;
  double fit_nmse_db = 0.0;
};

/// Q=7, M=5, G=1 GMP fitted to reference_pa; the model clamps its input at
/// 1.4 times the saturation amplitude, the edge of the fitted range.
PaFixture synth_pa_fixture(std::uint64_t seed, double sat_dbm);

/// Complex Gaussian noise with E|n|^2 = sigma_v^2.
void add_measurement_noise(std::vector<cplx>& x, double sigma_v, Rng& rng);

struct PaRecord {
  std::vector<cplx> in;
  std::vector<cplx> out;
};
/// CSV with header: index,in_re,in_im,out_re,out_im
PaRecord read_pa_record(const std::string& path);
void write_pa_record(const std::string& path, const PaRecord& rec);

}  // namespace mimodpd
