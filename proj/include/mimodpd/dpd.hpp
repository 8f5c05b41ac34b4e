#pragma once

#include <string>
#include <variant>
#include <vector>

#include "mimodpd/ad_ops.hpp"
#include "mimodpd/gmp.hpp"
#include "mimodpd/rng.hpp"
#include "mimodpd/signals.hpp"

namespace mimodpd {

enum class DpdScheme { kNone, kTdGmp, kFdGmp, kFdNn, kFdCnn };

std::string scheme_name(DpdScheme s);
DpdScheme parse_scheme(const std::string& name);

/// Per-branch GMP between the IDFT and the PA. rate_factor 1 runs the model on
/// the critically sampled signal (N_d samples per symbol) and interpolates
/// back; rate_factor == osr runs it on the oversampled signal.
struct TdGmpDpd {
  std::vector<GmpModel> branches;
  int rate_factor = 1;
};

/// Per-UE GMP in the time domain of each stream. Coefficients are normalized:
/// y = scale * GMP(x / scale), scale set to the stream RMS.
struct FdGmpDpd {
  GmpStructure structure;
  int users = 1;
  double input_scale = 1.0;
  ad::ParamTensor coeffs;  // [users, P, 2]
};

struct FdNnDpd {
  int users = 1;
  int memory = 3;
  int width = 15;
  int hidden_layers = 1;
  std::vector<ad::ParamTensor> weights;  // [out, in]
  std::vector<ad::ParamTensor> biases;

  int input_width() const { return 2 * users * (memory + 1); }
};

struct FdCnnDpd {
  int users = 1;
  int n_data = 0;
  int kernels = 20;
  int kernel_size = 3;
  int stride = 1;
  ad::ParamTensor conv1_w, conv1_b, conv2_w, conv2_b;
  std::vector<ad::ParamTensor> fc_w, fc_b;  // per UE: [2 n_data, 2 side'^2], [2 n_data]

  int side() const;       // ceil(sqrt(n_data))
  int conv_side() const;  // ceil(side / stride)
};

using DpdModel = std::variant<TdGmpDpd, FdGmpDpd, FdNnDpd, FdCnnDpd>;

DpdScheme scheme_of(const DpdModel& m);
bool is_frequency_domain(DpdScheme s);

FdGmpDpd make_fd_gmp(int users, const GmpStructure& s, double input_scale);
FdNnDpd make_fd_nn(int users, int memory, int width, int hidden_layers, Rng& rng);
FdCnnDpd make_fd_cnn(int users, int n_data, int kernels, int kernel_size, int stride, Rng& rng);

/// Trainable tensors of an FD model (empty for TD-GMP).
std::vector<ad::ParamTensor*> parameters(DpdModel& m);
std::size_t parameter_count(const DpdModel& m);

/// Differentiable FD predistortion. x: [S*U, N, 2] grid (symbol-major),
/// returns the same shape. Parameters are registered on the tape.
ad::Var fd_forward(ad::Tape& t, DpdModel& m, ad::Var x, const OfdmConfig& cfg);

/// Plain evaluation helpers (no gradients kept).
SignalGrid fd_predistort(DpdModel& m, const SignalGrid& s, const OfdmConfig& cfg);
SignalGrid fd_gmp_predistort(FdGmpDpd& d, const SignalGrid& s, const OfdmConfig& cfg);
SignalGrid fd_nn_predistort(FdNnDpd& d, const SignalGrid& s, const OfdmConfig& cfg);
SignalGrid fd_cnn_predistort(FdCnnDpd& d, const SignalGrid& s, const OfdmConfig& cfg);

/// x is B x (S*N), S whole OFDM symbols of N samples each; the GMP memory is
/// zero-padded at symbol edges.
SignalBlock td_gmp_predistort(const TdGmpDpd& d, const SignalBlock& x, const OfdmConfig& cfg);

/// Critically sampled view of one oversampled symbol: samples x[R m]. Exact
/// when only data bins are occupied.
std::vector<cplx> decimate_symbol(const cplx* x, const OfdmConfig& cfg);
/// Band-limited interpolation of N_d critical samples back to N samples.
std::vector<cplx> interpolate_symbol(const std::vector<cplx>& v, const OfdmConfig& cfg);
/// In-band part of an oversampled symbol, critically sampled.
std::vector<cplx> inband_critical(const cplx* x, const OfdmConfig& cfg);

}  // namespace mimodpd
