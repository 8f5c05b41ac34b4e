#pragma once

#include <functional>
#include <vector>

#include "mimodpd/dpd.hpp"
#include "mimodpd/pa.hpp"
#include "mimodpd/precoding.hpp"

namespace mimodpd {

struct AdamConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

struct AdamState {
  std::vector<std::vector<double>> m, v;
  long step = 0;
};

/// One bias-corrected Adam update on every tensor, using its grad. Throws
/// kNonFinite (naming the tensor) before touching anything if a gradient is
/// not finite.
void adam_step(const std::vector<ad::ParamTensor*>& params, AdamState& state,
               const AdamConfig& cfg);

struct TrainConfig {
  AdamConfig adam;
  int symbols_per_batch = 100;
  int max_batches = 5000;
  /// Stop once loss <= epsilon_fraction * initial loss (or epsilon_abs when > 0).
  double epsilon_fraction = 0.01;
  double epsilon_abs = 0.0;
  /// Divergence: loss above factor * initial for this many consecutive batches.
  double divergence_factor = 10.0;
  int divergence_patience = 100;
  /// When > 0, lr decays geometrically to this value at max_batches.
  double final_lr = 0.0;
};

/// Everything downstream of the FD-DPD that training differentiates through.
struct TrainingEnv {
  OfdmConfig ofdm;
  int users = 1;
  const PaBank* bank = nullptr;
  bool with_crosstalk = false;
  /// Amplitude gain G of the desired output G * u.
  double gain = 1.0;
  /// Precoder for each mini-batch (fresh channel + ZF for isotropic, fixed for LOS).
  std::function<Precoder(Rng&)> next_precoder;
};

struct TrainResult {
  std::vector<double> loss;
  int batches = 0;
  bool reached_epsilon = false;
  double epsilon = 0.0;
};

class DivergedError : public Error {
 public:
  DivergedError(const std::string& what, std::vector<double> trace)
      : Error(ErrorCode::kDiverged, what), trace_(std::move(trace)) {}
  const std::vector<double>& trace() const { return trace_; }

 private:
  std::vector<double> trace_;
};

/// Loss of one mini-batch: symbols [S*U, N_d] through dpd -> precoder -> IDFT ->
/// crosstalk -> PA bank -> crosstalk, MSE against G * (no-DPD PA input).
/// Records on the given tape; call backward on the result for gradients.
/// dpd == nullptr evaluates the chain without predistortion.
ad::Var batch_loss(ad::Tape& t, DpdModel* dpd, const TrainingEnv& env, const Precoder& w,
                   const CMat& symbols);

/// PA coefficients of a bank as a constant tensor [B, P, 2].
ad::Var bank_coefficients(ad::Tape& t, const PaBank& bank);

/// Adam on the end-to-end loss. Fresh QAM symbols every batch from rng.
TrainResult train_fd_dpd(DpdModel& dpd, const TrainingEnv& env, const TrainConfig& cfg,
                         Rng& rng);

/// Mean of consecutive non-overlapping windows (the last partial window dropped).
std::vector<double> smooth_blocks(const std::vector<double>& x, int window);

}  // namespace mimodpd
