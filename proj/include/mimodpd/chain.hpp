#pragma once

#include <optional>
#include <vector>

#include "mimodpd/channel.hpp"
#include "mimodpd/dpd.hpp"
#include "mimodpd/metrics.hpp"
#include "mimodpd/pa.hpp"
#include "mimodpd/precoding.hpp"
#include "mimodpd/scenario.hpp"
#include "mimodpd/training.hpp"

namespace mimodpd {

/// Everything fixed for one scenario run: the evaluation channel and precoder,
/// the PA bank and its measured gain.
struct System {
  ScenarioConfig cfg;
  ChannelRealization channel;
  Precoder precoder;
  PaBank bank;
  double pa_fit_nmse_db = 0.0;
  double p_t = 0.0;            // precoder power target (v^2 per data bin)
  double branch_power = 0.0;   // mean PA input power per branch (v^2)
  double gain = 1.0;           // amplitude gain G of the no-DPD chain
  double noise_v2_per_bin = 0.0;
};

/// Builds the PA bank (fixture or fitted record), draws the evaluation channel,
/// sets the precoder power for the configured drive and measures G.
System build_system(const ScenarioConfig& cfg);

/// Fresh (S*U) x N_d QAM symbols, symbol-major (row s*U + u).
CMat draw_symbols(const System& sys, Rng& rng, int n_symbols);

struct TxSignals {
  SignalBlock precoded;  // after precoder + IDFT, before any TD-DPD
  SignalBlock pa_in;     // what enters the PA bank (before input crosstalk)
  SignalBlock pa_out;
};

/// symbols -> FD-DPD -> precoder -> IDFT -> TD-DPD -> crosstalk -> PAs -> crosstalk.
/// dpd == nullptr runs without predistortion.
TxSignals transmit(const System& sys, const DpdModel* dpd, const CMat& symbols,
                   const Precoder* precoder = nullptr);

/// UE-side symbols (same layout as draw_symbols) through the evaluation
/// channel with receiver noise drawn from rng.
CMat receive(const System& sys, const SignalBlock& pa_out, Rng& rng);

/// EVM per UE in percent.
std::vector<double> evm_per_ue(const System& sys, const CMat& rx, const CMat& symbols);

struct TrainedDpd {
  std::optional<DpdModel> model;  // empty for "none"
  std::vector<double> loss;       // FD schemes: per-batch training loss
  std::vector<double> ila_nmse_db;  // TD-GMP: cascade NMSE per iteration
};

/// TD-GMP: per-branch ILA on the array's own PA inputs. FD schemes: gradient training
/// with a fresh channel + precoder per batch for Rayleigh, the fixed one for LOS.
TrainedDpd train_dpd(const System& sys, const SchemeSpec& spec, Rng& rng);

/// TrainingEnv for gradient training over this system.
TrainingEnv training_env(const System& sys);

struct Evaluation {
  std::vector<double> evm_pct;  // per UE
  double aclr_dbc = 0.0;        // conducted, summed over branches
  double trp_aclr_dbc = 0.0;
  SideLobe sll;
  BeamPattern pattern;
  std::vector<double> psd_precoded, psd_pa_out;  // Welch, v^2 per bin
  TxSignals tx;
};

/// Transmit eval.symbols fresh symbols from rng, receive, compute metrics.
Evaluation evaluate(const System& sys, const DpdModel* dpd, Rng& rng);

struct VictimStudy {
  std::vector<double> mimo_dbm;  // worst adjacent band per victim
  std::vector<double> siso_dbm;
  double ue_inband_dbm = 0.0;
};

/// Victims at the first UE's distance, uniform angle (LOS) or fresh fading
/// (Rayleigh), no shadowing. The SISO baseline is one PA at the same drive
/// level whose output is scaled so the first UE receives the same in-band power.
VictimStudy victim_study(const System& sys, const TxSignals& tx, int n_victims, Rng& rng);

}  // namespace mimodpd
