#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "mimodpd/channel.hpp"
#include "mimodpd/dpd.hpp"
#include "mimodpd/precoding.hpp"
#include "mimodpd/signals.hpp"
#include "mimodpd/training.hpp"

namespace mimodpd {

/// A DPD entry of a run: the scheme plus, for TD-GMP, the rate it runs at
/// ("td_gmp" = oversampled, "td_gmp_r1" = critically sampled).
struct SchemeSpec {
  DpdScheme scheme = DpdScheme::kNone;
  int td_rate = 0;  // 0 = osr

  std::string name() const;
  static SchemeSpec parse(const std::string& s);
};

struct PaConfig {
  std::uint64_t fixture_seed = 7;
  double sat_dbm = 37.6;
  /// Extra dB below the nominal drive, which puts each branch's mean input
  /// power 10 dB under the saturation power.
  double backoff_db = 0.0;
  /// Optional PA input/output CSV; when set, the PA model is fitted to it.
  std::string record;
  double measurement_noise_v = 0.053;
};

struct CrosstalkConfig {
  bool enabled = false;
  double level_db = -10.0;
};

struct TdGmpConfig {
  GmpStructure structure{7, 5, 1};
  int ila_iters = 2;
  int probe_symbols = 16;  // OFDM symbols at R=osr; the R=1 fit draws osr times as many
};

struct FdGmpConfig {
  GmpStructure structure{7, 3, 1};
  double lr = 2e-3;
  double final_lr = 1e-4;
};

struct FdNnConfig {
  int memory = 3;
  int width = 15;
  int hidden_layers = 1;
  double lr = 1e-2;
  double final_lr = 3e-4;
};

struct FdCnnConfig {
  int kernels = 20;
  int kernel_size = 3;
  int stride = 1;
  double lr = 2e-3;
  double final_lr = 2e-4;
};

struct DpdConfig {
  std::vector<SchemeSpec> schemes{SchemeSpec{}};
  TdGmpConfig td_gmp;
  FdGmpConfig fd_gmp;
  FdNnConfig fd_nn;
  FdCnnConfig fd_cnn;
};

struct EvalConfig {
  int symbols = 20;
  int psd_segment = 256;
  int angles = 721;
  bool per_subcarrier_evm = false;
  int victims = 200;
};

struct ScenarioConfig {
  std::string name = "custom";
  std::optional<std::uint64_t> seed;
  OfdmConfig ofdm;
  ChannelScenario channel;
  PrecoderKind precoder = PrecoderKind::kZf;
  PowerAllocation allocation = PowerAllocation::kEqual;
  PaConfig pa;
  CrosstalkConfig crosstalk;
  DpdConfig dpd;
  TrainConfig training;
  EvalConfig eval;

  /// Throws kConfig naming the first problem (missing seed, bad sizes,
  /// missing record file, ...).
  void validate() const;
  std::uint64_t seed_value() const;
};

/// Parse JSON text on top of base (a preset or the defaults). Unknown keys are
/// errors. A top-level "preset" key selects the base instead.
ScenarioConfig parse_config(const std::string& json_text, const ScenarioConfig& base);
ScenarioConfig load_config_file(const std::string& path, const ScenarioConfig& base);
/// Canonical JSON of every field (stable key order).
std::string config_to_json(const ScenarioConfig& cfg);

/// Desk-scale scenarios (B = 16, N_d = 64, R = 4):
///   los_u1, los_u4_pathloss, los_u2, los_u10  - LOS beampattern scenarios
///   iso_u1                                    - isotropic Rayleigh, one UE
///   los_u1_crosstalk                          - LOS with -10 dB coupling
///   los_u1_training                           - FD-DPD training comparison
std::vector<std::string> preset_names();
ScenarioConfig preset(const std::string& name);

/// 64-bit FNV-1a.
std::uint64_t fnv1a64(const std::string& s);

}  // namespace mimodpd
