#pragma once

#include <string>
#include <vector>

#include "mimodpd/chain.hpp"
#include "mimodpd/complexity.hpp"
#include "mimodpd/scenario.hpp"

namespace mimodpd {

const char* library_version();

struct SchemeOutcome {
  SchemeSpec spec;
  TrainedDpd trained;
  std::vector<double> evm_pct;
  double aclr_dbc = 0.0;
  double trp_aclr_dbc = 0.0;
  SideLobe sll;
  BeamPattern pattern;
  std::vector<double> psd_precoded, psd_pa_out;
  VictimStudy victims;
};

struct RunReport {
  ScenarioConfig cfg;
  double gain = 1.0;
  double pa_fit_nmse_db = 0.0;
  std::vector<SchemeOutcome> schemes;
  std::vector<std::string> files;  // written artifacts
};

struct RunOptions {
  std::string out_dir;     // empty = write nothing
  bool victims = true;
  bool evaluate = true;    // false: train only (the "train" verb)
  int threads = 1;         // schemes trained/evaluated concurrently
};

/// Trains and evaluates every scheme of cfg.dpd.schemes on one shared system
/// (same channel, PA, evaluation symbols and noise), then writes metrics.csv,
/// psd.csv, beampattern.csv, loss.csv, victims.csv, config.json and one
/// checkpoint per trained model. Results do not depend on threads.
RunReport run_scenario(const ScenarioConfig& cfg, const RunOptions& opt);

/// Writes complexity.csv (report at the given parameters), sweep_b.csv,
/// sweep_u.csv and crossover.csv.
std::vector<std::string> run_complexity(const ComplexityParams& p, const std::vector<int>& b_values,
                                        const std::vector<int>& u_values,
                                        const std::string& out_dir, std::uint64_t seed);

/// Worker cap from MIMO_DPD_THREADS (default 1, at least 1).
int threads_from_env();

}  // namespace mimodpd
