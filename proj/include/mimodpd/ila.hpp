#pragma once

#include <functional>
#include <vector>

#include "mimodpd/gmp.hpp"
#include "mimodpd/rng.hpp"

namespace mimodpd {

/// Anything that maps a PA-input series to the observed PA-output series.
using Plant = std::function<std::vector<cplx>(const std::vector<cplx>&)>;

struct IlaOptions {
  int iters = 2;
  /// Linear target gain; 0 measures sqrt(P_out / P_in) on the undistorted probe.
  double gain = 0.0;
  /// Noise added to every feedback observation (volts, E|n|^2 = sigma^2).
  double noise_sigma_v = 0.0;
  std::uint64_t noise_seed = 0;
  /// Evaluate and fit per segment of this length (0 = one segment).
  std::size_t segment = 0;
  double ridge = 0.0;
};

struct IlaResult {
  GmpModel dpd;
  /// Cascade NMSE of plant(dpd(probe)) / G against the probe, index 0 = no DPD.
  std::vector<double> nmse_db;
  int best_iter = 0;
  double gain = 1.0;
};

/// Indirect learning: fit a postdistorter on (observed output / G, PA input),
/// copy it in front of the plant, repeat. Returns the best iterate; iters == 0
/// returns the identity model.
IlaResult ila_train(const Plant& plant, const std::vector<cplx>& probe, const GmpStructure& s,
                    const IlaOptions& opt);
IlaResult ila_train(const GmpModel& pa, const std::vector<cplx>& probe, const GmpStructure& s,
                    const IlaOptions& opt);

/// Several branches driven together (e.g. coupled through crosstalk): maps all
/// branch inputs to all observed branch outputs.
using BankPlant =
    std::function<std::vector<std::vector<cplx>>(const std::vector<std::vector<cplx>>&)>;

struct IlaBankResult {
  std::vector<GmpModel> dpd;
  /// Cascade NMSE over all branches, index 0 = no DPD.
  std::vector<double> nmse_db;
  int best_iter = 0;
  double gain = 1.0;
};

/// Per-branch indirect learning run jointly: every iteration predistorts all
/// branches, observes all outputs, then fits one postdistorter per branch. One
/// common gain G. Each branch's fit only sees its own input and output.
IlaBankResult ila_train_bank(const BankPlant& plant,
                             const std::vector<std::vector<cplx>>& probes,
                             const GmpStructure& s, const IlaOptions& opt);

}  // namespace mimodpd
