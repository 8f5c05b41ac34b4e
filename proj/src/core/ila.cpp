#include "mimodpd/ila.hpp"

#include <cmath>

#include "mimodpd/pa.hpp"

namespace mimodpd {

IlaResult ila_train(const Plant& plant, const std::vector<cplx>& probe, const GmpStructure& s,
                    const IlaOptions& opt) {
  require(opt.iters >= 0, ErrorCode::kInvalidArgument, "ila: iters must be >= 0");
  require(probe.size() >= 3u * static_cast<std::size_t>(s.coeff_count()),
          ErrorCode::kInvalidArgument, "ila: probe shorter than 3x the coefficient count");
  IlaResult res;
  res.dpd = GmpModel::identity(s);

  const auto y0 = plant(probe);
  double gain = opt.gain;
  if (gain <= 0.0) {
    double pin = 0.0, pout = 0.0;
    for (std::size_t i = 0; i < probe.size(); ++i) {
      pin += std::norm(probe[i]);
      pout += std::norm(y0[i]);
    }
    gain = std::sqrt(pout / pin);
  }
  require(gain > 0.0 && std::isfinite(gain), ErrorCode::kInvalidArgument,
          "ila: measured gain must be positive");
  res.gain = gain;

  auto cascade_nmse = [&](const std::vector<cplx>& y) {
    std::vector<cplx> yn(y.size());
    for (std::size_t i = 0; i < y.size(); ++i) yn[i] = y[i] / gain;
    return nmse_db(yn, probe);
  };
  res.nmse_db.push_back(cascade_nmse(y0));
  double best = res.nmse_db[0];

  Rng noise(opt.noise_seed, 0x696c61);
  std::vector<cplx> z = probe;
  std::vector<cplx> y = y0;
  for (int it = 1; it <= opt.iters; ++it) {
    std::vector<cplx> obs(y.size());
    for (std::size_t i = 0; i < y.size(); ++i) obs[i] = y[i];
    add_measurement_noise(obs, opt.noise_sigma_v, noise);
    double peak = 0.0;
    for (auto& v : obs) {
      v /= gain;
      peak = std::max(peak, std::abs(v));
    }
    auto fit = fit_gmp_ls(obs, z, s, opt.ridge, 1e12, opt.segment);
    // Guard against runaway extrapolation far beyond the fitted magnitudes.
    fit.model.sat_level = 1.5 * peak;
    z = gmp_forward_segmented(fit.model, probe, opt.segment);
    y = plant(z);
    const double e = cascade_nmse(y);
    res.nmse_db.push_back(e);
    if (e < best) {
      best = e;
      res.best_iter = it;
      res.dpd = fit.model;
    }
  }
  return res;
}

IlaResult ila_train(const GmpModel& pa, const std::vector<cplx>& probe, const GmpStructure& s,
                    const IlaOptions& opt) {
  const std::size_t seg = opt.segment;
  Plant plant = [&pa, seg](const std::vector<cplx>& u) {
    return gmp_forward_segmented(pa, u, seg);
  };
  return ila_train(plant, probe, s, opt);
}

IlaBankResult ila_train_bank(const BankPlant& plant,
                             const std::vector<std::vector<cplx>>& probes,
                             const GmpStructure& s, const IlaOptions& opt) {
  require(opt.iters >= 0, ErrorCode::kInvalidArgument, "ila: iters must be >= 0");
  require(!probes.empty(), ErrorCode::kInvalidArgument, "ila: no branches");
  for (const auto& p : probes)
    require(p.size() >= 3u * static_cast<std::size_t>(s.coeff_count()) &&
                p.size() == probes[0].size(),
            ErrorCode::kInvalidArgument,
            "ila: probes must share a length of at least 3x the coefficient count");
  const std::size_t nb = probes.size();
  IlaBankResult res;
  res.dpd.assign(nb, GmpModel::identity(s));

  auto y = plant(probes);
  require(y.size() == nb, ErrorCode::kShapeMismatch, "ila: plant changed the branch count");
  double gain = opt.gain;
  if (gain <= 0.0) {
    double pin = 0.0, pout = 0.0;
    for (std::size_t b = 0; b < nb; ++b)
      for (std::size_t i = 0; i < probes[b].size(); ++i) {
        pin += std::norm(probes[b][i]);
        pout += std::norm(y[b][i]);
      }
    gain = std::sqrt(pout / pin);
  }
  require(gain > 0.0 && std::isfinite(gain), ErrorCode::kInvalidArgument,
          "ila: measured gain must be positive");
  res.gain = gain;

  auto cascade_nmse = [&](const std::vector<std::vector<cplx>>& out) {
    double err = 0.0, ref = 0.0;
    for (std::size_t b = 0; b < nb; ++b)
      for (std::size_t i = 0; i < probes[b].size(); ++i) {
        err += std::norm(out[b][i] / gain - probes[b][i]);
        ref += std::norm(probes[b][i]);
      }
    return 10.0 * std::log10(err / ref);
  };
  res.nmse_db.push_back(cascade_nmse(y));
  double best = res.nmse_db[0];

  Rng noise(opt.noise_seed, 0x696c61);
  std::vector<std::vector<cplx>> z = probes;
  for (int it = 1; it <= opt.iters; ++it) {
    std::vector<GmpModel> models(nb);
    for (std::size_t b = 0; b < nb; ++b) {
      std::vector<cplx> obs = y[b];
      add_measurement_noise(obs, opt.noise_sigma_v, noise);
      double peak = 0.0;
      for (auto& v : obs) {
        v /= gain;
        peak = std::max(peak, std::abs(v));
      }
      auto fit = fit_gmp_ls(obs, z[b], s, opt.ridge, 1e12, opt.segment);
      fit.model.sat_level = 1.5 * peak;
      models[b] = std::move(fit.model);
    }
    for (std::size_t b = 0; b < nb; ++b)
      z[b] = gmp_forward_segmented(models[b], probes[b], opt.segment);
    y = plant(z);
    const double e = cascade_nmse(y);
    res.nmse_db.push_back(e);
    if (e < best) {
      best = e;
      res.best_iter = it;
      res.dpd = models;
    }
  }
  return res;
}

}  // namespace mimodpd
