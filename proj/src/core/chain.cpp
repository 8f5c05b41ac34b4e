#include "mimodpd/chain.hpp"

#include <cmath>

#include "mimodpd/fft.hpp"
#include "mimodpd/ila.hpp"

namespace mimodpd {

namespace {

// Stream tags for Rng::fork.
constexpr std::uint64_t kTagChannel = 0x6368616e;
constexpr std::uint64_t kTagGain = 0x6761696e;
constexpr std::uint64_t kTagProbe = 0x70726f62;
constexpr std::uint64_t kTagNoise = 0x6e6f6973;

// PA bank applied to each OFDM symbol separately (memory zero-padded at the
// symbol edges, as in training).
SignalBlock bank_per_symbol(const PaBank& bank, const SignalBlock& x, int n, bool crosstalk) {
  SignalBlock out{CMat(x.data.rows(), x.data.cols()), x.sample_rate_hz};
  const Eigen::Index symbols = x.data.cols() / n;
  for (Eigen::Index s = 0; s < symbols; ++s) {
    SignalBlock part{x.data.middleCols(s * n, n), x.sample_rate_hz};
    out.data.middleCols(s * n, n) = pa_bank_forward(bank, part, crosstalk).data;
  }
  return out;
}

// Row-wise per-symbol IDFT of a (S*rows) x N grid stacked symbol-major into
// a rows x (S*N) block.
SignalBlock grid_to_block(const CMat& grid, int rows, int n, double fs) {
  const Eigen::Index symbols = grid.rows() / rows;
  SignalBlock b{CMat(rows, symbols * n), fs};
  CMat g = grid;
  fft_rows(g, true);
  for (Eigen::Index s = 0; s < symbols; ++s)
    b.data.middleCols(s * n, n) = g.middleRows(s * rows, rows);
  return b;
}

double sum_power(const CMat& m) { return m.squaredNorm(); }

ChannelRealization single_column(const ChannelRealization& ch, int u) {
  ChannelRealization out;
  for (const auto& f : ch.fd) out.fd.push_back(f.col(u));
  out.large_scale_db = {ch.large_scale_db.at(u)};
  return out;
}

}  // namespace

System build_system(const ScenarioConfig& cfg) {
  cfg.validate();
  System sys;
  sys.cfg = cfg;
  const OfdmConfig& of = cfg.ofdm;
  const int B = cfg.channel.n_antennas;
  const int N = of.n_total();
  Rng root(cfg.seed_value());

  GmpModel pa;
  if (!cfg.pa.record.empty()) {
    const PaRecord rec = read_pa_record(cfg.pa.record);
    auto fit = fit_gmp_ls(rec.in, rec.out, GmpStructure{7, 5, 1});
    double peak = 0.0;
    for (const auto& v : rec.in) peak = std::max(peak, std::abs(v));
    fit.model.sat_level = peak;
    pa = fit.model;
    sys.pa_fit_nmse_db = fit.nmse_db;
  } else {
    const PaFixture fx = synth_pa_fixture(cfg.pa.fixture_seed, cfg.pa.sat_dbm);
    pa = fx.model;
    sys.pa_fit_nmse_db = fx.fit_nmse_db;
  }
  sys.bank.models.assign(B, pa);
  if (cfg.crosstalk.enabled) {
    sys.bank.crosstalk_in = crosstalk_preset(B, cfg.crosstalk.level_db);
    sys.bank.crosstalk_out = sys.bank.crosstalk_in;
  }

  sys.branch_power = dbm_to_v2(cfg.pa.sat_dbm - 10.0 - cfg.pa.backoff_db);
  sys.p_t = B * sys.branch_power * static_cast<double>(N) / of.n_data;
  // Receiver noise is specified over the data band; spread it over its bins.
  sys.noise_v2_per_bin = dbm_to_v2(cfg.channel.noise_power_dbm) * N / of.n_data;

  Rng ch_rng = root.fork(kTagChannel);
  sys.channel = sample_channel(cfg.channel, N, ch_rng);
  sys.precoder = make_precoder(cfg.precoder, sys.channel, of, sys.p_t, cfg.allocation);

  Rng g_rng = root.fork(kTagGain);
  const CMat sy = draw_symbols(sys, g_rng, 16);
  const TxSignals tx = transmit(sys, nullptr, sy);
  sys.gain = std::sqrt(sum_power(tx.pa_out.data) / sum_power(tx.precoded.data));
  sys.bank.gain = sys.gain;
  return sys;
}

CMat draw_symbols(const System& sys, Rng& rng, int n_symbols) {
  return random_qam(rng, n_symbols * sys.cfg.channel.n_users, sys.cfg.ofdm.n_data,
                    sys.cfg.ofdm.qam_order);
}

TxSignals transmit(const System& sys, const DpdModel* dpd, const CMat& symbols,
                   const Precoder* precoder) {
  const OfdmConfig& of = sys.cfg.ofdm;
  const int U = sys.cfg.channel.n_users, B = sys.cfg.channel.n_antennas, N = of.n_total();
  require(symbols.rows() % U == 0 && symbols.cols() == of.n_data, ErrorCode::kShapeMismatch,
          "transmit: symbols must be [S*U, n_data]");
  const Precoder& w = precoder ? *precoder : sys.precoder;
  const Eigen::Index S = symbols.rows() / U;

  SignalGrid s = build_grid(symbols, of);
  if (dpd && is_frequency_domain(scheme_of(*dpd))) {
    DpdModel m = *dpd;
    s = fd_predistort(m, s, of);
  }
  CMat xg(S * B, N);
  for (Eigen::Index k = 0; k < S; ++k) {
    SignalGrid one{s.data.middleRows(k * U, U)};
    xg.middleRows(k * B, B) = precode(w, one).data;
  }
  TxSignals tx;
  tx.precoded = grid_to_block(xg, B, N, of.sample_rate_hz());
  tx.pa_in = tx.precoded;
  if (dpd && scheme_of(*dpd) == DpdScheme::kTdGmp)
    tx.pa_in = td_gmp_predistort(std::get<TdGmpDpd>(*dpd), tx.precoded, of);
  tx.pa_out = bank_per_symbol(sys.bank, tx.pa_in, N, sys.cfg.crosstalk.enabled);
  return tx;
}

CMat receive(const System& sys, const SignalBlock& pa_out, Rng& rng) {
  const OfdmConfig& of = sys.cfg.ofdm;
  const int U = sys.cfg.channel.n_users, N = of.n_total();
  const Eigen::Index S = pa_out.data.cols() / N;
  CMat rx(S * U, of.n_data);
  for (Eigen::Index s = 0; s < S; ++s) {
    SignalBlock part{pa_out.data.middleCols(s * N, N), pa_out.sample_rate_hz};
    const SignalGrid y = apply_channel(sys.channel, ofdm_demodulate(part),
                                       sys.noise_v2_per_bin, rng);
    rx.middleRows(s * U, U) = extract_data(y, of);
  }
  return rx;
}

std::vector<double> evm_per_ue(const System& sys, const CMat& rx, const CMat& symbols) {
  const int U = sys.cfg.channel.n_users;
  const Eigen::Index S = symbols.rows() / U;
  std::vector<double> out;
  for (int u = 0; u < U; ++u) {
    CMat r(S, symbols.cols()), t(S, symbols.cols());
    for (Eigen::Index s = 0; s < S; ++s) {
      r.row(s) = rx.row(s * U + u);
      t.row(s) = symbols.row(s * U + u);
    }
    out.push_back(evm_pct(r, t, sys.cfg.eval.per_subcarrier_evm));
  }
  return out;
}

TrainingEnv training_env(const System& sys) {
  TrainingEnv env;
  env.ofdm = sys.cfg.ofdm;
  env.users = sys.cfg.channel.n_users;
  env.bank = &sys.bank;
  env.with_crosstalk = sys.cfg.crosstalk.enabled;
  env.gain = sys.gain;
  if (sys.cfg.channel.kind == ChannelKind::kFlatLos) {
    const Precoder w = sys.precoder;
    env.next_precoder = [w](Rng&) { return w; };
  } else {
    const ScenarioConfig cfg = sys.cfg;
    const double p_t = sys.p_t;
    env.next_precoder = [cfg, p_t](Rng& rng) {
      const auto ch = sample_channel(cfg.channel, cfg.ofdm.n_total(), rng);
      return make_precoder(cfg.precoder, ch, cfg.ofdm, p_t, cfg.allocation);
    };
  }
  return env;
}

namespace {

TrainedDpd train_td_gmp(const System& sys, const SchemeSpec& spec, Rng& rng) {
  const OfdmConfig& of = sys.cfg.ofdm;
  const int B = sys.cfg.channel.n_antennas, N = of.n_total(), Nd = of.n_data;
  const TdGmpConfig& tc = sys.cfg.dpd.td_gmp;
  const bool critical = spec.td_rate == 1;
  const int seg = critical ? Nd : N;

  Rng probe_rng = rng.fork(kTagProbe);
  // Same probe sample count at both rates; the critical-rate fit overfits otherwise.
  const CMat sy = draw_symbols(sys, probe_rng, critical ? tc.probe_symbols * of.osr : tc.probe_symbols);
  const SignalBlock x = transmit(sys, nullptr, sy).precoded;
  const Eigen::Index S = x.data.cols() / N;

  std::vector<std::vector<cplx>> probes(B);
  for (int b = 0; b < B; ++b) {
    const cplx* row = x.data.data() + static_cast<Eigen::Index>(b) * x.data.cols();
    if (!critical) {
      probes[b].assign(row, row + x.data.cols());
    } else {
      for (Eigen::Index s = 0; s < S; ++s) {
        auto v = inband_critical(row + s * N, of);
        probes[b].insert(probes[b].end(), v.begin(), v.end());
      }
    }
  }

  const bool xt = sys.cfg.crosstalk.enabled;
  BankPlant plant = [&](const std::vector<std::vector<cplx>>& z) {
    SignalBlock in{CMat(B, S * N), x.sample_rate_hz};
    for (int b = 0; b < B; ++b)
      for (Eigen::Index s = 0; s < S; ++s) {
        if (!critical) {
          for (int n = 0; n < N; ++n) in.data(b, s * N + n) = z[b][s * N + n];
        } else {
          std::vector<cplx> v(z[b].begin() + s * Nd, z[b].begin() + (s + 1) * Nd);
          auto up = interpolate_symbol(v, of);
          for (int n = 0; n < N; ++n) in.data(b, s * N + n) = up[n];
        }
      }
    const SignalBlock out = bank_per_symbol(sys.bank, in, N, xt);
    std::vector<std::vector<cplx>> y(B);
    for (int b = 0; b < B; ++b) {
      const cplx* row = out.data.data() + static_cast<Eigen::Index>(b) * out.data.cols();
      if (!critical) {
        y[b].assign(row, row + out.data.cols());
      } else {
        for (Eigen::Index s = 0; s < S; ++s) {
          auto v = inband_critical(row + s * N, of);
          y[b].insert(y[b].end(), v.begin(), v.end());
        }
      }
    }
    return y;
  };

  IlaOptions opt;
  opt.iters = tc.ila_iters;
  opt.noise_sigma_v = sys.cfg.pa.measurement_noise_v;
  opt.noise_seed = rng.fork(kTagNoise).next_u64();
  opt.segment = static_cast<std::size_t>(seg);
  const IlaBankResult res = ila_train_bank(plant, probes, tc.structure, opt);

  TrainedDpd out;
  out.model = TdGmpDpd{res.dpd, critical ? 1 : of.osr};
  out.ila_nmse_db = res.nmse_db;
  return out;
}

}  // namespace

TrainedDpd train_dpd(const System& sys, const SchemeSpec& spec, Rng& rng) {
  const ScenarioConfig& c = sys.cfg;
  const OfdmConfig& of = c.ofdm;
  const int U = c.channel.n_users;
  TrainedDpd out;
  TrainConfig tc = c.training;
  DpdModel model;
  switch (spec.scheme) {
    case DpdScheme::kNone:
      return out;
    case DpdScheme::kTdGmp:
      return train_td_gmp(sys, spec, rng);
    case DpdScheme::kFdGmp:
      // GMP input normalized to sqrt(10) times the unit-power stream RMS
      model = make_fd_gmp(U, c.dpd.fd_gmp.structure,
                          std::sqrt(10.0 * of.n_data / static_cast<double>(of.n_total())));
      tc.adam.lr = c.dpd.fd_gmp.lr;
      tc.final_lr = c.dpd.fd_gmp.final_lr;
      break;
    case DpdScheme::kFdNn: {
      Rng init = rng.fork(0x696e6974);
      model = make_fd_nn(U, c.dpd.fd_nn.memory, c.dpd.fd_nn.width, c.dpd.fd_nn.hidden_layers,
                         init);
      tc.adam.lr = c.dpd.fd_nn.lr;
      tc.final_lr = c.dpd.fd_nn.final_lr;
      break;
    }
    case DpdScheme::kFdCnn: {
      Rng init = rng.fork(0x696e6974);
      model = make_fd_cnn(U, of.n_data, c.dpd.fd_cnn.kernels, c.dpd.fd_cnn.kernel_size,
                          c.dpd.fd_cnn.stride, init);
      tc.adam.lr = c.dpd.fd_cnn.lr;
      tc.final_lr = c.dpd.fd_cnn.final_lr;
      break;
    }
  }
  const TrainingEnv env = training_env(sys);
  const TrainResult r = train_fd_dpd(model, env, tc, rng);
  out.model = std::move(model);
  out.loss = r.loss;
  return out;
}

Evaluation evaluate(const System& sys, const DpdModel* dpd, Rng& rng) {
  const OfdmConfig& of = sys.cfg.ofdm;
  Rng sym_rng = rng.fork(0x73796d);
  Rng noise_rng = rng.fork(kTagNoise);
  const CMat sy = draw_symbols(sys, sym_rng, sys.cfg.eval.symbols);
  Evaluation ev;
  ev.tx = transmit(sys, dpd, sy);
  const CMat rx = receive(sys, ev.tx.pa_out, noise_rng);
  ev.evm_pct = evm_per_ue(sys, rx, sy);

  const BandPlan plan = make_band_plan(of);
  ev.aclr_dbc = aclr_dbc(symbol_spectrum(ev.tx.pa_out, of.n_total()), plan);
  ev.pattern = far_field_pattern(ev.tx.pa_out, angle_grid(sys.cfg.eval.angles), plan);
  ev.trp_aclr_dbc = trp_aclr_dbc(ev.pattern);
  ev.sll = side_lobe_level(ev.pattern.inband);
  ev.psd_precoded = estimate_psd(ev.tx.precoded, sys.cfg.eval.psd_segment, 0.5);
  ev.psd_pa_out = estimate_psd(ev.tx.pa_out, sys.cfg.eval.psd_segment, 0.5);
  return ev;
}

VictimStudy victim_study(const System& sys, const TxSignals& tx, int n_victims, Rng& rng) {
  require(n_victims >= 1, ErrorCode::kInvalidArgument, "victims: need at least one");
  const ScenarioConfig& c = sys.cfg;
  const OfdmConfig& of = c.ofdm;
  const int B = c.channel.n_antennas, N = of.n_total();
  const BandPlan plan = make_band_plan(of);
  const UePosition ue = c.channel.ue_positions.at(0);

  VictimStudy vs;
  const double p_ue = received_band_power(tx.pa_out, single_column(sys.channel, 0), plan.inband);
  vs.ue_inband_dbm = v2_to_dbm(p_ue / N);

  ChannelScenario vsc = c.channel;
  vsc.n_users = 1;
  vsc.pathloss.shadow_sigma_db = 0.0;
  Rng no_shadow(0);
  const double beta_v2 = db_to_lin(large_scale_fading(ue.distance_m, vsc.pathloss, no_shadow));
  const double beta_ue2 = db_to_lin(sys.channel.large_scale_db.at(0));

  // SISO reference: one PA at the same drive, single stream.
  Rng siso_rng = rng.fork(0x7369736f);
  const int S = static_cast<int>(tx.pa_out.data.cols() / N);
  CMat sym = random_qam(siso_rng, S, of.n_data, of.qam_order);
  CMat g = build_grid(sym, of).data * std::sqrt(sys.branch_power * N / of.n_data);
  SignalBlock siso_in = grid_to_block(g, 1, N, of.sample_rate_hz());
  PaBank one;
  one.models = {sys.bank.models.at(0)};
  const SignalBlock siso_out = bank_per_symbol(one, siso_in, N, false);
  const auto spec = symbol_spectrum(siso_out, N);
  double p_in = 0.0, p_up = 0.0, p_lo = 0.0;
  for (int k : plan.inband) p_in += spec[k];
  for (int k : plan.upper) p_up += spec[k];
  for (int k : plan.lower) p_lo += spec[k];
  // Scale so beta_ue^2 * c2 * p_in (mean power) equals the MIMO UE's in-band power.
  const double c2 = (p_ue / N) / (beta_ue2 * p_in);

  Rng vrng = rng.fork(0x76696374);
  for (int v = 0; v < n_victims; ++v) {
    ChannelRealization vch;
    ChannelRealization sch;
    if (c.channel.kind == ChannelKind::kFlatLos) {
      const double theta = vrng.uniform(-kPi / 2, kPi / 2);
      const CVec h = los_response(B, theta, ue.distance_m, c.channel.carrier_hz,
                                  std::sqrt(beta_v2));
      vch.fd.assign(N, h);
      sch.fd.assign(N, CMat::Constant(1, 1, cplx(std::sqrt(beta_v2), 0.0)));
    } else {
      vsc.ue_positions = {ue};
      vch = sample_rayleigh(vsc, N, vrng);
      ChannelScenario one_sc = vsc;
      one_sc.n_antennas = 1;
      sch = sample_rayleigh(one_sc, N, vrng);
    }
    const double mimo = std::max(received_band_power(tx.pa_out, vch, plan.upper),
                                 received_band_power(tx.pa_out, vch, plan.lower)) / N;
    vs.mimo_dbm.push_back(v2_to_dbm(mimo));
    double siso;
    if (c.channel.kind == ChannelKind::kFlatLos) {
      siso = c2 * beta_v2 * std::max(p_up, p_lo);
    } else {
      siso = c2 * std::max(received_band_power(siso_out, sch, plan.upper),
                           received_band_power(siso_out, sch, plan.lower)) / N;
    }
    vs.siso_dbm.push_back(v2_to_dbm(siso));
  }
  return vs;
}

}  // namespace mimodpd
