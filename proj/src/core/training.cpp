#include "mimodpd/training.hpp"

#include <cmath>

namespace mimodpd {

void adam_step(const std::vector<ad::ParamTensor*>& params, AdamState& state,
               const AdamConfig& cfg) {
  for (const auto* p : params)
    for (double g : p->grad)
      require(std::isfinite(g), ErrorCode::kNonFinite, "adam: non-finite gradient in " + p->name);
  if (state.m.size() != params.size()) {
    state.m.clear();
    state.v.clear();
    for (const auto* p : params) {
      state.m.emplace_back(p->values.size(), 0.0);
      state.v.emplace_back(p->values.size(), 0.0);
    }
    state.step = 0;
  }
  ++state.step;
  const double c1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(state.step));
  const double c2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(state.step));
  for (std::size_t i = 0; i < params.size(); ++i) {
    auto& p = *params[i];
    auto& m = state.m[i];
    auto& v = state.v[i];
    require(m.size() == p.values.size(), ErrorCode::kShapeMismatch,
            "adam: optimizer state does not match " + p.name);
    for (std::size_t k = 0; k < p.values.size(); ++k) {
      const double g = p.grad[k];
      m[k] = cfg.beta1 * m[k] + (1.0 - cfg.beta1) * g;
      v[k] = cfg.beta2 * v[k] + (1.0 - cfg.beta2) * g * g;
      const double mh = m[k] / c1;
      const double vh = v[k] / c2;
      p.values[k] -= cfg.lr * mh / (std::sqrt(vh) + cfg.eps);
    }
  }
}

ad::Var bank_coefficients(ad::Tape& t, const PaBank& bank) {
  require(bank.branches() > 0, ErrorCode::kInvalidArgument, "bank has no branches");
  const int P = bank.models[0].structure.coeff_count();
  std::vector<double> v;
  v.reserve(static_cast<std::size_t>(bank.branches()) * P * 2);
  for (const auto& m : bank.models) {
    require(m.structure == bank.models[0].structure, ErrorCode::kShapeMismatch,
            "bank models must share one structure");
    for (const cplx& c : m.flatten()) {
      v.push_back(c.real());
      v.push_back(c.imag());
    }
  }
  return t.constant({bank.branches(), P, 2}, std::move(v));
}

ad::Var batch_loss(ad::Tape& t, DpdModel* dpd, const TrainingEnv& env, const Precoder& w,
                   const CMat& symbols) {
  require(env.bank != nullptr, ErrorCode::kInvalidArgument, "training env has no PA bank");
  const PaBank& bank = *env.bank;
  const int U = env.users;
  require(symbols.rows() % U == 0 && symbols.cols() == env.ofdm.n_data,
          ErrorCode::kShapeMismatch, "batch_loss: symbols must be [S*U, n_data]");
  const SignalGrid s = build_grid(symbols, env.ofdm);

  // Desired output: G times the undistorted, pre-crosstalk PA input.
  ad::Var target;
  {
    ad::Tape ref;
    ad::Var u = ad::cfft(ref, ad::precode(ref, w.matrices, ad::complex_constant(ref, s.data)), true);
    std::vector<double> tv = ref.value(u);
    for (double& d : tv) d *= env.gain;
    target = t.constant(ref.shape(u), std::move(tv));
  }

  ad::Var x = ad::complex_constant(t, s.data);
  if (dpd != nullptr) x = fd_forward(t, *dpd, x, env.ofdm);
  ad::Var v = ad::cfft(t, ad::precode(t, w.matrices, x), true);
  if (env.with_crosstalk && bank.crosstalk_in.size() > 0) v = ad::mix(t, bank.crosstalk_in, v);
  ad::GmpOpConfig pa{bank.models[0].structure, 1.0, bank.models[0].sat_level};
  v = ad::gmp(t, v, bank_coefficients(t, bank), pa);
  if (env.with_crosstalk && bank.crosstalk_out.size() > 0) v = ad::mix(t, bank.crosstalk_out, v);
  return ad::mse(t, v, target);
}

TrainResult train_fd_dpd(DpdModel& dpd, const TrainingEnv& env, const TrainConfig& cfg,
                         Rng& rng) {
  require(is_frequency_domain(scheme_of(dpd)), ErrorCode::kInvalidArgument,
          "train_fd_dpd: model is not a frequency-domain DPD");
  require(static_cast<bool>(env.next_precoder), ErrorCode::kInvalidArgument,
          "train_fd_dpd: no precoder policy");
  require(cfg.symbols_per_batch >= 1 && cfg.max_batches >= 1, ErrorCode::kInvalidArgument,
          "train_fd_dpd: batch size and max batches must be positive");
  auto params = parameters(dpd);
  AdamState state;
  TrainResult res;
  Rng sym_rng = rng.fork(0x73796d);
  Rng ch_rng = rng.fork(0x6368);
  double initial = 0.0;
  int above = 0;
  for (int batch = 0; batch < cfg.max_batches; ++batch) {
    const Precoder w = env.next_precoder(ch_rng);
    const CMat symbols =
        random_qam(sym_rng, cfg.symbols_per_batch * env.users, env.ofdm.n_data, env.ofdm.qam_order);
    for (auto* p : params) p->zero_grad();
    ad::Tape tape;
    ad::Var loss = batch_loss(tape, &dpd, env, w, symbols);
    const double l = tape.value(loss)[0];
    require(std::isfinite(l), ErrorCode::kNonFinite, "train_fd_dpd: non-finite loss");
    res.loss.push_back(l);
    res.batches = batch + 1;
    if (batch == 0) {
      initial = l;
      res.epsilon = cfg.epsilon_abs > 0.0 ? cfg.epsilon_abs : cfg.epsilon_fraction * initial;
    }
    // Loss threshold is checked first, so it wins a tie with max_batches.
    if (l <= res.epsilon) {
      res.reached_epsilon = true;
      break;
    }
    above = l > cfg.divergence_factor * initial ? above + 1 : 0;
    if (above >= cfg.divergence_patience)
      throw DivergedError("train_fd_dpd: loss above " + std::to_string(cfg.divergence_factor) +
                              "x initial for " + std::to_string(cfg.divergence_patience) +
                              " batches",
                          res.loss);
    tape.backward(loss);
    AdamConfig step_cfg = cfg.adam;
    if (cfg.final_lr > 0.0 && cfg.max_batches > 1)
      step_cfg.lr = cfg.adam.lr * std::pow(cfg.final_lr / cfg.adam.lr,
                                           static_cast<double>(batch) / (cfg.max_batches - 1));
    adam_step(params, state, step_cfg);
  }
  return res;
}

std::vector<double> smooth_blocks(const std::vector<double>& x, int window) {
  std::vector<double> out;
  if (window <= 0) return out;
  for (std::size_t i = 0; i + window <= x.size(); i += window) {
    double s = 0.0;
    for (int k = 0; k < window; ++k) s += x[i + k];
    out.push_back(s / window);
  }
  return out;
}

}  // namespace mimodpd
