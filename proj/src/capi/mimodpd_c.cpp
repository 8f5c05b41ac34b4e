#include "mimodpd/mimodpd.h"

#include <cmath>
#include <cstring>
#include <limits>
#include <string>

#include "mimodpd/complexity.hpp"
#include "mimodpd/metrics.hpp"
#include "mimodpd/runner.hpp"
#include "mimodpd/scenario.hpp"

struct mimodpd_config {
  mimodpd::ScenarioConfig cfg;
};

struct mimodpd_report {
  mimodpd::RunReport rep;
  std::vector<std::string> names;
};

namespace {

thread_local std::string g_last_error;

mimodpd_status to_status(mimodpd::ErrorCode c) {
  using mimodpd::ErrorCode;
  switch (c) {
    case ErrorCode::kInvalidArgument: return MIMODPD_ERR_INVALID_ARGUMENT;
    case ErrorCode::kShapeMismatch: return MIMODPD_ERR_SHAPE_MISMATCH;
    case ErrorCode::kIllConditioned: return MIMODPD_ERR_ILL_CONDITIONED;
    case ErrorCode::kRankDeficient: return MIMODPD_ERR_RANK_DEFICIENT;
    case ErrorCode::kNonFinite: return MIMODPD_ERR_NON_FINITE;
    case ErrorCode::kDiverged: return MIMODPD_ERR_DIVERGED;
    case ErrorCode::kTapeConsumed: return MIMODPD_ERR_TAPE_CONSUMED;
    case ErrorCode::kIo: return MIMODPD_ERR_IO;
    case ErrorCode::kConfig: return MIMODPD_ERR_CONFIG;
  }
  return MIMODPD_ERR_INTERNAL;
}

template <class F>
mimodpd_status guarded(F&& f) {
  try {
    g_last_error.clear();
    f();
    return MIMODPD_OK;
  } catch (const mimodpd::Error& e) {
    g_last_error = e.what();
    return to_status(e.code());
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return MIMODPD_ERR_INTERNAL;
  } catch (...) {
    g_last_error = "unknown error";
    return MIMODPD_ERR_INTERNAL;
  }
}

mimodpd_status null_arg(const char* what) {
  g_last_error = std::string("null argument: ") + what;
  return MIMODPD_ERR_INVALID_ARGUMENT;
}

mimodpd::ComplexityParams from_c(const mimodpd_complexity_params& c) {
  mimodpd::ComplexityParams p;
  p.K = c.K;
  p.M_TD = c.M_TD;
  p.M_FD = c.M_FD;
  p.G = c.G;
  p.B = c.B;
  p.U = c.U;
  p.V = c.V;
  p.N = c.N;
  p.N_d = c.N_d;
  p.D = c.D;
  p.K_NN = c.K_NN;
  p.N_conv1 = c.N_conv1;
  p.K_C = c.K_C;
  p.K_S = c.K_S;
  return p;
}

const std::vector<std::string>& preset_list() {
  static const std::vector<std::string> names = mimodpd::preset_names();
  return names;
}

}  // namespace

extern "C" {

const char* mimodpd_version(void) { return mimodpd::library_version(); }
const char* mimodpd_last_error(void) { return g_last_error.c_str(); }

const char* mimodpd_status_name(mimodpd_status s) {
  switch (s) {
    case MIMODPD_OK: return "ok";
    case MIMODPD_ERR_INVALID_ARGUMENT: return "invalid argument";
    case MIMODPD_ERR_SHAPE_MISMATCH: return "shape mismatch";
    case MIMODPD_ERR_ILL_CONDITIONED: return "ill-conditioned";
    case MIMODPD_ERR_RANK_DEFICIENT: return "rank deficient";
    case MIMODPD_ERR_NON_FINITE: return "non-finite value";
    case MIMODPD_ERR_DIVERGED: return "training diverged";
    case MIMODPD_ERR_TAPE_CONSUMED: return "tape consumed";
    case MIMODPD_ERR_IO: return "i/o error";
    case MIMODPD_ERR_CONFIG: return "configuration error";
    case MIMODPD_ERR_INTERNAL: return "internal error";
  }
  return "unknown status";
}

size_t mimodpd_preset_count(void) { return preset_list().size(); }
const char* mimodpd_preset_name(size_t index) {
  return index < preset_list().size() ? preset_list()[index].c_str() : nullptr;
}

mimodpd_status mimodpd_config_new(mimodpd_config** out) {
  if (!out) return null_arg("out");
  return guarded([&] { *out = new mimodpd_config{}; });
}

mimodpd_status mimodpd_config_from_preset(const char* name, mimodpd_config** out) {
  if (!name) return null_arg("name");
  if (!out) return null_arg("out");
  return guarded([&] { *out = new mimodpd_config{mimodpd::preset(name)}; });
}

mimodpd_status mimodpd_config_apply_json(mimodpd_config* cfg, const char* json_text) {
  if (!cfg) return null_arg("cfg");
  if (!json_text) return null_arg("json_text");
  return guarded([&] { cfg->cfg = mimodpd::parse_config(json_text, cfg->cfg); });
}

mimodpd_status mimodpd_config_apply_file(mimodpd_config* cfg, const char* path) {
  if (!cfg) return null_arg("cfg");
  if (!path) return null_arg("path");
  return guarded([&] { cfg->cfg = mimodpd::load_config_file(path, cfg->cfg); });
}

mimodpd_status mimodpd_config_set_seed(mimodpd_config* cfg, uint64_t seed) {
  if (!cfg) return null_arg("cfg");
  cfg->cfg.seed = seed;
  return MIMODPD_OK;
}

mimodpd_status mimodpd_config_validate(const mimodpd_config* cfg) {
  if (!cfg) return null_arg("cfg");
  return guarded([&] { cfg->cfg.validate(); });
}

mimodpd_status mimodpd_config_to_json(const mimodpd_config* cfg, char* buf, size_t cap,
                                      size_t* needed) {
  if (!cfg) return null_arg("cfg");
  if (!buf && cap > 0) return null_arg("buf");
  return guarded([&] {
    const std::string s = mimodpd::config_to_json(cfg->cfg);
    if (needed) *needed = s.size() + 1;
    if (cap > 0) {
      const size_t n = std::min(cap - 1, s.size());
      std::memcpy(buf, s.data(), n);
      buf[n] = '\0';
    }
  });
}

size_t mimodpd_config_scheme_count(const mimodpd_config* cfg) {
  return cfg ? cfg->cfg.dpd.schemes.size() : 0;
}

void mimodpd_config_free(mimodpd_config* cfg) { delete cfg; }

mimodpd_status mimodpd_run(const mimodpd_config* cfg, const mimodpd_run_options* opt,
                           mimodpd_report** out) {
  if (!cfg) return null_arg("cfg");
  if (!out) return null_arg("out");
  return guarded([&] {
    mimodpd::RunOptions ro;
    if (opt) {
      ro.out_dir = opt->out_dir ? opt->out_dir : "";
      ro.evaluate = opt->mode != MIMODPD_MODE_TRAIN;
      ro.threads = opt->threads > 0 ? opt->threads : 1;
      ro.victims = opt->victims != 0 && ro.evaluate;
    }
    auto* r = new mimodpd_report{};
    try {
      r->rep = mimodpd::run_scenario(cfg->cfg, ro);
    } catch (...) {
      delete r;
      throw;
    }
    for (const auto& s : r->rep.schemes) r->names.push_back(s.spec.name());
    *out = r;
  });
}

size_t mimodpd_report_scheme_count(const mimodpd_report* r) {
  return r ? r->rep.schemes.size() : 0;
}

const char* mimodpd_report_scheme_name(const mimodpd_report* r, size_t i) {
  return r && i < r->names.size() ? r->names[i].c_str() : nullptr;
}

size_t mimodpd_report_user_count(const mimodpd_report* r) {
  return r ? static_cast<size_t>(r->rep.cfg.channel.n_users) : 0;
}

mimodpd_status mimodpd_report_evm(const mimodpd_report* r, size_t scheme, size_t ue,
                                  double* evm_pct) {
  if (!r) return null_arg("r");
  if (!evm_pct) return null_arg("evm_pct");
  if (scheme >= r->rep.schemes.size() || ue >= r->rep.schemes[scheme].evm_pct.size()) {
    g_last_error = "report: scheme or UE index out of range";
    return MIMODPD_ERR_INVALID_ARGUMENT;
  }
  *evm_pct = r->rep.schemes[scheme].evm_pct[ue];
  return MIMODPD_OK;
}

mimodpd_status mimodpd_report_metrics(const mimodpd_report* r, size_t scheme,
                                      mimodpd_scheme_metrics* out) {
  if (!r) return null_arg("r");
  if (!out) return null_arg("out");
  if (scheme >= r->rep.schemes.size()) {
    g_last_error = "report: scheme index out of range";
    return MIMODPD_ERR_INVALID_ARGUMENT;
  }
  return guarded([&] {
    const auto& s = r->rep.schemes[scheme];
    const double nan = std::numeric_limits<double>::quiet_NaN();
    out->aclr_dbc = s.aclr_dbc;
    out->trp_aclr_dbc = s.trp_aclr_dbc;
    out->sll_db = s.sll.sll_db;
    out->main_lobe_dbm = s.sll.main_lobe_db;
    out->victim_median_mimo_dbm =
        s.victims.mimo_dbm.empty() ? nan : mimodpd::quantile(s.victims.mimo_dbm, 0.5);
    out->victim_median_siso_dbm =
        s.victims.siso_dbm.empty() ? nan : mimodpd::quantile(s.victims.siso_dbm, 0.5);
    out->initial_loss = s.trained.loss.empty() ? nan : s.trained.loss.front();
    out->final_loss = s.trained.loss.empty() ? nan : s.trained.loss.back();
    out->batches = s.trained.loss.size();
  });
}

double mimodpd_report_gain(const mimodpd_report* r) { return r ? r->rep.gain : 0.0; }

size_t mimodpd_report_file_count(const mimodpd_report* r) { return r ? r->rep.files.size() : 0; }

const char* mimodpd_report_file(const mimodpd_report* r, size_t i) {
  return r && i < r->rep.files.size() ? r->rep.files[i].c_str() : nullptr;
}

void mimodpd_report_free(mimodpd_report* r) { delete r; }

void mimodpd_complexity_defaults(mimodpd_complexity_params* p) {
  if (!p) return;
  const mimodpd::ComplexityParams d;
  *p = mimodpd_complexity_params{d.K, d.M_TD, d.M_FD, d.G, d.B, d.U, d.V,
                                 d.N, d.N_d, d.D, d.K_NN, d.N_conv1, d.K_C, d.K_S};
}

mimodpd_status mimodpd_flops(const mimodpd_complexity_params* p, mimodpd_flop_scheme scheme,
                             int64_t* exact_num, int64_t* exact_den, double* approx) {
  if (!p) return null_arg("p");
  return guarded([&] {
    const auto report = mimodpd::flop_report(from_c(*p));
    const auto idx = static_cast<size_t>(scheme);
    mimodpd::require(idx < report.entries.size(), mimodpd::ErrorCode::kInvalidArgument,
                     "flops: unknown scheme");
    const auto& e = report.entries[idx];
    if (exact_num) *exact_num = e.exact.num;
    if (exact_den) *exact_den = e.exact.den;
    if (approx) *approx = e.approx;
  });
}

mimodpd_status mimodpd_complexity_run(const mimodpd_complexity_params* p, const int* b_values,
                                      size_t n_b, const int* u_values, size_t n_u,
                                      const char* out_dir, uint64_t seed) {
  if (!p) return null_arg("p");
  if (!out_dir) return null_arg("out_dir");
  if (n_b > 0 && !b_values) return null_arg("b_values");
  if (n_u > 0 && !u_values) return null_arg("u_values");
  return guarded([&] {
    std::vector<int> b(b_values, b_values + n_b), u(u_values, u_values + n_u);
    mimodpd::run_complexity(from_c(*p), b, u, out_dir, seed);
  });
}

}  // extern "C"
