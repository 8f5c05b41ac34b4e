#include "mimodpd/runner.hpp"

#include <atomic>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <thread>

#include "mimodpd/checkpoint.hpp"

#ifndef MIMODPD_VERSION
#define MIMODPD_VERSION "0.0.0"
#endif

namespace mimodpd {

const char* library_version() { return MIMODPD_VERSION; }

namespace {

std::string num(double v) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

std::string hex64(std::uint64_t v) {
  char buf[24];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

class CsvFile {
 public:
  CsvFile(const std::string& dir, const std::string& name, const std::string& header)
      : path_((std::filesystem::path(dir) / name).string()) {
    body_ << header << '\n';
  }
  void row(const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) body_ << (i ? "," : "") << cells[i];
    body_ << '\n';
  }
  /// Appends the metadata block and writes the file.
  std::string finish(std::uint64_t config_hash, std::uint64_t seed) {
    body_ << "# config_hash=" << hex64(config_hash) << '\n'
          << "# seed=" << seed << '\n'
          << "# version=" << library_version() << '\n';
    std::ofstream f(path_, std::ios::binary);
    require(static_cast<bool>(f), ErrorCode::kIo, "cannot write " + path_);
    f << body_.str();
    require(static_cast<bool>(f), ErrorCode::kIo, "write failed: " + path_);
    return path_;
  }

 private:
  std::string path_;
  std::ostringstream body_;
};

double to_dbm(double v2) { return v2 > 0.0 ? v2_to_dbm(v2) : -400.0; }

// Stable per-scheme stream tag, independent of list position.
std::uint64_t scheme_tag(const SchemeSpec& s) { return fnv1a64("scheme:" + s.name()); }

template <class F>
void parallel_for(int n, int threads, F&& body) {
  threads = std::max(1, std::min(threads, n));
  if (threads == 1) {
    for (int i = 0; i < n; ++i) body(i);
    return;
  }
  std::atomic<int> next{0};
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(n));
  std::vector<std::thread> pool;
  for (int t = 0; t < threads; ++t)
    pool.emplace_back([&] {
      for (int i = next++; i < n; i = next++) {
        try {
          body(i);
        } catch (...) {
          errors[i] = std::current_exception();
        }
      }
    });
  for (auto& th : pool) th.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

}  // namespace

int threads_from_env() {
  const char* v = std::getenv("MIMO_DPD_THREADS");
  if (!v || !*v) return 1;
  char* end = nullptr;
  const long n = std::strtol(v, &end, 10);
  require(end && *end == '\0' && n >= 1, ErrorCode::kConfig,
          std::string("MIMO_DPD_THREADS must be a positive integer, got '") + v + "'");
  return static_cast<int>(std::min<long>(n, 256));
}

RunReport run_scenario(const ScenarioConfig& cfg, const RunOptions& opt) {
  const System sys = build_system(cfg);
  RunReport rep;
  rep.cfg = cfg;
  rep.gain = sys.gain;
  rep.pa_fit_nmse_db = sys.pa_fit_nmse_db;
  const std::uint64_t seed = cfg.seed_value();
  const Rng root(seed);
  const Rng train_root = root.fork(0x747261696e);
  const Rng eval_root = root.fork(0x6576616c);
  const Rng victim_root = root.fork(0x76696374);

  const int n = static_cast<int>(cfg.dpd.schemes.size());
  rep.schemes.resize(n);
  parallel_for(n, opt.threads, [&](int i) {
    SchemeOutcome& o = rep.schemes[i];
    o.spec = cfg.dpd.schemes[i];
    Rng tr = train_root.fork(scheme_tag(o.spec));
    try {
      o.trained = train_dpd(sys, o.spec, tr);
    } catch (const Error& e) {
      fail(e.code(), "scheme " + o.spec.name() + ": " + e.what());
    }
    if (!opt.evaluate) return;
    // Every scheme sees the same evaluation symbols and receiver noise.
    Rng ev_rng = eval_root;
    const DpdModel* m = o.trained.model ? &*o.trained.model : nullptr;
    Evaluation ev = evaluate(sys, m, ev_rng);
    o.evm_pct = ev.evm_pct;
    o.aclr_dbc = ev.aclr_dbc;
    o.trp_aclr_dbc = ev.trp_aclr_dbc;
    o.sll = ev.sll;
    o.pattern = std::move(ev.pattern);
    o.psd_precoded = std::move(ev.psd_precoded);
    o.psd_pa_out = std::move(ev.psd_pa_out);
    if (opt.victims) {
      Rng vr = victim_root;
      o.victims = victim_study(sys, ev.tx, cfg.eval.victims, vr);
    }
  });

  if (opt.out_dir.empty()) return rep;
  std::filesystem::create_directories(opt.out_dir);
  const std::string cfg_json = config_to_json(cfg);
  const std::uint64_t hash = fnv1a64(cfg_json);
  {
    const std::string p = (std::filesystem::path(opt.out_dir) / "config.json").string();
    std::ofstream f(p, std::ios::binary);
    require(static_cast<bool>(f), ErrorCode::kIo, "cannot write " + p);
    f << cfg_json << '\n';
    rep.files.push_back(p);
  }
  const int U = cfg.channel.n_users;

  {
    CsvFile loss(opt.out_dir, "loss.csv", "scheme,batch,mse");
    for (const auto& o : rep.schemes) {
      for (std::size_t b = 0; b < o.trained.loss.size(); ++b)
        loss.row({o.spec.name(), std::to_string(b), num(o.trained.loss[b])});
    }
    rep.files.push_back(loss.finish(hash, seed));
    CsvFile ila(opt.out_dir, "ila.csv", "scheme,iteration,cascade_nmse_db");
    for (const auto& o : rep.schemes)
      for (std::size_t it = 0; it < o.trained.ila_nmse_db.size(); ++it)
        ila.row({o.spec.name(), std::to_string(it), num(o.trained.ila_nmse_db[it])});
    rep.files.push_back(ila.finish(hash, seed));
  }
  for (const auto& o : rep.schemes) {
    if (!o.trained.model) continue;
    const std::string p =
        (std::filesystem::path(opt.out_dir) / ("model_" + o.spec.name() + ".json")).string();
    save_checkpoint(p, *o.trained.model);
    rep.files.push_back(p);
  }
  if (!opt.evaluate) return rep;

  {
    std::string header = "scheme";
    for (int u = 0; u < U; ++u) header += ",evm_pct_ue" + std::to_string(u);
    header += ",aclr_dbc,trp_aclr_dbc,sll_db,main_lobe_dbm";
    CsvFile m(opt.out_dir, "metrics.csv", header);
    for (const auto& o : rep.schemes) {
      std::vector<std::string> cells{o.spec.name()};
      for (double e : o.evm_pct) cells.push_back(num(e));
      cells.push_back(num(o.aclr_dbc));
      cells.push_back(num(o.trp_aclr_dbc));
      cells.push_back(num(o.sll.sll_db));
      cells.push_back(num(o.sll.main_lobe_db));
      m.row(cells);
    }
    rep.files.push_back(m.finish(hash, seed));
  }
  {
    CsvFile p(opt.out_dir, "psd.csv", "scheme,freq_hz,precoded_dbm,pa_out_dbm");
    const int L = cfg.eval.psd_segment;
    const double fs = cfg.ofdm.sample_rate_hz();
    for (const auto& o : rep.schemes)
      for (int i = 0; i < L; ++i) {
        const int k = (i + L / 2) % L;  // ascending frequency
        p.row({o.spec.name(), num(signed_bin(k, L) * fs / L), num(to_dbm(o.psd_precoded[k])),
               num(to_dbm(o.psd_pa_out[k]))});
      }
    rep.files.push_back(p.finish(hash, seed));
  }
  {
    CsvFile b(opt.out_dir, "beampattern.csv", "scheme,theta_deg,inband_dbm,oob_dbm");
    for (const auto& o : rep.schemes) {
      const auto oob = o.pattern.oob();
      for (std::size_t a = 0; a < o.pattern.angles_rad.size(); ++a)
        b.row({o.spec.name(), num(o.pattern.angles_rad[a] * 180.0 / kPi),
               num(to_dbm(o.pattern.inband[a])), num(to_dbm(oob[a]))});
    }
    rep.files.push_back(b.finish(hash, seed));
  }
  if (opt.victims) {
    CsvFile v(opt.out_dir, "victims.csv", "scheme,victim,mimo_oob_dbm,siso_oob_dbm");
    for (const auto& o : rep.schemes)
      for (std::size_t i = 0; i < o.victims.mimo_dbm.size(); ++i)
        v.row({o.spec.name(), std::to_string(i), num(o.victims.mimo_dbm[i]),
               num(o.victims.siso_dbm[i])});
    rep.files.push_back(v.finish(hash, seed));
  }
  return rep;
}

std::vector<std::string> run_complexity(const ComplexityParams& p, const std::vector<int>& b_values,
                                        const std::vector<int>& u_values,
                                        const std::string& out_dir, std::uint64_t seed) {
  p.validate();
  std::filesystem::create_directories(out_dir);
  std::ostringstream key;
  key << "complexity K=" << p.K << " M_TD=" << p.M_TD << " M_FD=" << p.M_FD << " G=" << p.G
      << " B=" << p.B << " U=" << p.U << " V=" << p.V << " N=" << p.N << " N_d=" << p.N_d
      << " D=" << p.D << " K_NN=" << p.K_NN << " N_conv1=" << p.N_conv1 << " K_C=" << p.K_C
      << " K_S=" << p.K_S << " B:";
  for (int b : b_values) key << ' ' << b;
  key << " U:";
  for (int u : u_values) key << ' ' << u;
  const std::uint64_t hash = fnv1a64(key.str());

  auto reference = [](FlopScheme s, SweepAxis a, int v) -> std::string {
    for (const auto& r : reference_points())
      if (r.scheme == s && r.axis == a && r.axis_value == v) return num(r.flops);
    return "";
  };
  const bool reference_grid = p.K == 7 && p.N == 1024 && p.N_d == 256;

  std::vector<std::string> files;
  {
    CsvFile f(out_dir, "complexity.csv",
              "scheme,exact_flops,exact_rational,exact_sig3,approx_flops,approx_over_exact");
    for (const auto& e : flop_report(p).entries)
      f.row({flop_scheme_name(e.scheme), std::to_string(e.exact.rounded()),
             format_rational(e.exact), format_sig3(e.exact.value()), num(e.approx),
             num(e.approx / e.exact.value())});
    files.push_back(f.finish(hash, seed));
  }
  std::vector<Crossover> crossings;
  auto write_sweep = [&](SweepAxis axis, const std::vector<int>& values, const char* name,
                         const char* axis_name) {
    if (values.empty()) return;
    const SweepResult r = sweep(p, axis, values);
    CsvFile f(out_dir, name,
              std::string("scheme,") + axis_name + ",exact_flops,exact_rational,approx_flops," +
                  "reference_flops");
    for (const auto& row : r.rows) {
      const bool ref_ok = reference_grid && ((axis == SweepAxis::kB && p.U == 1) ||
                                         (axis == SweepAxis::kU && p.B == 100));
      f.row({flop_scheme_name(row.scheme), std::to_string(row.axis_value),
             std::to_string(row.exact.rounded()), format_rational(row.exact), num(row.approx),
             ref_ok ? reference(row.scheme, axis, row.axis_value) : ""});
    }
    files.push_back(f.finish(hash, seed));
    for (const auto& c : r.crossovers) crossings.push_back(c);
  };
  write_sweep(SweepAxis::kB, b_values, "sweep_b.csv", "B");
  write_sweep(SweepAxis::kU, u_values, "sweep_u.csv", "U");
  {
    CsvFile f(out_dir, "crossover.csv", "fd_scheme,td_scheme,axis,axis_value,fd_cheaper_after");
    // Crossovers are appended B sweep first, then U sweep.
    std::size_t nb = b_values.empty() ? 0 : sweep(p, SweepAxis::kB, b_values).crossovers.size();
    for (std::size_t i = 0; i < crossings.size(); ++i) {
      const auto& c = crossings[i];
      f.row({flop_scheme_name(c.fd_scheme), flop_scheme_name(c.td_scheme), i < nb ? "B" : "U",
             std::to_string(c.axis_value), c.fd_cheaper_after ? "1" : "0"});
    }
    files.push_back(f.finish(hash, seed));
  }
  return files;
}

}  // namespace mimodpd
