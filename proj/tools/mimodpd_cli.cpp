// Command-line front end; talks to the simulator only through the C API.
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <map>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "mimodpd/mimodpd.h"

namespace {

struct Failure {
  int code;
  std::string msg;
};

void check(mimodpd_status s, const std::string& what) {
  if (s != MIMODPD_OK)
    throw Failure{static_cast<int>(s),
                  what + ": " + mimodpd_status_name(s) + ": " + mimodpd_last_error()};
}

using ConfigPtr = std::unique_ptr<mimodpd_config, decltype(&mimodpd_config_free)>;
using ReportPtr = std::unique_ptr<mimodpd_report, decltype(&mimodpd_report_free)>;

struct ScenarioArgs {
  std::string preset;
  std::string config;
  std::vector<std::string> schemes;
  std::string out;
  std::int64_t seed = -1;
  bool no_victims = false;
};

void add_scenario_flags(CLI::App* app, ScenarioArgs& a) {
  app->add_option("--preset", a.preset, "Named scenario to start from");
  app->add_option("--config", a.config, "JSON scenario file overlaid on the preset")
      ->check(CLI::ExistingFile);
  app->add_option("--seed", a.seed, "Root seed (mandatory unless the config sets one)")
      ->check(CLI::NonNegativeNumber);
  app->add_option("--out", a.out, "Output directory for CSVs and checkpoints");
  app->add_option("--schemes", a.schemes, "Override the DPD scheme list")->delimiter(',');
  app->add_flag("--no-victims", a.no_victims, "Skip the victim out-of-band study");
}

ConfigPtr build_config(const ScenarioArgs& a) {
  mimodpd_config* raw = nullptr;
  if (a.preset.empty())
    check(mimodpd_config_new(&raw), "config");
  else
    check(mimodpd_config_from_preset(a.preset.c_str(), &raw), "preset '" + a.preset + "'");
  ConfigPtr cfg(raw, &mimodpd_config_free);
  if (!a.config.empty()) check(mimodpd_config_apply_file(cfg.get(), a.config.c_str()), a.config);
  if (!a.schemes.empty()) {
    nlohmann::json j;
    j["dpd"]["schemes"] = a.schemes;
    check(mimodpd_config_apply_json(cfg.get(), j.dump().c_str()), "--schemes");
  }
  if (a.seed >= 0)
    check(mimodpd_config_set_seed(cfg.get(), static_cast<std::uint64_t>(a.seed)), "--seed");
  check(mimodpd_config_validate(cfg.get()), "config");
  return cfg;
}

int env_threads() {
  const char* v = std::getenv("MIMO_DPD_THREADS");
  if (!v || !*v) return 1;
  char* end = nullptr;
  const long n = std::strtol(v, &end, 10);
  if (*end != '\0' || n < 1) throw Failure{2, "MIMO_DPD_THREADS must be a positive integer"};
  return static_cast<int>(n);
}

ReportPtr run(const ScenarioArgs& a, mimodpd_mode mode) {
  ConfigPtr cfg = build_config(a);
  mimodpd_run_options opt{a.out.c_str(), mode, env_threads(), a.no_victims ? 0 : 1};
  mimodpd_report* raw = nullptr;
  check(mimodpd_run(cfg.get(), &opt, &raw), "run");
  return ReportPtr(raw, &mimodpd_report_free);
}

std::string fmt(double v, int prec = 2) {
  if (std::isnan(v)) return "-";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.*f", prec, v);
  return buf;
}

void print_table(const mimodpd_report* r, bool evaluated) {
  const size_t n_ue = mimodpd_report_user_count(r);
  std::printf("%-12s", "scheme");
  if (evaluated) {
    for (size_t u = 0; u < n_ue; ++u) std::printf(" %9s", ("evm%_ue" + std::to_string(u)).c_str());
    std::printf(" %9s %9s %9s", "aclr_dBc", "trp_dBc", "sll_dB");
  }
  std::printf(" %11s %11s %7s\n", "loss_first", "loss_last", "batches");
  for (size_t s = 0; s < mimodpd_report_scheme_count(r); ++s) {
    mimodpd_scheme_metrics m{};
    check(mimodpd_report_metrics(r, s, &m), "metrics");
    std::printf("%-12s", mimodpd_report_scheme_name(r, s));
    if (evaluated) {
      for (size_t u = 0; u < n_ue; ++u) {
        double e = 0;
        check(mimodpd_report_evm(r, s, u, &e), "evm");
        std::printf(" %9s", fmt(e).c_str());
      }
      std::printf(" %9s %9s %9s", fmt(m.aclr_dbc).c_str(), fmt(m.trp_aclr_dbc).c_str(),
                  fmt(m.sll_db).c_str());
    }
    char first[32], last[32];
    std::snprintf(first, sizeof first, "%.4g", m.initial_loss);
    std::snprintf(last, sizeof last, "%.4g", m.final_loss);
    std::printf(" %11s %11s %7zu\n", std::isnan(m.initial_loss) ? "-" : first,
                std::isnan(m.final_loss) ? "-" : last, m.batches);
  }
}

void list_files(const mimodpd_report* r) {
  for (size_t i = 0; i < mimodpd_report_file_count(r); ++i)
    std::printf("wrote %s\n", mimodpd_report_file(r, i));
}

std::map<std::string, int*> param_fields(mimodpd_complexity_params& p) {
  return {{"K", &p.K},       {"M_TD", &p.M_TD}, {"M_FD", &p.M_FD},       {"G", &p.G},
          {"B", &p.B},       {"U", &p.U},       {"V", &p.V},             {"N", &p.N},
          {"N_d", &p.N_d},   {"D", &p.D},       {"K_NN", &p.K_NN},       {"N_conv1", &p.N_conv1},
          {"K_C", &p.K_C},   {"K_S", &p.K_S}};
}

void set_param(mimodpd_complexity_params& p, const std::string& key, long long v) {
  auto fields = param_fields(p);
  auto it = fields.find(key);
  if (it == fields.end()) throw Failure{MIMODPD_ERR_CONFIG, "complexity: unknown parameter '" + key + "'"};
  *it->second = static_cast<int>(v);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"MIMO digital predistortion simulator"};
  app.set_version_flag("--version", std::string(mimodpd_version()));
  app.require_subcommand(1);

  ScenarioArgs run_args, cmp_args, train_args;
  auto* run_cmd = app.add_subcommand("run", "Train and evaluate the configured schemes");
  add_scenario_flags(run_cmd, run_args);
  auto* cmp_cmd = app.add_subcommand("compare", "Evaluate two or more schemes side by side");
  add_scenario_flags(cmp_cmd, cmp_args);
  auto* train_cmd = app.add_subcommand("train", "Train only; writes loss traces and checkpoints");
  add_scenario_flags(train_cmd, train_args);

  auto* cx_cmd = app.add_subcommand("complexity", "FLOP counts and B/U sweeps");
  std::string cx_config, cx_out;
  std::vector<std::string> cx_set;
  std::vector<int> b_values{1, 4, 8, 16, 32, 64, 100, 128, 256};
  std::vector<int> u_values{1, 2, 4, 8, 16};
  std::int64_t cx_seed = 0;
  cx_cmd->add_option("--config", cx_config, "JSON object of parameter overrides")
      ->check(CLI::ExistingFile);
  cx_cmd->add_option("--set", cx_set, "Parameter override KEY=VALUE (repeatable)");
  cx_cmd->add_option("--b", b_values, "Antenna counts for the B sweep")->delimiter(',');
  cx_cmd->add_option("--u", u_values, "User counts for the U sweep")->delimiter(',');
  cx_cmd->add_option("--out", cx_out, "Output directory")->required();
  cx_cmd->add_option("--seed", cx_seed, "Seed recorded in CSV footers")
      ->check(CLI::NonNegativeNumber);

  auto* presets_cmd = app.add_subcommand("presets", "List named scenarios");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    if (*run_cmd) {
      ReportPtr r = run(run_args, MIMODPD_MODE_RUN);
      print_table(r.get(), true);
      list_files(r.get());
    } else if (*cmp_cmd) {
      ConfigPtr probe = build_config(cmp_args);
      if (mimodpd_config_scheme_count(probe.get()) < 2)
        throw Failure{MIMODPD_ERR_CONFIG, "compare needs at least two schemes"};
      ReportPtr r = run(cmp_args, MIMODPD_MODE_RUN);
      print_table(r.get(), true);
      list_files(r.get());
    } else if (*train_cmd) {
      ReportPtr r = run(train_args, MIMODPD_MODE_TRAIN);
      print_table(r.get(), false);
      list_files(r.get());
    } else if (*cx_cmd) {
      mimodpd_complexity_params p;
      mimodpd_complexity_defaults(&p);
      if (!cx_config.empty()) {
        std::ifstream in(cx_config);
        nlohmann::json j;
        try {
          j = nlohmann::json::parse(in);
        } catch (const std::exception& e) {
          throw Failure{MIMODPD_ERR_CONFIG, cx_config + ": " + e.what()};
        }
        if (!j.is_object()) throw Failure{MIMODPD_ERR_CONFIG, cx_config + ": expected an object"};
        for (auto& [k, v] : j.items()) {
          if (!v.is_number_integer())
            throw Failure{MIMODPD_ERR_CONFIG, "complexity: '" + k + "' must be an integer"};
          set_param(p, k, v.get<long long>());
        }
      }
      for (const auto& kv : cx_set) {
        const auto eq = kv.find('=');
        if (eq == std::string::npos) throw Failure{MIMODPD_ERR_CONFIG, "--set expects KEY=VALUE"};
        try {
          size_t used = 0;
          const std::string val = kv.substr(eq + 1);
          const long long v = std::stoll(val, &used);
          if (used != val.size()) throw std::invalid_argument(val);
          set_param(p, kv.substr(0, eq), v);
        } catch (const std::logic_error&) {
          throw Failure{MIMODPD_ERR_CONFIG, "--set: bad integer in '" + kv + "'"};
        }
      }
      check(mimodpd_complexity_run(&p, b_values.data(), b_values.size(), u_values.data(),
                                   u_values.size(), cx_out.c_str(),
                                   static_cast<std::uint64_t>(cx_seed)),
            "complexity");
      static const char* names[] = {"td_gmp_r1", "td_gmp", "fd_gmp", "fd_nn", "fd_cnn"};
      std::printf("%-10s %14s %14s\n", "scheme", "exact", "approx");
      for (int s = 0; s < 5; ++s) {
        std::int64_t num = 0, den = 1;
        double approx = 0;
        check(mimodpd_flops(&p, static_cast<mimodpd_flop_scheme>(s), &num, &den, &approx), "flops");
        std::printf("%-10s %14.6g %14.6g\n", names[s], static_cast<double>(num) / den, approx);
      }
      std::printf("wrote %s/{complexity,sweep_b,sweep_u,crossover}.csv\n", cx_out.c_str());
    } else if (*presets_cmd) {
      for (size_t i = 0; i < mimodpd_preset_count(); ++i) std::printf("%s\n", mimodpd_preset_name(i));
    }
  } catch (const Failure& f) {
    std::fprintf(stderr, "error: %s\n", f.msg.c_str());
    return f.code == 0 ? 1 : f.code;
  }
  return 0;
}
