#include "mimodpd/scenario.hpp"

#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

namespace mimodpd {

using nlohmann::json;

std::string SchemeSpec::name() const {
  if (scheme == DpdScheme::kTdGmp && td_rate == 1) return "td_gmp_r1";
  return scheme_name(scheme);
}

SchemeSpec SchemeSpec::parse(const std::string& s) {
  if (s == "td_gmp_r1") return {DpdScheme::kTdGmp, 1};
  return {parse_scheme(s), 0};
}

namespace {

// Reads fields of one JSON object and rejects keys nobody asked for.
class Fields {
 public:
  Fields(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    require(j.is_object(), ErrorCode::kConfig, "config: " + path_ + " must be an object");
  }
  ~Fields() noexcept(false) {
    if (std::uncaught_exceptions() > 0) return;
    for (auto it = j_.begin(); it != j_.end(); ++it)
      if (!seen_.count(it.key()))
        fail(ErrorCode::kConfig, "config: unknown key " + path_ + "." + it.key());
  }

  const json* find(const std::string& key) {
    seen_.insert(key);
    auto it = j_.find(key);
    return it == j_.end() ? nullptr : &*it;
  }

  template <class T>
  void get(const std::string& key, T& out) {
    if (const json* v = find(key)) {
      try {
        out = v->get<T>();
      } catch (const json::exception&) {
        fail(ErrorCode::kConfig, "config: wrong type for " + path_ + "." + key);
      }
    }
  }

  std::string sub(const std::string& key) const { return path_ + "." + key; }

 private:
  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

void read_structure(const json& j, const std::string& path, GmpStructure& s) {
  Fields f(j, path);
  f.get("order", s.order);
  f.get("memory", s.memory);
  f.get("cross_terms", s.cross_terms);
}

ChannelKind parse_kind(const std::string& s) {
  if (s == "los") return ChannelKind::kFlatLos;
  if (s == "rayleigh") return ChannelKind::kIsotropicRayleigh;
  fail(ErrorCode::kConfig, "config: channel.kind must be 'los' or 'rayleigh', got '" + s + "'");
}

PrecoderKind parse_precoder(const std::string& s) {
  if (s == "zf") return PrecoderKind::kZf;
  if (s == "mrt") return PrecoderKind::kMrt;
  fail(ErrorCode::kConfig, "config: precoder.kind must be 'zf' or 'mrt', got '" + s + "'");
}

PowerAllocation parse_alloc(const std::string& s) {
  if (s == "equal") return PowerAllocation::kEqual;
  if (s == "pathloss_inverse") return PowerAllocation::kPathlossInverse;
  fail(ErrorCode::kConfig,
       "config: precoder.allocation must be 'equal' or 'pathloss_inverse', got '" + s + "'");
}

void apply_json(const json& j, ScenarioConfig& c) {
  Fields top(j, "config");
  top.find("preset");  // handled by parse_config
  top.get("name", c.name);
  if (const json* s = top.find("seed")) {
    require(s->is_number_unsigned() || (s->is_number_integer() && s->get<long long>() >= 0),
            ErrorCode::kConfig, "config: seed must be a non-negative integer");
    c.seed = s->get<std::uint64_t>();
  }
  if (const json* o = top.find("ofdm")) {
    Fields f(*o, "ofdm");
    f.get("n_data", c.ofdm.n_data);
    f.get("osr", c.ofdm.osr);
    f.get("subcarrier_spacing_hz", c.ofdm.subcarrier_spacing_hz);
    f.get("qam_order", c.ofdm.qam_order);
  }
  if (const json* o = top.find("channel")) {
    Fields f(*o, "channel");
    std::string kind;
    f.get("kind", kind);
    if (!kind.empty()) c.channel.kind = parse_kind(kind);
    f.get("antennas", c.channel.n_antennas);
    f.get("taps", c.channel.taps);
    f.get("carrier_hz", c.channel.carrier_hz);
    f.get("noise_power_dbm", c.channel.noise_power_dbm);
    if (const json* users = f.find("users")) {
      require(users->is_array(), ErrorCode::kConfig, "config: channel.users must be an array");
      c.channel.ue_positions.clear();
      for (std::size_t i = 0; i < users->size(); ++i) {
        Fields u((*users)[i], "channel.users[" + std::to_string(i) + "]");
        UePosition p;
        double deg = 0.0;
        u.get("distance_m", p.distance_m);
        u.get("angle_deg", deg);
        p.angle_rad = deg * kPi / 180.0;
        c.channel.ue_positions.push_back(p);
      }
      c.channel.n_users = static_cast<int>(c.channel.ue_positions.size());
    }
    if (const json* pl = f.find("pathloss")) {
      Fields p(*pl, "channel.pathloss");
      p.get("median_gain_db", c.channel.pathloss.median_gain_db);
      p.get("exponent", c.channel.pathloss.exponent);
      p.get("shadow_sigma_db", c.channel.pathloss.shadow_sigma_db);
    }
  }
  if (const json* o = top.find("precoder")) {
    Fields f(*o, "precoder");
    std::string kind, alloc;
    f.get("kind", kind);
    f.get("allocation", alloc);
    if (!kind.empty()) c.precoder = parse_precoder(kind);
    if (!alloc.empty()) c.allocation = parse_alloc(alloc);
  }
  if (const json* o = top.find("pa")) {
    Fields f(*o, "pa");
    f.get("fixture_seed", c.pa.fixture_seed);
    f.get("sat_dbm", c.pa.sat_dbm);
    f.get("backoff_db", c.pa.backoff_db);
    f.get("record", c.pa.record);
    f.get("measurement_noise_v", c.pa.measurement_noise_v);
  }
  if (const json* o = top.find("crosstalk")) {
    Fields f(*o, "crosstalk");
    f.get("enabled", c.crosstalk.enabled);
    f.get("level_db", c.crosstalk.level_db);
  }
  if (const json* o = top.find("dpd")) {
    Fields f(*o, "dpd");
    if (const json* s = f.find("schemes")) {
      require(s->is_array(), ErrorCode::kConfig, "config: dpd.schemes must be an array");
      c.dpd.schemes.clear();
      for (const auto& n : *s) {
        require(n.is_string(), ErrorCode::kConfig, "config: dpd.schemes entries are strings");
        try {
          c.dpd.schemes.push_back(SchemeSpec::parse(n.get<std::string>()));
        } catch (const Error& e) {
          fail(ErrorCode::kConfig, std::string("config: ") + e.what());
        }
      }
    }
    if (const json* t = f.find("td_gmp")) {
      Fields g(*t, "dpd.td_gmp");
      if (const json* st = g.find("structure")) read_structure(*st, "dpd.td_gmp.structure", c.dpd.td_gmp.structure);
      g.get("ila_iters", c.dpd.td_gmp.ila_iters);
      g.get("probe_symbols", c.dpd.td_gmp.probe_symbols);
    }
    if (const json* t = f.find("fd_gmp")) {
      Fields g(*t, "dpd.fd_gmp");
      if (const json* st = g.find("structure")) read_structure(*st, "dpd.fd_gmp.structure", c.dpd.fd_gmp.structure);
      g.get("lr", c.dpd.fd_gmp.lr);
      g.get("final_lr", c.dpd.fd_gmp.final_lr);
    }
    if (const json* t = f.find("fd_nn")) {
      Fields g(*t, "dpd.fd_nn");
      g.get("memory", c.dpd.fd_nn.memory);
      g.get("width", c.dpd.fd_nn.width);
      g.get("hidden_layers", c.dpd.fd_nn.hidden_layers);
      g.get("lr", c.dpd.fd_nn.lr);
      g.get("final_lr", c.dpd.fd_nn.final_lr);
    }
    if (const json* t = f.find("fd_cnn")) {
      Fields g(*t, "dpd.fd_cnn");
      g.get("kernels", c.dpd.fd_cnn.kernels);
      g.get("kernel_size", c.dpd.fd_cnn.kernel_size);
      g.get("stride", c.dpd.fd_cnn.stride);
      g.get("lr", c.dpd.fd_cnn.lr);
      g.get("final_lr", c.dpd.fd_cnn.final_lr);
    }
  }
  if (const json* o = top.find("training")) {
    Fields f(*o, "training");
    f.get("symbols_per_batch", c.training.symbols_per_batch);
    f.get("max_batches", c.training.max_batches);
    f.get("epsilon_fraction", c.training.epsilon_fraction);
    f.get("epsilon_abs", c.training.epsilon_abs);
    f.get("divergence_factor", c.training.divergence_factor);
    f.get("divergence_patience", c.training.divergence_patience);
    f.get("beta1", c.training.adam.beta1);
    f.get("beta2", c.training.adam.beta2);
    f.get("adam_eps", c.training.adam.eps);
  }
  if (const json* o = top.find("eval")) {
    Fields f(*o, "eval");
    f.get("symbols", c.eval.symbols);
    f.get("psd_segment", c.eval.psd_segment);
    f.get("angles", c.eval.angles);
    f.get("per_subcarrier_evm", c.eval.per_subcarrier_evm);
    f.get("victims", c.eval.victims);
  }
}

std::string kind_name(ChannelKind k) { return k == ChannelKind::kFlatLos ? "los" : "rayleigh"; }

json structure_json(const GmpStructure& s) {
  return json{{"order", s.order}, {"memory", s.memory}, {"cross_terms", s.cross_terms}};
}

}  // namespace

void ScenarioConfig::validate() const {
  auto check = [](bool ok, const std::string& what) {
    require(ok, ErrorCode::kConfig, "config: " + what);
  };
  check(seed.has_value(), "seed is mandatory");
  try {
    ofdm.validate();
    channel.validate();
  } catch (const Error& e) {
    fail(ErrorCode::kConfig, std::string("config: ") + e.what());
  }
  check(ofdm.osr >= 3, "ofdm.osr must be at least 3 for the adjacent-band metrics");
  check(!dpd.schemes.empty(), "dpd.schemes is empty");
  for (const auto& s : dpd.schemes)
    check(s.td_rate == 0 || s.td_rate == 1, "td_gmp rate must be 1 or the oversampling ratio");
  check(dpd.td_gmp.ila_iters >= 0 && dpd.td_gmp.probe_symbols >= 1,
        "dpd.td_gmp iterations/probe symbols out of range");
  check(dpd.fd_gmp.lr > 0 && dpd.fd_nn.lr > 0 && dpd.fd_cnn.lr > 0, "learning rates must be > 0");
  check(dpd.fd_cnn.kernel_size % 2 == 1, "dpd.fd_cnn.kernel_size must be odd");
  check(training.symbols_per_batch >= 1 && training.max_batches >= 1,
        "training batch size and count must be positive");
  check(eval.symbols >= 1 && eval.angles >= 3 && eval.victims >= 1, "eval counts out of range");
  check(eval.psd_segment >= 16 && (eval.psd_segment & (eval.psd_segment - 1)) == 0 &&
            eval.psd_segment <= eval.symbols * ofdm.n_total(),
        "eval.psd_segment must be a power of two no longer than the evaluated signal");
  check(pa.sat_dbm > -100 && pa.measurement_noise_v >= 0.0, "pa values out of range");
  check(crosstalk.level_db <= 0.0, "crosstalk.level_db must be <= 0");
  if (!pa.record.empty())
    check(std::filesystem::exists(pa.record), "pa.record file not found: " + pa.record);
}

std::uint64_t ScenarioConfig::seed_value() const {
  require(seed.has_value(), ErrorCode::kConfig, "config: seed is mandatory");
  return *seed;
}

ScenarioConfig parse_config(const std::string& json_text, const ScenarioConfig& base) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::exception& e) {
    fail(ErrorCode::kConfig, std::string("config: ") + e.what());
  }
  require(j.is_object(), ErrorCode::kConfig, "config: top level must be an object");
  ScenarioConfig c = base;
  if (auto it = j.find("preset"); it != j.end()) {
    require(it->is_string(), ErrorCode::kConfig, "config: preset must be a string");
    c = preset(it->get<std::string>());
  }
  apply_json(j, c);
  return c;
}

ScenarioConfig load_config_file(const std::string& path, const ScenarioConfig& base) {
  std::ifstream f(path);
  require(static_cast<bool>(f), ErrorCode::kIo, "cannot read config " + path);
  std::stringstream ss;
  ss << f.rdbuf();
  return parse_config(ss.str(), base);
}

std::string config_to_json(const ScenarioConfig& c) {
  json users = json::array();
  for (const auto& p : c.channel.ue_positions)
    users.push_back({{"distance_m", p.distance_m}, {"angle_deg", p.angle_rad * 180.0 / kPi}});
  json schemes = json::array();
  for (const auto& s : c.dpd.schemes) schemes.push_back(s.name());
  json j{
      {"name", c.name},
      {"seed", c.seed ? json(*c.seed) : json(nullptr)},
      {"ofdm",
       {{"n_data", c.ofdm.n_data},
        {"osr", c.ofdm.osr},
        {"subcarrier_spacing_hz", c.ofdm.subcarrier_spacing_hz},
        {"qam_order", c.ofdm.qam_order}}},
      {"channel",
       {{"kind", kind_name(c.channel.kind)},
        {"antennas", c.channel.n_antennas},
        {"taps", c.channel.taps},
        {"carrier_hz", c.channel.carrier_hz},
        {"noise_power_dbm", c.channel.noise_power_dbm},
        {"users", users},
        {"pathloss",
         {{"median_gain_db", c.channel.pathloss.median_gain_db},
          {"exponent", c.channel.pathloss.exponent},
          {"shadow_sigma_db", c.channel.pathloss.shadow_sigma_db}}}}},
      {"precoder",
       {{"kind", c.precoder == PrecoderKind::kZf ? "zf" : "mrt"},
        {"allocation",
         c.allocation == PowerAllocation::kEqual ? "equal" : "pathloss_inverse"}}},
      {"pa",
       {{"fixture_seed", c.pa.fixture_seed},
        {"sat_dbm", c.pa.sat_dbm},
        {"backoff_db", c.pa.backoff_db},
        {"record", c.pa.record},
        {"measurement_noise_v", c.pa.measurement_noise_v}}},
      {"crosstalk", {{"enabled", c.crosstalk.enabled}, {"level_db", c.crosstalk.level_db}}},
      {"dpd",
       {{"schemes", schemes},
        {"td_gmp",
         {{"structure", structure_json(c.dpd.td_gmp.structure)},
          {"ila_iters", c.dpd.td_gmp.ila_iters},
          {"probe_symbols", c.dpd.td_gmp.probe_symbols}}},
        {"fd_gmp",
         {{"structure", structure_json(c.dpd.fd_gmp.structure)},
          {"lr", c.dpd.fd_gmp.lr},
          {"final_lr", c.dpd.fd_gmp.final_lr}}},
        {"fd_nn",
         {{"memory", c.dpd.fd_nn.memory},
          {"width", c.dpd.fd_nn.width},
          {"hidden_layers", c.dpd.fd_nn.hidden_layers},
          {"lr", c.dpd.fd_nn.lr},
          {"final_lr", c.dpd.fd_nn.final_lr}}},
        {"fd_cnn",
         {{"kernels", c.dpd.fd_cnn.kernels},
          {"kernel_size", c.dpd.fd_cnn.kernel_size},
          {"stride", c.dpd.fd_cnn.stride},
          {"lr", c.dpd.fd_cnn.lr},
          {"final_lr", c.dpd.fd_cnn.final_lr}}}}},
      {"training",
       {{"symbols_per_batch", c.training.symbols_per_batch},
        {"max_batches", c.training.max_batches},
        {"epsilon_fraction", c.training.epsilon_fraction},
        {"epsilon_abs", c.training.epsilon_abs},
        {"divergence_factor", c.training.divergence_factor},
        {"divergence_patience", c.training.divergence_patience},
        {"beta1", c.training.adam.beta1},
        {"beta2", c.training.adam.beta2},
        {"adam_eps", c.training.adam.eps}}},
      {"eval",
       {{"symbols", c.eval.symbols},
        {"psd_segment", c.eval.psd_segment},
        {"angles", c.eval.angles},
        {"per_subcarrier_evm", c.eval.per_subcarrier_evm},
        {"victims", c.eval.victims}}}};
  return j.dump(2);
}

namespace {

ScenarioConfig desk_base() {
  ScenarioConfig c;
  c.seed = 1;
  c.ofdm.n_data = 64;
  c.ofdm.osr = 4;
  c.channel.n_antennas = 16;
  c.channel.noise_power_dbm = -92.1;
  c.training.symbols_per_batch = 4;
  c.training.max_batches = 3000;
  // Run to max_batches: a relative stop at 1% of the initial loss ends
  // randomly initialized networks long before they beat the no-DPD chain.
  c.training.epsilon_fraction = 1e-6;
  c.eval.symbols = 20;
  c.dpd.schemes = {SchemeSpec::parse("none"), SchemeSpec::parse("td_gmp"),
                   SchemeSpec::parse("td_gmp_r1"), SchemeSpec::parse("fd_gmp"),
                   SchemeSpec::parse("fd_nn"), SchemeSpec::parse("fd_cnn")};
  return c;
}

ScenarioConfig los_base(std::vector<std::pair<double, double>> users_m_deg) {
  ScenarioConfig c = desk_base();
  c.channel.kind = ChannelKind::kFlatLos;
  c.channel.carrier_hz = 30e9;
  c.channel.pathloss = {-61.9, 2.1, 4.0};
  for (auto [d, a] : users_m_deg) c.channel.ue_positions.push_back({d, a * kPi / 180.0});
  c.channel.n_users = static_cast<int>(c.channel.ue_positions.size());
  return c;
}

}  // namespace

std::vector<std::string> preset_names() {
  return {"los_u1", "los_u4_pathloss", "los_u2", "los_u10",
          "iso_u1", "los_u1_crosstalk", "los_u1_training"};
}

ScenarioConfig preset(const std::string& name) {
  ScenarioConfig c;
  if (name == "los_u1" || name == "los_u1_crosstalk" || name == "los_u1_training") {
    c = los_base({{28, 30}});
    if (name == "los_u1_crosstalk") c.crosstalk.enabled = true;
    if (name == "los_u1_training") {
      c.dpd.schemes = {SchemeSpec::parse("fd_gmp"), SchemeSpec::parse("fd_nn"),
                       SchemeSpec::parse("fd_cnn")};
      c.training.max_batches = 2000;
    }
  } else if (name == "los_u4_pathloss") {
    c = los_base({{250, -28}, {85, -57}, {48, -14}, {28, -10}});
    c.allocation = PowerAllocation::kPathlossInverse;
  } else if (name == "los_u2") {
    c = los_base({{28, 30}, {28, -45}});
  } else if (name == "los_u10") {
    c = los_base({{28, -60}, {28, -45}, {28, -33}, {28, -20}, {28, -7},
                  {28, 7}, {28, 20}, {28, 33}, {28, 45}, {28, 60}});
  } else if (name == "iso_u1") {
    c = desk_base();
    c.channel.kind = ChannelKind::kIsotropicRayleigh;
    c.channel.taps = 100;
    c.channel.carrier_hz = 2e9;
    c.channel.pathloss = {-35.3, 3.76, 4.0};
    c.channel.ue_positions = {{25.0, 0.0}};
    c.channel.n_users = 1;
  } else {
    std::string all;
    for (const auto& n : preset_names()) all += " " + n;
    fail(ErrorCode::kConfig, "unknown preset '" + name + "'; available:" + all);
  }
  c.name = name;
  return c;
}

std::uint64_t fnv1a64(const std::string& s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : s) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace mimodpd
