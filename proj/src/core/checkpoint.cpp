#include "mimodpd/checkpoint.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

namespace mimodpd {

using nlohmann::json;

namespace {

constexpr int kFormatVersion = 1;

json cplx_array(const cplx* p, std::size_t n) {
  json re = json::array(), im = json::array();
  for (std::size_t i = 0; i < n; ++i) {
    re.push_back(p[i].real());
    im.push_back(p[i].imag());
  }
  return json{{"re", re}, {"im", im}};
}

std::vector<cplx> read_cplx(const json& j, std::size_t expect, const std::string& what) {
  const auto& re = j.at("re");
  const auto& im = j.at("im");
  require(re.size() == expect && im.size() == expect, ErrorCode::kConfig,
          "checkpoint: " + what + " has the wrong length");
  std::vector<cplx> out(expect);
  for (std::size_t i = 0; i < expect; ++i) out[i] = {re[i].get<double>(), im[i].get<double>()};
  return out;
}

json gmp_json(const GmpModel& m) {
  const auto& s = m.structure;
  return json{{"order", s.order},
              {"memory", s.memory},
              {"cross_terms", s.cross_terms},
              {"sat_level", m.sat_level},
              {"a", cplx_array(m.a.data(), static_cast<std::size_t>(m.a.size()))},
              {"c", cplx_array(m.c.data(), m.c.size())},
              {"e", cplx_array(m.e.data(), m.e.size())}};
}

GmpModel gmp_from(const json& j) {
  GmpStructure s{j.at("order").get<int>(), j.at("memory").get<int>(),
                 j.at("cross_terms").get<int>()};
  s.validate();
  GmpModel m = GmpModel::zeros(s);
  m.sat_level = j.at("sat_level").get<double>();
  const auto a = read_cplx(j.at("a"), static_cast<std::size_t>(m.a.size()), "a");
  std::copy(a.begin(), a.end(), m.a.data());
  m.c = read_cplx(j.at("c"), m.c.size(), "c");
  m.e = read_cplx(j.at("e"), m.e.size(), "e");
  return m;
}

json tensors_json(DpdModel& m) {
  json arr = json::array();
  for (ad::ParamTensor* p : parameters(m))
    arr.push_back(json{{"name", p->name}, {"shape", p->shape}, {"values", p->values}});
  return arr;
}

void load_tensors(DpdModel& m, const json& arr) {
  auto params = parameters(m);
  require(arr.size() == params.size(), ErrorCode::kConfig,
          "checkpoint: parameter tensor count does not match the structure");
  for (std::size_t i = 0; i < params.size(); ++i) {
    const json& t = arr[i];
    require(t.at("name").get<std::string>() == params[i]->name &&
                t.at("shape").get<ad::Shape>() == params[i]->shape,
            ErrorCode::kConfig, "checkpoint: tensor " + params[i]->name + " does not match");
    auto v = t.at("values").get<std::vector<double>>();
    require(v.size() == params[i]->values.size(), ErrorCode::kConfig,
            "checkpoint: tensor " + params[i]->name + " has the wrong length");
    params[i]->values = std::move(v);
  }
}

}  // namespace

std::string serialize_dpd(const DpdModel& model) {
  DpdModel m = model;  // parameters() needs a mutable view
  json j{{"format", "mimodpd-checkpoint"}, {"version", kFormatVersion},
         {"scheme", scheme_name(scheme_of(m))}};
  std::visit(
      [&](auto& d) {
        using T = std::decay_t<decltype(d)>;
        if constexpr (std::is_same_v<T, TdGmpDpd>) {
          j["rate_factor"] = d.rate_factor;
          json b = json::array();
          for (const auto& g : d.branches) b.push_back(gmp_json(g));
          j["branches"] = b;
        } else if constexpr (std::is_same_v<T, FdGmpDpd>) {
          j["users"] = d.users;
          j["order"] = d.structure.order;
          j["memory"] = d.structure.memory;
          j["cross_terms"] = d.structure.cross_terms;
          j["input_scale"] = d.input_scale;
        } else if constexpr (std::is_same_v<T, FdNnDpd>) {
          j["users"] = d.users;
          j["memory"] = d.memory;
          j["width"] = d.width;
          j["hidden_layers"] = d.hidden_layers;
        } else {
          j["users"] = d.users;
          j["n_data"] = d.n_data;
          j["kernels"] = d.kernels;
          j["kernel_size"] = d.kernel_size;
          j["stride"] = d.stride;
        }
      },
      m);
  j["tensors"] = tensors_json(m);
  return j.dump(1);
}

DpdModel deserialize_dpd(const std::string& text) {
  try {
    const json j = json::parse(text);
    require(j.at("format").get<std::string>() == "mimodpd-checkpoint", ErrorCode::kConfig,
            "checkpoint: not a model checkpoint");
    require(j.at("version").get<int>() == kFormatVersion, ErrorCode::kConfig,
            "checkpoint: unsupported version");
    const DpdScheme scheme = parse_scheme(j.at("scheme").get<std::string>());
    DpdModel m;
    Rng dummy(0);
    switch (scheme) {
      case DpdScheme::kTdGmp: {
        TdGmpDpd d;
        d.rate_factor = j.at("rate_factor").get<int>();
        for (const auto& b : j.at("branches")) d.branches.push_back(gmp_from(b));
        m = std::move(d);
        break;
      }
      case DpdScheme::kFdGmp:
        m = make_fd_gmp(j.at("users").get<int>(),
                        GmpStructure{j.at("order").get<int>(), j.at("memory").get<int>(),
                                     j.at("cross_terms").get<int>()},
                        j.at("input_scale").get<double>());
        break;
      case DpdScheme::kFdNn:
        m = make_fd_nn(j.at("users").get<int>(), j.at("memory").get<int>(),
                       j.at("width").get<int>(), j.at("hidden_layers").get<int>(), dummy);
        break;
      case DpdScheme::kFdCnn:
        m = make_fd_cnn(j.at("users").get<int>(), j.at("n_data").get<int>(),
                        j.at("kernels").get<int>(), j.at("kernel_size").get<int>(),
                        j.at("stride").get<int>(), dummy);
        break;
      case DpdScheme::kNone:
        fail(ErrorCode::kConfig, "checkpoint: scheme 'none' has no model");
    }
    load_tensors(m, j.at("tensors"));
    return m;
  } catch (const json::exception& e) {
    fail(ErrorCode::kConfig, std::string("checkpoint: ") + e.what());
  }
}

std::string serialize_gmp(const GmpModel& m) { return gmp_json(m).dump(1); }

GmpModel deserialize_gmp(const std::string& text) {
  try {
    return gmp_from(json::parse(text));
  } catch (const json::exception& e) {
    fail(ErrorCode::kConfig, std::string("gmp model: ") + e.what());
  }
}

void save_checkpoint(const std::string& path, const DpdModel& m) {
  std::ofstream f(path, std::ios::binary);
  require(static_cast<bool>(f), ErrorCode::kIo, "cannot write " + path);
  f << serialize_dpd(m) << '\n';
  require(static_cast<bool>(f), ErrorCode::kIo, "write failed: " + path);
}

DpdModel load_checkpoint(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  require(static_cast<bool>(f), ErrorCode::kIo, "cannot read " + path);
  std::stringstream ss;
  ss << f.rdbuf();
  return deserialize_dpd(ss.str());
}

}  // namespace mimodpd
