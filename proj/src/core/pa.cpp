#include "mimodpd/pa.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>

namespace mimodpd {

SignalBlock apply_crosstalk(const CMat& coupling, const SignalBlock& x) {
  const Eigen::Index B = x.data.rows();
  require(coupling.rows() == B && coupling.cols() == B, ErrorCode::kShapeMismatch,
          "crosstalk: matrix size differs from branch count");
  SignalBlock y = x;
  for (Eigen::Index b1 = 0; b1 < B; ++b1)
    for (Eigen::Index b2 = 0; b2 < B; ++b2) {
      if (b1 == b2 || coupling(b1, b2) == cplx(0.0)) continue;
      y.data.row(b1) += coupling(b1, b2) * x.data.row(b2);
    }
  return y;
}

SignalBlock pa_bank_forward(const PaBank& bank, const SignalBlock& x, bool with_crosstalk) {
  require(x.data.rows() == bank.branches(), ErrorCode::kShapeMismatch,
          "pa_bank_forward: branch count mismatch");
  SignalBlock in = with_crosstalk && bank.crosstalk_in.size() > 0
                       ? apply_crosstalk(bank.crosstalk_in, x)
                       : x;
  SignalBlock out{CMat(in.data.rows(), in.data.cols()), x.sample_rate_hz};
  const auto n = static_cast<std::size_t>(in.data.cols());
  for (int b = 0; b < bank.branches(); ++b)
    gmp_forward(bank.models[b], in.data.data() + b * in.data.cols(), n,
                out.data.data() + b * out.data.cols());
  if (with_crosstalk && bank.crosstalk_out.size() > 0)
    out = apply_crosstalk(bank.crosstalk_out, out);
  return out;
}

CMat crosstalk_preset(int branches, double level_db) {
  CMat g = CMat::Zero(branches, branches);
  const double amp = std::pow(10.0, level_db / 20.0);
  for (int b1 = 0; b1 < branches; ++b1)
    for (int b2 = 0; b2 < branches; ++b2) {
      if (b1 == b2) continue;
      const double d = std::abs(b1 - b2);
      g(b1, b2) = amp / (d * d) * cplx(std::cos(kPi * d), -std::sin(kPi * d));
    }
  return g;
}

double measure_gain(const SignalBlock& in, const SignalBlock& out) {
  const double pin = in.data.squaredNorm();
  require(pin > 0.0, ErrorCode::kInvalidArgument, "measure_gain: zero input power");
  return std::sqrt(out.data.squaredNorm() / pin);
}

double saturation_amplitude(double sat_dbm) { return std::sqrt(dbm_to_v2(sat_dbm)); }

PaReference make_pa_reference(std::uint64_t seed, double sat_dbm) {
  Rng rng(seed, 0x7061);
  PaReference ref;
  ref.sat_amplitude = saturation_amplitude(sat_dbm);
  const double rho = rng.uniform(0.05, 0.1);
  const double phi = rng.uniform(0.0, 2.0 * kPi);
  const cplx r = std::polar(rho, phi);
  std::vector<cplx> h{1.0, r, r * r};
  const cplx sum = h[0] + h[1] + h[2];
  for (auto& v : h) v /= sum;
  ref.memory_filter = h;
  return ref;
}

std::vector<cplx> reference_pa(const PaReference& ref, const std::vector<cplx>& u) {
  std::vector<cplx> s(u.size());
  for (std::size_t i = 0; i < u.size(); ++i) {
    const double r = std::abs(u[i]) / ref.sat_amplitude;
    s[i] = u[i] / std::sqrt(1.0 + r * r);
  }
  std::vector<cplx> y(u.size(), cplx(0.0));
  for (std::size_t i = 0; i < u.size(); ++i)
    for (std::size_t t = 0; t < ref.memory_filter.size() && t <= i; ++t)
      y[i] += ref.memory_filter[t] * s[i - t];
  return y;
}

PaFixture synth_pa_fixture(std::uint64_t seed, double sat_dbm) {
  PaFixture fx;
  fx.reference = make_pa_reference(seed, sat_dbm);
  const double A = fx.reference.sat_amplitude;
  Rng rng(seed, 0x70726f6265);
  const std::size_t n = 8192;
  std::vector<cplx> probe(n);
  for (auto& v : probe) v = std::polar(rng.uniform(0.0, 1.4 * A), rng.uniform(0.0, 2.0 * kPi));
  const auto out = reference_pa(fx.reference, probe);
  auto fit = fit_gmp_ls(probe, out, GmpStructure{7, 5, 1});
  fx.model = std::move(fit.model);
  fx.model.sat_level = 1.4 * A;
  fx.fit_nmse_db = fit.nmse_db;
  return fx;
}

void add_measurement_noise(std::vector<cplx>& x, double sigma_v, Rng& rng) {
  if (sigma_v <= 0.0) return;
  for (auto& v : x) v += rng.cnormal(sigma_v * sigma_v);
}

PaRecord read_pa_record(const std::string& path) {
  std::ifstream f(path);
  require(f.good(), ErrorCode::kIo, "pa record: cannot open " + path);
  std::string line;
  std::getline(f, line);
  require(line.rfind("index,in_re,in_im,out_re,out_im", 0) == 0, ErrorCode::kIo,
          "pa record: missing header in " + path);
  PaRecord rec;
  while (std::getline(f, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::stringstream ss(line);
    std::string tok;
    double v[5];
    for (int i = 0; i < 5; ++i) {
      require(static_cast<bool>(std::getline(ss, tok, ',')), ErrorCode::kIo,
              "pa record: short row in " + path);
      v[i] = std::stod(tok);
    }
    rec.in.emplace_back(v[1], v[2]);
    rec.out.emplace_back(v[3], v[4]);
  }
  require(!rec.in.empty(), ErrorCode::kIo, "pa record: no samples in " + path);
  return rec;
}

void write_pa_record(const std::string& path, const PaRecord& rec) {
  std::ofstream f(path);
  require(f.good(), ErrorCode::kIo, "pa record: cannot write " + path);
  f << "index,in_re,in_im,out_re,out_im\n" << std::setprecision(17);
  for (std::size_t i = 0; i < rec.in.size(); ++i)
    f << i << ',' << rec.in[i].real() << ',' << rec.in[i].imag() << ',' << rec.out[i].real()
      << ',' << rec.out[i].imag() << '\n';
}

}  // namespace mimodpd
