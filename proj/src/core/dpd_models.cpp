#include "mimodpd/dpd.hpp"

#include <cmath>

#include "mimodpd/fft.hpp"

namespace mimodpd {

std::string scheme_name(DpdScheme s) {
  switch (s) {
    case DpdScheme::kNone: return "none";
    case DpdScheme::kTdGmp: return "td_gmp";
    case DpdScheme::kFdGmp: return "fd_gmp";
    case DpdScheme::kFdNn: return "fd_nn";
    case DpdScheme::kFdCnn: return "fd_cnn";
  }
  return "none";
}

DpdScheme parse_scheme(const std::string& name) {
  if (name == "none") return DpdScheme::kNone;
  if (name == "td_gmp") return DpdScheme::kTdGmp;
  if (name == "fd_gmp") return DpdScheme::kFdGmp;
  if (name == "fd_nn") return DpdScheme::kFdNn;
  if (name == "fd_cnn") return DpdScheme::kFdCnn;
  fail(ErrorCode::kConfig, "unknown dpd scheme '" + name + "'");
}

int FdCnnDpd::side() const {
  int s = static_cast<int>(std::ceil(std::sqrt(static_cast<double>(n_data))));
  while (s * s < n_data) ++s;
  while (s > 0 && (s - 1) * (s - 1) >= n_data) --s;
  return s;
}

int FdCnnDpd::conv_side() const { return (side() + stride - 1) / stride; }

DpdScheme scheme_of(const DpdModel& m) {
  switch (m.index()) {
    case 0: return DpdScheme::kTdGmp;
    case 1: return DpdScheme::kFdGmp;
    case 2: return DpdScheme::kFdNn;
    default: return DpdScheme::kFdCnn;
  }
}

bool is_frequency_domain(DpdScheme s) {
  return s == DpdScheme::kFdGmp || s == DpdScheme::kFdNn || s == DpdScheme::kFdCnn;
}

namespace {

void init_uniform(ad::ParamTensor& p, int fan_in, Rng& rng) {
  const double lim = 1.0 / std::sqrt(static_cast<double>(fan_in));
  for (double& v : p.values) v = rng.uniform(-lim, lim);
}

}  // namespace

FdGmpDpd make_fd_gmp(int users, const GmpStructure& s, double input_scale) {
  s.validate();
  require(users >= 1, ErrorCode::kInvalidArgument, "fd_gmp: users must be >= 1");
  FdGmpDpd d;
  d.structure = s;
  d.users = users;
  d.input_scale = input_scale;
  d.coeffs = ad::ParamTensor("fd_gmp.coeffs", {users, s.coeff_count(), 2}, 0);
  for (int u = 0; u < users; ++u) d.coeffs.values[static_cast<std::size_t>(u) * s.coeff_count() * 2] = 1.0;
  return d;
}

FdNnDpd make_fd_nn(int users, int memory, int width, int hidden_layers, Rng& rng) {
  require(users >= 1 && memory >= 0 && width >= 1 && hidden_layers >= 1,
          ErrorCode::kInvalidArgument, "fd_nn: invalid layer sizes");
  FdNnDpd d;
  d.users = users;
  d.memory = memory;
  d.width = width;
  d.hidden_layers = hidden_layers;
  int in = d.input_width();
  int id = 0;
  for (int l = 0; l <= hidden_layers; ++l) {
    const int out = l == hidden_layers ? 2 * users : width;
    d.weights.emplace_back("fd_nn.w" + std::to_string(l), ad::Shape{out, in}, id++);
    init_uniform(d.weights.back(), in, rng);
    d.biases.emplace_back("fd_nn.b" + std::to_string(l), ad::Shape{out}, id++);
    in = out;
  }
  return d;
}

FdCnnDpd make_fd_cnn(int users, int n_data, int kernels, int kernel_size, int stride, Rng& rng) {
  require(users >= 1 && n_data >= 1 && kernels >= 1 && kernel_size >= 1 &&
              kernel_size % 2 == 1 && stride >= 1,
          ErrorCode::kInvalidArgument, "fd_cnn: invalid layer sizes (kernel size must be odd)");
  FdCnnDpd d;
  d.users = users;
  d.n_data = n_data;
  d.kernels = kernels;
  d.kernel_size = kernel_size;
  d.stride = stride;
  const int K = kernel_size, C = 2 * users;
  d.conv1_w = ad::ParamTensor("fd_cnn.conv1_w", {kernels, C, K, K}, 0);
  init_uniform(d.conv1_w, C * K * K, rng);
  d.conv1_b = ad::ParamTensor("fd_cnn.conv1_b", {kernels}, 1);
  d.conv2_w = ad::ParamTensor("fd_cnn.conv2_w", {C, kernels, K, K}, 2);
  init_uniform(d.conv2_w, kernels * K * K, rng);
  d.conv2_b = ad::ParamTensor("fd_cnn.conv2_b", {C}, 3);
  const int fin = 2 * d.conv_side() * d.conv_side();
  for (int u = 0; u < users; ++u) {
    d.fc_w.emplace_back("fd_cnn.fc_w" + std::to_string(u), ad::Shape{2 * n_data, fin}, 4 + 2 * u);
    init_uniform(d.fc_w.back(), fin, rng);
    d.fc_b.emplace_back("fd_cnn.fc_b" + std::to_string(u), ad::Shape{2 * n_data}, 5 + 2 * u);
  }
  return d;
}

std::vector<ad::ParamTensor*> parameters(DpdModel& m) {
  std::vector<ad::ParamTensor*> out;
  std::visit(
      [&](auto& d) {
        using T = std::decay_t<decltype(d)>;
        if constexpr (std::is_same_v<T, FdGmpDpd>) {
          out.push_back(&d.coeffs);
        } else if constexpr (std::is_same_v<T, FdNnDpd>) {
          for (std::size_t l = 0; l < d.weights.size(); ++l) {
            out.push_back(&d.weights[l]);
            out.push_back(&d.biases[l]);
          }
        } else if constexpr (std::is_same_v<T, FdCnnDpd>) {
          out.insert(out.end(), {&d.conv1_w, &d.conv1_b, &d.conv2_w, &d.conv2_b});
          for (std::size_t u = 0; u < d.fc_w.size(); ++u) {
            out.push_back(&d.fc_w[u]);
            out.push_back(&d.fc_b[u]);
          }
        }
      },
      m);
  return out;
}

std::size_t parameter_count(const DpdModel& m) {
  auto& mm = const_cast<DpdModel&>(m);
  std::size_t n = 0;
  for (auto* p : parameters(mm)) n += p->values.size();
  if (const auto* td = std::get_if<TdGmpDpd>(&m))
    for (const auto& b : td->branches) n += 2 * static_cast<std::size_t>(b.structure.coeff_count());
  return n;
}

namespace {

ad::Var forward_fd_gmp(ad::Tape& t, FdGmpDpd& d, ad::Var x) {
  ad::Var td = ad::cfft(t, x, true);
  ad::GmpOpConfig cfg{d.structure, d.input_scale, 0.0};
  ad::Var y = ad::gmp(t, td, t.parameter(d.coeffs), cfg);
  return ad::cfft(t, y, false);
}

ad::Var forward_fd_nn(ad::Tape& t, FdNnDpd& d, ad::Var x, int S, int N) {
  const int U = d.users, M = d.memory, F = d.input_width();
  ad::Var td = ad::cfft(t, x, true);
  std::vector<long> idx(static_cast<std::size_t>(S) * N * F);
  for (int s = 0; s < S; ++s)
    for (int n = 0; n < N; ++n)
      for (int tap = 0; tap <= M; ++tap)
        for (int u = 0; u < U; ++u)
          for (int c = 0; c < 2; ++c) {
            const std::size_t dst =
                (static_cast<std::size_t>(s) * N + n) * F + (tap * U + u) * 2 + c;
            idx[dst] = n - tap < 0 ? -1
                                   : ((static_cast<long>(s) * U + u) * N + (n - tap)) * 2 + c;
          }
  ad::Var h = ad::gather(t, td, std::move(idx), {S * N, F});
  for (std::size_t l = 0; l < d.weights.size(); ++l) {
    h = ad::dense(t, h, t.parameter(d.weights[l]), t.parameter(d.biases[l]));
    if (l + 1 < d.weights.size()) h = ad::relu(t, h);
  }
  std::vector<long> back(static_cast<std::size_t>(S) * U * N * 2);
  for (int s = 0; s < S; ++s)
    for (int u = 0; u < U; ++u)
      for (int n = 0; n < N; ++n)
        for (int c = 0; c < 2; ++c)
          back[((static_cast<std::size_t>(s) * U + u) * N + n) * 2 + c] =
              (static_cast<long>(s) * N + n) * 2 * U + 2 * u + c;
  ad::Var y = ad::gather(t, h, std::move(back), {S * U, N, 2});
  return ad::cfft(t, y, false);
}

ad::Var forward_fd_cnn(ad::Tape& t, FdCnnDpd& d, ad::Var x, int S, const OfdmConfig& cfg) {
  const int U = d.users, N = cfg.n_total(), Nd = cfg.n_data;
  require(Nd == d.n_data, ErrorCode::kShapeMismatch, "fd_cnn: model built for another n_data");
  const int H = d.side(), Hc = d.conv_side();
  const auto bins = data_bins(cfg);
  std::vector<long> img(static_cast<std::size_t>(S) * 2 * U * H * H);
  for (int s = 0; s < S; ++s)
    for (int u = 0; u < U; ++u)
      for (int c = 0; c < 2; ++c)
        for (int p = 0; p < H * H; ++p) {
          const std::size_t dst = ((static_cast<std::size_t>(s) * 2 * U + 2 * u + c) * H * H) + p;
          img[dst] = p < Nd ? ((static_cast<long>(s) * U + u) * N + bins[p]) * 2 + c : -1;
        }
  ad::Var h = ad::gather(t, x, std::move(img), {S, 2 * U, H, H});
  h = ad::relu(t, ad::conv2d(t, h, t.parameter(d.conv1_w), t.parameter(d.conv1_b), d.stride));
  h = ad::relu(t, ad::conv2d(t, h, t.parameter(d.conv2_w), t.parameter(d.conv2_b), 1));
  const int fin = 2 * Hc * Hc;
  ad::Var out{};
  for (int u = 0; u < U; ++u) {
    std::vector<long> sel(static_cast<std::size_t>(S) * fin);
    for (int s = 0; s < S; ++s)
      for (int f = 0; f < fin; ++f)
        sel[static_cast<std::size_t>(s) * fin + f] =
            (static_cast<long>(s) * 2 * U + 2 * u) * Hc * Hc + f;
    ad::Var z = ad::gather(t, h, std::move(sel), {S, fin});
    z = ad::dense(t, z, t.parameter(d.fc_w[u]), t.parameter(d.fc_b[u]));
    std::vector<long> place(static_cast<std::size_t>(S) * U * N * 2, -1);
    for (int s = 0; s < S; ++s)
      for (int i = 0; i < Nd; ++i)
        for (int c = 0; c < 2; ++c)
          place[((static_cast<std::size_t>(s) * U + u) * N + bins[i]) * 2 + c] =
              static_cast<long>(s) * 2 * Nd + c * Nd + i;
    ad::Var g = ad::gather(t, z, std::move(place), {S * U, N, 2});
    out = u == 0 ? g : ad::add(t, out, g);
  }
  return out;
}

}  // namespace

ad::Var fd_forward(ad::Tape& t, DpdModel& m, ad::Var x, const OfdmConfig& cfg) {
  const ad::Shape& s = t.shape(x);
  require(s.size() == 3 && s[1] == cfg.n_total() && s[2] == 2, ErrorCode::kShapeMismatch,
          "fd_forward: expected grid tensor [S*U, N, 2]");
  return std::visit(
      [&](auto& d) -> ad::Var {
        using T = std::decay_t<decltype(d)>;
        if constexpr (std::is_same_v<T, TdGmpDpd>) {
          fail(ErrorCode::kInvalidArgument, "fd_forward: TD-GMP is not a frequency-domain DPD");
        } else {
          require(s[0] % d.users == 0, ErrorCode::kShapeMismatch,
                  "fd_forward: row count is not a multiple of the user count");
          if constexpr (std::is_same_v<T, FdGmpDpd>) {
            return forward_fd_gmp(t, d, x);
          } else if constexpr (std::is_same_v<T, FdNnDpd>) {
            return forward_fd_nn(t, d, x, s[0] / d.users, s[1]);
          } else {
            return forward_fd_cnn(t, d, x, s[0] / d.users, cfg);
          }
        }
      },
      m);
}

SignalGrid fd_predistort(DpdModel& m, const SignalGrid& s, const OfdmConfig& cfg) {
  ad::Tape t;
  ad::Var x = ad::complex_constant(t, s.data);
  // Parameters enter as tape parameters; no backward pass is run.
  ad::Var y = fd_forward(t, m, x, cfg);
  return SignalGrid{ad::to_cmat(t, y)};
}

SignalGrid fd_gmp_predistort(FdGmpDpd& d, const SignalGrid& s, const OfdmConfig& cfg) {
  DpdModel m = d;
  return fd_predistort(m, s, cfg);
}

SignalGrid fd_nn_predistort(FdNnDpd& d, const SignalGrid& s, const OfdmConfig& cfg) {
  DpdModel m = d;
  return fd_predistort(m, s, cfg);
}

SignalGrid fd_cnn_predistort(FdCnnDpd& d, const SignalGrid& s, const OfdmConfig& cfg) {
  DpdModel m = d;
  return fd_predistort(m, s, cfg);
}

std::vector<cplx> decimate_symbol(const cplx* x, const OfdmConfig& cfg) {
  std::vector<cplx> v(cfg.n_data);
  for (int m = 0; m < cfg.n_data; ++m) v[m] = x[static_cast<std::size_t>(m) * cfg.osr];
  return v;
}

std::vector<cplx> inband_critical(const cplx* x, const OfdmConfig& cfg) {
  const int N = cfg.n_total(), Nd = cfg.n_data;
  std::vector<cplx> X(x, x + N);
  fft_unitary(X.data(), N, false);
  std::vector<cplx> v(Nd);
  const double s = std::sqrt(static_cast<double>(N) / Nd);
  for (int i = 0; i < Nd; ++i) {
    const int f = i - Nd / 2;
    v[((f % Nd) + Nd) % Nd] = X[data_bin(cfg, i)] / s;
  }
  fft_unitary(v.data(), Nd, true);
  return v;
}

std::vector<cplx> interpolate_symbol(const std::vector<cplx>& v_in, const OfdmConfig& cfg) {
  const int N = cfg.n_total(), Nd = cfg.n_data;
  require(static_cast<int>(v_in.size()) == Nd, ErrorCode::kShapeMismatch,
          "interpolate_symbol: expected n_data samples");
  std::vector<cplx> V = v_in;
  fft_unitary(V.data(), Nd, false);
  std::vector<cplx> X(N, cplx(0.0));
  const double s = std::sqrt(static_cast<double>(N) / Nd);
  for (int i = 0; i < Nd; ++i) {
    const int f = i - Nd / 2;
    X[data_bin(cfg, i)] = V[((f % Nd) + Nd) % Nd] * s;
  }
  fft_unitary(X.data(), N, true);
  return X;
}

SignalBlock td_gmp_predistort(const TdGmpDpd& d, const SignalBlock& x, const OfdmConfig& cfg) {
  require(static_cast<Eigen::Index>(d.branches.size()) == x.data.rows(),
          ErrorCode::kShapeMismatch, "td_gmp_predistort: branch count mismatch");
  const int N = cfg.n_total();
  require(x.data.cols() % N == 0, ErrorCode::kShapeMismatch,
          "td_gmp_predistort: block is not a whole number of symbols");
  require(d.rate_factor == 1 || d.rate_factor == cfg.osr, ErrorCode::kInvalidArgument,
          "td_gmp_predistort: rate factor must be 1 or the oversampling ratio");
  SignalBlock y{CMat(x.data.rows(), x.data.cols()), x.sample_rate_hz};
  const Eigen::Index symbols = x.data.cols() / N;
  for (Eigen::Index b = 0; b < x.data.rows(); ++b)
    for (Eigen::Index s = 0; s < symbols; ++s) {
      const cplx* src = x.data.data() + b * x.data.cols() + s * N;
      cplx* dst = y.data.data() + b * y.data.cols() + s * N;
      if (d.rate_factor == cfg.osr) {
        gmp_forward(d.branches[b], src, N, dst);
      } else {
        auto v = inband_critical(src, cfg);
        auto w = gmp_forward(d.branches[b], v);
        auto up = interpolate_symbol(w, cfg);
        std::copy(up.begin(), up.end(), dst);
      }
    }
  return y;
}

}  // namespace mimodpd
