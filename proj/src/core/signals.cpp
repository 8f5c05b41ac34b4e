#include "mimodpd/signals.hpp"

#include <cmath>

#include "mimodpd/fft.hpp"

namespace mimodpd {

void OfdmConfig::validate() const {
  require(n_data > 0 && osr > 0, ErrorCode::kInvalidArgument,
          "ofdm: n_data and osr must be positive");
  require(is_power_of_two(static_cast<std::size_t>(n_total())), ErrorCode::kInvalidArgument,
          "ofdm: N = osr * n_data must be a power of two");
  require(n_data % 2 == 0, ErrorCode::kInvalidArgument, "ofdm: n_data must be even");
  require(qam_order == 4 || qam_order == 16 || qam_order == 64 || qam_order == 256,
          ErrorCode::kInvalidArgument, "ofdm: qam_order must be 4, 16, 64 or 256");
  require(subcarrier_spacing_hz > 0.0, ErrorCode::kInvalidArgument,
          "ofdm: subcarrier spacing must be positive");
}

namespace {

int bits_per_symbol(int order) {
  switch (order) {
    case 4: return 2;
    case 16: return 4;
    case 64: return 6;
    case 256: return 8;
    default:
      fail(ErrorCode::kInvalidArgument, "qam: order must be 4, 16, 64 or 256");
  }
}

// Gray label on one axis -> amplitude level, label 0 at the positive edge.
double axis_level(unsigned gray, int levels) {
  unsigned bin = gray;
  for (unsigned s = gray >> 1; s != 0; s >>= 1) bin ^= s;
  return static_cast<double>(levels - 1) - 2.0 * static_cast<double>(bin);
}

cplx symbol_from_label(unsigned label, int order) {
  const int k = bits_per_symbol(order) / 2;
  const int levels = 1 << k;
  const unsigned mask = (1u << k) - 1u;
  const double norm = std::sqrt(2.0 * (order - 1) / 3.0);
  return {axis_level((label >> k) & mask, levels) / norm, axis_level(label & mask, levels) / norm};
}

}  // namespace

std::vector<cplx> map_qam(const std::vector<std::uint8_t>& bits, int order) {
  const int bps = bits_per_symbol(order);
  require(bits.size() % static_cast<std::size_t>(bps) == 0, ErrorCode::kInvalidArgument,
          "qam: bit count not divisible by log2(order)");
  std::vector<cplx> out(bits.size() / bps);
  for (std::size_t s = 0; s < out.size(); ++s) {
    unsigned label = 0;
    for (int b = 0; b < bps; ++b) label = (label << 1) | (bits[s * bps + b] & 1u);
    out[s] = symbol_from_label(label, order);
  }
  return out;
}

std::vector<cplx> qam_constellation(int order) {
  bits_per_symbol(order);
  std::vector<cplx> pts(order);
  for (int i = 0; i < order; ++i) pts[i] = symbol_from_label(static_cast<unsigned>(i), order);
  return pts;
}

CMat random_qam(Rng& rng, int streams, int n_data, int order) {
  bits_per_symbol(order);
  CMat out(streams, n_data);
  for (int r = 0; r < streams; ++r)
    for (int c = 0; c < n_data; ++c)
      out(r, c) = symbol_from_label(static_cast<unsigned>(rng.uniform_int(order)), order);
  return out;
}

int data_bin(const OfdmConfig& cfg, int i) {
  const int n = cfg.n_total();
  return ((i - cfg.n_data / 2) % n + n) % n;
}

std::vector<int> data_bins(const OfdmConfig& cfg) {
  std::vector<int> bins(cfg.n_data);
  for (int i = 0; i < cfg.n_data; ++i) bins[i] = data_bin(cfg, i);
  return bins;
}

SignalGrid build_grid(const CMat& symbols, const OfdmConfig& cfg) {
  require(symbols.cols() == cfg.n_data, ErrorCode::kShapeMismatch,
          "build_grid: symbol matrix must have n_data columns");
  SignalGrid g;
  g.data = CMat::Zero(symbols.rows(), cfg.n_total());
  for (int i = 0; i < cfg.n_data; ++i) g.data.col(data_bin(cfg, i)) = symbols.col(i);
  return g;
}

CMat extract_data(const SignalGrid& grid, const OfdmConfig& cfg) {
  require(grid.data.cols() == cfg.n_total(), ErrorCode::kShapeMismatch,
          "extract_data: grid width must be N");
  CMat out(grid.data.rows(), cfg.n_data);
  for (int i = 0; i < cfg.n_data; ++i) out.col(i) = grid.data.col(data_bin(cfg, i));
  return out;
}

SignalBlock ofdm_modulate(const SignalGrid& grid, double sample_rate_hz) {
  SignalBlock b{grid.data, sample_rate_hz};
  fft_rows(b.data, true);
  return b;
}

SignalGrid ofdm_demodulate(const SignalBlock& block) {
  SignalGrid g{block.data};
  fft_rows(g.data, false);
  return g;
}

std::vector<double> estimate_psd(const cplx* x, std::size_t n, int seg_len, double overlap) {
  require(seg_len > 0 && is_power_of_two(static_cast<std::size_t>(seg_len)),
          ErrorCode::kInvalidArgument, "psd: segment length must be a power of two");
  require(static_cast<std::size_t>(seg_len) <= n, ErrorCode::kInvalidArgument,
          "psd: segment longer than signal");
  require(overlap >= 0.0 && overlap < 1.0, ErrorCode::kInvalidArgument,
          "psd: overlap must be in [0, 1)");
  const std::size_t L = static_cast<std::size_t>(seg_len);
  std::size_t hop = static_cast<std::size_t>(std::llround(L * (1.0 - overlap)));
  if (hop == 0) hop = 1;

  std::vector<double> w(L);
  double w2 = 0.0;
  for (std::size_t i = 0; i < L; ++i) {
    // periodic Hann
    w[i] = 0.5 - 0.5 * std::cos(2.0 * kPi * static_cast<double>(i) / static_cast<double>(L));
    w2 += w[i] * w[i];
  }

  std::vector<double> psd(L, 0.0);
  std::vector<cplx> buf(L);
  std::size_t segments = 0;
  for (std::size_t start = 0; start + L <= n; start += hop) {
    for (std::size_t i = 0; i < L; ++i) buf[i] = x[start + i] * w[i];
    fft_unitary(buf.data(), L, false);
    // unitary DFT: sum_k |X|^2 = sum_t |w x|^2, so dividing by sum w^2 gives power
    for (std::size_t k = 0; k < L; ++k) psd[k] += std::norm(buf[k]) / w2;
    ++segments;
  }
  for (double& p : psd) p /= static_cast<double>(segments);
  return psd;
}

std::vector<double> estimate_psd(const SignalBlock& block, int seg_len, double overlap) {
  std::vector<double> total;
  for (Eigen::Index r = 0; r < block.data.rows(); ++r) {
    auto p = estimate_psd(block.data.data() + r * block.data.cols(),
                          static_cast<std::size_t>(block.data.cols()), seg_len, overlap);
    if (total.empty()) total.assign(p.size(), 0.0);
    for (std::size_t k = 0; k < p.size(); ++k) total[k] += p[k];
  }
  return total;
}

int signed_bin(int k, int n) { return k < n / 2 ? k : k - n; }

}  // namespace mimodpd
