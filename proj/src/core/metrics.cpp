#include "mimodpd/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "mimodpd/fft.hpp"

namespace mimodpd {

namespace {

double ratio_db(double num, double den) {
  if (!(den > 0.0) || num / den > 1e20) return kSentinelDb;
  return 10.0 * std::log10(num / den);
}

double sum_bins(const std::vector<double>& v, const std::vector<int>& bins) {
  double s = 0.0;
  for (int k : bins) s += v[static_cast<std::size_t>(k)];
  return s;
}

}  // namespace

BandPlan make_band_plan(const OfdmConfig& cfg, int n_bins) {
  cfg.validate();
  require(cfg.osr >= 3, ErrorCode::kInvalidArgument,
          "band plan: adjacent bands need an oversampling ratio of at least 3");
  const int n_total = cfg.n_total();
  if (n_bins <= 0) n_bins = n_total;
  require(is_power_of_two(static_cast<std::size_t>(n_bins)), ErrorCode::kInvalidArgument,
          "band plan: bin count must be a power of two");
  BandPlan plan;
  plan.n_bins = n_bins;
  const double half = cfg.n_data / 2.0;
  for (int k = 0; k < n_bins; ++k) {
    // centre of bin k in units of subcarrier spacing
    const double f = static_cast<double>(signed_bin(k, n_bins)) * n_total / n_bins;
    if (f >= -half && f < half) plan.inband.push_back(k);
    else if (f >= half && f < 3 * half) plan.upper.push_back(k);
    else if (f >= -3 * half && f < -half) plan.lower.push_back(k);
  }
  require(!plan.inband.empty() && !plan.upper.empty() && !plan.lower.empty(),
          ErrorCode::kInvalidArgument, "band plan: too few bins to resolve the bands");
  return plan;
}

double evm_pct(const std::vector<cplx>& rx, const std::vector<cplx>& ref) {
  require(rx.size() == ref.size(), ErrorCode::kShapeMismatch, "evm: length mismatch");
  cplx cross = 0.0;
  double rr = 0.0;
  for (std::size_t i = 0; i < ref.size(); ++i) {
    cross += std::conj(ref[i]) * rx[i];
    rr += std::norm(ref[i]);
  }
  require(rr > 0.0, ErrorCode::kInvalidArgument, "evm: reference has zero power");
  const cplx c = cross / rr;
  if (std::abs(c) == 0.0) return std::numeric_limits<double>::infinity();
  double err = 0.0;
  for (std::size_t i = 0; i < ref.size(); ++i) err += std::norm(rx[i] - c * ref[i]);
  return 100.0 * std::sqrt(err / (std::norm(c) * rr));
}

double evm_pct(const CMat& rx, const CMat& ref, bool per_subcarrier) {
  require(rx.rows() == ref.rows() && rx.cols() == ref.cols(), ErrorCode::kShapeMismatch,
          "evm: shape mismatch");
  if (!per_subcarrier) {
    std::vector<cplx> a(rx.data(), rx.data() + rx.size());
    std::vector<cplx> b(ref.data(), ref.data() + ref.size());
    return evm_pct(a, b);
  }
  double err = 0.0, sig = 0.0;
  for (Eigen::Index k = 0; k < ref.cols(); ++k) {
    cplx cross = 0.0;
    double rr = 0.0;
    for (Eigen::Index s = 0; s < ref.rows(); ++s) {
      cross += std::conj(ref(s, k)) * rx(s, k);
      rr += std::norm(ref(s, k));
    }
    require(rr > 0.0, ErrorCode::kInvalidArgument, "evm: reference column has zero power");
    const cplx c = cross / rr;
    for (Eigen::Index s = 0; s < ref.rows(); ++s) err += std::norm(rx(s, k) - c * ref(s, k));
    sig += std::norm(c) * rr;
  }
  if (sig == 0.0) return std::numeric_limits<double>::infinity();
  return 100.0 * std::sqrt(err / sig);
}

std::vector<double> symbol_spectrum(const SignalBlock& block, int n) {
  require(n > 0 && block.data.cols() % n == 0 && block.data.cols() > 0,
          ErrorCode::kShapeMismatch, "spectrum: block is not a whole number of symbols");
  const Eigen::Index symbols = block.data.cols() / n;
  std::vector<double> p(static_cast<std::size_t>(n), 0.0);
  std::vector<cplx> buf(static_cast<std::size_t>(n));
  for (Eigen::Index r = 0; r < block.data.rows(); ++r) {
    for (Eigen::Index s = 0; s < symbols; ++s) {
      const cplx* src = block.data.data() + r * block.data.cols() + s * n;
      std::copy(src, src + n, buf.begin());
      fft_unitary(buf.data(), buf.size(), false);
      for (int k = 0; k < n; ++k) p[k] += std::norm(buf[k]);
    }
  }
  const double scale = 1.0 / (static_cast<double>(symbols) * n);
  for (double& v : p) v *= scale;
  return p;
}

double aclr_dbc(const std::vector<double>& psd, const BandPlan& plan) {
  require(static_cast<int>(psd.size()) == plan.n_bins, ErrorCode::kShapeMismatch,
          "aclr: spectrum length does not match the band plan");
  require(!plan.inband.empty() && !plan.upper.empty() && !plan.lower.empty(),
          ErrorCode::kInvalidArgument, "aclr: empty band");
  const double in = sum_bins(psd, plan.inband);
  const double adj = std::max(sum_bins(psd, plan.upper), sum_bins(psd, plan.lower));
  return ratio_db(in, adj);
}

std::vector<double> BeamPattern::oob() const {
  std::vector<double> o(upper.size());
  for (std::size_t i = 0; i < o.size(); ++i) o[i] = upper[i] + lower[i];
  return o;
}

std::vector<double> angle_grid(int points) {
  require(points >= 2, ErrorCode::kInvalidArgument, "angle grid needs two points");
  std::vector<double> a(static_cast<std::size_t>(points));
  for (int i = 0; i < points; ++i) a[i] = -kPi / 2 + kPi * i / (points - 1);
  return a;
}

BeamPattern far_field_pattern(const SignalBlock& x, const std::vector<double>& angles,
                              const BandPlan& plan) {
  const int n = plan.n_bins;
  require(n > 0 && x.data.cols() % n == 0 && x.data.cols() > 0, ErrorCode::kShapeMismatch,
          "pattern: block is not a whole number of symbols");
  require(!angles.empty(), ErrorCode::kInvalidArgument, "pattern: empty angle grid");
  const Eigen::Index B = x.data.rows();
  const Eigen::Index A = static_cast<Eigen::Index>(angles.size());
  const Eigen::Index symbols = x.data.cols() / n;

  CMat steer(A, B);
  for (Eigen::Index a = 0; a < A; ++a)
    for (Eigen::Index b = 0; b < B; ++b)
      steer(a, b) = std::polar(1.0, -kPi * static_cast<double>(b) * std::sin(angles[a]));

  BeamPattern p;
  p.angles_rad = angles;
  p.inband.assign(A, 0.0);
  p.upper.assign(A, 0.0);
  p.lower.assign(A, 0.0);
  CMat X(B, n);
  for (Eigen::Index s = 0; s < symbols; ++s) {
    X = x.data.middleCols(s * n, n);
    fft_rows(X, false);
    const CMat af = steer * X;  // A x n
    auto add = [&](std::vector<double>& acc, const std::vector<int>& bins) {
      for (Eigen::Index a = 0; a < A; ++a) {
        double sum = 0.0;
        for (int k : bins) sum += std::norm(af(a, k));
        acc[a] += sum;
      }
    };
    add(p.inband, plan.inband);
    add(p.upper, plan.upper);
    add(p.lower, plan.lower);
  }
  const double scale = 1.0 / (static_cast<double>(symbols) * n);
  for (Eigen::Index a = 0; a < A; ++a) {
    p.inband[a] *= scale;
    p.upper[a] *= scale;
    p.lower[a] *= scale;
  }
  return p;
}

double trp_aclr_dbc(const BeamPattern& p) {
  double in = 0.0, up = 0.0, lo = 0.0;
  for (std::size_t i = 0; i < p.inband.size(); ++i) {
    in += p.inband[i];
    up += p.upper[i];
    lo += p.lower[i];
  }
  return ratio_db(in, std::max(up, lo));
}

SideLobe side_lobe_level(const std::vector<double>& pattern) {
  require(!pattern.empty(), ErrorCode::kInvalidArgument, "sll: empty pattern");
  const int n = static_cast<int>(pattern.size());
  SideLobe out;
  out.main_index = static_cast<int>(
      std::max_element(pattern.begin(), pattern.end()) - pattern.begin());
  const double peak = pattern[out.main_index];
  out.main_lobe_db = peak > 0.0 ? v2_to_dbm(peak) : -std::numeric_limits<double>::infinity();
  if (!(peak > 0.0)) return out;

  int lo = out.main_index, hi = out.main_index;
  while (lo > 0 && pattern[lo - 1] >= 0.5 * peak) --lo;
  while (hi < n - 1 && pattern[hi + 1] >= 0.5 * peak) ++hi;

  double best = -1.0;
  for (int i = 0; i < n; ++i) {
    if (i >= lo && i <= hi) continue;
    const bool left_ok = i == 0 || pattern[i] > pattern[i - 1];
    const bool right_ok = i == n - 1 || pattern[i] >= pattern[i + 1];
    // a flat edge is not a lobe
    if (n > 1 && ((i == 0 && pattern[0] <= pattern[1]) ||
                  (i == n - 1 && pattern[n - 1] <= pattern[n - 2])))
      continue;
    if (left_ok && right_ok) best = std::max(best, pattern[i]);
  }
  // Within 1e-9 of the peak is the same lobe flattened out, not a side lobe.
  if (best > 0.0 && best < peak * (1.0 - 1e-9)) out.sll_db = 10.0 * std::log10(best / peak);
  return out;
}

double received_band_power(const SignalBlock& x, const ChannelRealization& ch,
                           const std::vector<int>& bins) {
  const int n = ch.n_subcarriers();
  require(n > 0 && x.data.cols() % n == 0 && x.data.cols() > 0, ErrorCode::kShapeMismatch,
          "received power: block is not a whole number of symbols");
  require(ch.n_antennas() == x.data.rows() && ch.n_users() == 1, ErrorCode::kShapeMismatch,
          "received power: expected a B x 1 channel matching the branches");
  const Eigen::Index symbols = x.data.cols() / n;
  CMat X(x.data.rows(), n);
  double acc = 0.0;
  for (Eigen::Index s = 0; s < symbols; ++s) {
    X = x.data.middleCols(s * n, n);
    fft_rows(X, false);
    for (int k : bins) {
      cplx y = 0.0;
      for (Eigen::Index b = 0; b < X.rows(); ++b) y += ch.fd[k](b, 0) * X(b, k);
      acc += std::norm(y);
    }
  }
  return acc / static_cast<double>(symbols);
}

double quantile(std::vector<double> v, double q) {
  require(!v.empty(), ErrorCode::kInvalidArgument, "quantile of empty sample");
  std::sort(v.begin(), v.end());
  const double pos = std::clamp(q, 0.0, 1.0) * (v.size() - 1);
  const std::size_t i = static_cast<std::size_t>(std::floor(pos));
  const std::size_t j = std::min(i + 1, v.size() - 1);
  return v[i] + (pos - i) * (v[j] - v[i]);
}

}  // namespace mimodpd
