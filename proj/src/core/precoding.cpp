#include "mimodpd/precoding.hpp"

#include <cmath>
#include <string>

namespace mimodpd {
namespace {

std::vector<double> allocation_weights(const ChannelRealization& ch, PowerAllocation alloc) {
  const int U = ch.n_users();
  std::vector<double> w(U, 1.0);
  if (alloc == PowerAllocation::kPathlossInverse) {
    double mean = 0.0;
    for (int u = 0; u < U; ++u) {
      w[u] = db_to_lin(-ch.large_scale_db[u]);
      mean += w[u];
    }
    mean /= U;
    for (double& v : w) v = std::sqrt(v / mean);
  }
  return w;
}

void finish(Precoder& p, const OfdmConfig& cfg, double p_t, const std::vector<double>& col_w) {
  for (CMat& w : p.matrices)
    for (Eigen::Index u = 0; u < w.cols(); ++u) w.col(u) *= col_w[u];
  double total = 0.0;
  for (int i = 0; i < cfg.n_data; ++i) total += p.matrices[data_bin(cfg, i)].squaredNorm();
  require(total > 0.0, ErrorCode::kInvalidArgument, "precoder: all-zero channel");
  p.norm_factor = std::sqrt(p_t * cfg.n_data / total);
  for (auto& w : p.matrices) w *= p.norm_factor;
}

void check_shape(const ChannelRealization& ch, const OfdmConfig& cfg) {
  require(ch.n_subcarriers() == cfg.n_total(), ErrorCode::kShapeMismatch,
          "precoder: channel subcarriers differ from N");
}

}  // namespace

Precoder mrt(const ChannelRealization& ch, const OfdmConfig& cfg, double p_t,
             PowerAllocation alloc) {
  check_shape(ch, cfg);
  Precoder p;
  p.kind = PrecoderKind::kMrt;
  p.matrices.assign(cfg.n_total(), CMat::Zero(ch.n_antennas(), ch.n_users()));
  for (int k = 0; k < cfg.n_total(); ++k) p.matrices[k] = ch.fd[k].conjugate();
  finish(p, cfg, p_t, allocation_weights(ch, alloc));
  return p;
}

Precoder zf(const ChannelRealization& ch, const OfdmConfig& cfg, double p_t,
            PowerAllocation alloc) {
  check_shape(ch, cfg);
  Precoder p;
  p.kind = PrecoderKind::kZf;
  p.matrices.assign(cfg.n_total(), CMat::Zero(ch.n_antennas(), ch.n_users()));
  std::string bad;
  for (int k = 0; k < cfg.n_total(); ++k) {
    const CMat hr = ch.fd[k].transpose();  // U x B, y = hr x
    Eigen::JacobiSVD<CMat> svd(hr);
    const auto& sv = svd.singularValues();
    const bool deficient = hr.rows() > hr.cols() || sv(sv.size() - 1) <= 1e-12 * sv(0) ||
                           sv(0) == 0.0;
    if (deficient) {
      if (!bad.empty()) bad += ",";
      bad += std::to_string(k);
      continue;
    }
    const CMat gram = hr * hr.adjoint();
    p.matrices[k] = hr.adjoint() * gram.ldlt().solve(CMat::Identity(gram.rows(), gram.cols()));
  }
  require(bad.empty(), ErrorCode::kRankDeficient, "zf: rank-deficient subcarriers " + bad);
  finish(p, cfg, p_t, allocation_weights(ch, alloc));
  return p;
}

Precoder make_precoder(PrecoderKind kind, const ChannelRealization& ch, const OfdmConfig& cfg,
                       double p_t, PowerAllocation alloc) {
  return kind == PrecoderKind::kMrt ? mrt(ch, cfg, p_t, alloc) : zf(ch, cfg, p_t, alloc);
}

SignalGrid precode(const Precoder& p, const SignalGrid& s) {
  require(static_cast<Eigen::Index>(p.matrices.size()) == s.data.cols(),
          ErrorCode::kShapeMismatch, "precode: subcarrier count mismatch");
  const Eigen::Index B = p.matrices.empty() ? 0 : p.matrices[0].rows();
  require(p.matrices.empty() || p.matrices[0].cols() == s.data.rows(),
          ErrorCode::kShapeMismatch, "precode: stream count mismatch");
  SignalGrid x{CMat::Zero(B, s.data.cols())};
  for (Eigen::Index k = 0; k < s.data.cols(); ++k) x.data.col(k) = p.matrices[k] * s.data.col(k);
  return x;
}

}  // namespace mimodpd
