#include "mimodpd/ad_ops.hpp"

#include <cmath>

#include "mimodpd/fft.hpp"

namespace mimodpd::ad {
namespace {

using RMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using RMap = Eigen::Map<RMat>;
using CRMap = Eigen::Map<const RMat>;

void require_complex(const Shape& s, const char* op) {
  require(s.size() == 3 && s[2] == 2, ErrorCode::kShapeMismatch,
          std::string(op) + ": expected complex tensor [rows, len, 2]");
}

}  // namespace

Var complex_constant(Tape& t, const CMat& m) {
  std::vector<double> v(2 * m.size());
  auto* c = reinterpret_cast<cplx*>(v.data());
  for (Eigen::Index r = 0; r < m.rows(); ++r)
    for (Eigen::Index k = 0; k < m.cols(); ++k) c[r * m.cols() + k] = m(r, k);
  return t.constant({static_cast<int>(m.rows()), static_cast<int>(m.cols()), 2}, std::move(v));
}

CMat to_cmat(const Tape& t, Var v) {
  const Shape& s = t.shape(v);
  require_complex(s, "to_cmat");
  CMat m(s[0], s[1]);
  const cplx* c = t.cvalue(v);
  for (int r = 0; r < s[0]; ++r)
    for (int k = 0; k < s[1]; ++k) m(r, k) = c[static_cast<std::size_t>(r) * s[1] + k];
  return m;
}

Var cfft(Tape& t, Var x, bool inverse) {
  const Shape s = t.shape(x);
  require_complex(s, "cfft");
  std::vector<double> out = t.value(x);
  auto* c = reinterpret_cast<cplx*>(out.data());
  for (int r = 0; r < s[0]; ++r) fft_unitary(c + static_cast<std::size_t>(r) * s[1], s[1], inverse);
  return t.record(s, std::move(out), t.needs_grad(x), [x, s, inverse](Tape& tp, Var self) {
    std::vector<double> g = tp.grad(self);
    auto* gc = reinterpret_cast<cplx*>(g.data());
    for (int r = 0; r < s[0]; ++r)
      fft_unitary(gc + static_cast<std::size_t>(r) * s[1], s[1], !inverse);
    auto& gx = tp.grad(x);
    for (std::size_t i = 0; i < g.size(); ++i) gx[i] += g[i];
  });
}

Var precode(Tape& t, const std::vector<CMat>& w, Var x) {
  const Shape s = t.shape(x);
  require_complex(s, "precode");
  require(static_cast<int>(w.size()) == s[1], ErrorCode::kShapeMismatch,
          "precode: one matrix per subcarrier required");
  const int B = static_cast<int>(w[0].rows());
  const int U = static_cast<int>(w[0].cols());
  require(s[0] % U == 0, ErrorCode::kShapeMismatch, "precode: rows not a multiple of U");
  const int S = s[0] / U, N = s[1];
  const Shape os{S * B, N, 2};
  std::vector<double> out(numel(os), 0.0);
  auto* yc = reinterpret_cast<cplx*>(out.data());
  const cplx* xc = t.cvalue(x);
  for (int sym = 0; sym < S; ++sym)
    for (int k = 0; k < N; ++k)
      for (int b = 0; b < B; ++b) {
        cplx acc = 0.0;
        for (int u = 0; u < U; ++u) acc += w[k](b, u) * xc[(sym * U + u) * N + k];
        yc[(sym * B + b) * N + k] = acc;
      }
  return t.record(os, std::move(out), t.needs_grad(x),
                  [x, w, S, B, U, N](Tape& tp, Var self) {
                    const cplx* gy = tp.cgrad(self);
                    cplx* gx = tp.cgrad(x);
                    for (int sym = 0; sym < S; ++sym)
                      for (int k = 0; k < N; ++k)
                        for (int u = 0; u < U; ++u) {
                          cplx acc = 0.0;
                          for (int b = 0; b < B; ++b)
                            acc += std::conj(w[k](b, u)) * gy[(sym * B + b) * N + k];
                          gx[(sym * U + u) * N + k] += acc;
                        }
                  });
}

Var mix(Tape& t, const CMat& coupling, Var x) {
  const Shape s = t.shape(x);
  require_complex(s, "mix");
  const int B = static_cast<int>(coupling.rows());
  require(coupling.cols() == B && B > 0 && s[0] % B == 0, ErrorCode::kShapeMismatch,
          "mix: coupling size does not divide row count");
  const int S = s[0] / B, L = s[1];
  std::vector<double> out = t.value(x);
  auto* yc = reinterpret_cast<cplx*>(out.data());
  const cplx* xc = t.cvalue(x);
  for (int sym = 0; sym < S; ++sym)
    for (int b1 = 0; b1 < B; ++b1)
      for (int b2 = 0; b2 < B; ++b2) {
        if (b1 == b2) continue;
        const cplx g = coupling(b1, b2);
        if (g == cplx(0.0)) continue;
        for (int n = 0; n < L; ++n) yc[(sym * B + b1) * L + n] += g * xc[(sym * B + b2) * L + n];
      }
  return t.record(s, std::move(out), t.needs_grad(x),
                  [x, coupling, S, B, L](Tape& tp, Var self) {
                    const cplx* gy = tp.cgrad(self);
                    cplx* gx = tp.cgrad(x);
                    for (int sym = 0; sym < S; ++sym)
                      for (int b2 = 0; b2 < B; ++b2) {
                        cplx* dst = gx + (sym * B + b2) * L;
                        for (int n = 0; n < L; ++n) dst[n] += gy[(sym * B + b2) * L + n];
                        for (int b1 = 0; b1 < B; ++b1) {
                          if (b1 == b2) continue;
                          const cplx g = std::conj(coupling(b1, b2));
                          if (g == cplx(0.0)) continue;
                          for (int n = 0; n < L; ++n) dst[n] += g * gy[(sym * B + b1) * L + n];
                        }
                      }
                  });
}

namespace {

struct GmpLayout {
  int Q, T, G, P, base_c, base_e;
  explicit GmpLayout(const GmpStructure& s)
      : Q(s.order), T(s.taps()), G(s.cross_terms), P(s.coeff_count()),
        base_c(s.order * s.taps()), base_e(base_c + (s.order - 1) * s.taps() * s.cross_terms) {}
  int a(int q, int m) const { return q * T + m; }
  int cross(int q, int m, int g) const { return ((q - 1) * T + m) * G + (g - 1); }
};

// Clamped and scaled input plus envelope powers for one row.
struct RowPrep {
  std::vector<cplx> up;
  std::vector<double> env;  // L x Q
};

RowPrep prep_row(const cplx* x, int L, int Q, double scale, double sat) {
  RowPrep p;
  p.up.resize(L);
  p.env.resize(static_cast<std::size_t>(L) * Q);
  for (int j = 0; j < L; ++j) {
    p.up[j] = clamp_magnitude(x[j], sat) / scale;
    const double r = std::abs(p.up[j]);
    double acc = 1.0;
    for (int q = 0; q < Q; ++q) {
      p.env[static_cast<std::size_t>(j) * Q + q] = acc;
      acc *= r;
    }
  }
  return p;
}

cplx tap_poly(const GmpLayout& ly, const cplx* th, const RowPrep& p, int j, int m, int L) {
  cplx poly = 0.0;
  const double* e0 = &p.env[static_cast<std::size_t>(j) * ly.Q];
  for (int q = 0; q < ly.Q; ++q) poly += th[ly.a(q, m)] * e0[q];
  for (int g = 1; g <= ly.G; ++g) {
    if (j - g >= 0) {
      const double* el = &p.env[static_cast<std::size_t>(j - g) * ly.Q];
      for (int q = 1; q < ly.Q; ++q) poly += th[ly.base_c + ly.cross(q, m, g)] * el[q];
    }
    if (j + g < L) {
      const double* er = &p.env[static_cast<std::size_t>(j + g) * ly.Q];
      for (int q = 1; q < ly.Q; ++q) poly += th[ly.base_e + ly.cross(q, m, g)] * er[q];
    }
  }
  return poly;
}

}  // namespace

Var gmp(Tape& t, Var x, Var coeffs, const GmpOpConfig& cfg) {
  const Shape s = t.shape(x);
  require_complex(s, "gmp");
  const Shape cs = t.shape(coeffs);
  const GmpLayout ly(cfg.structure);
  require(cs.size() == 3 && cs[1] == ly.P && cs[2] == 2 && cs[0] >= 1,
          ErrorCode::kShapeMismatch, "gmp: coefficient tensor must be [count, P, 2]");
  require(cfg.input_scale > 0.0, ErrorCode::kInvalidArgument, "gmp: input scale must be > 0");
  const int R = s[0], L = s[1], count = cs[0];
  std::vector<double> out(numel(s), 0.0);
  auto* yc = reinterpret_cast<cplx*>(out.data());
  const cplx* xc = t.cvalue(x);
  const cplx* th_all = t.cvalue(coeffs);
  for (int r = 0; r < R; ++r) {
    const cplx* th = th_all + static_cast<std::size_t>(r % count) * ly.P;
    const RowPrep p = prep_row(xc + static_cast<std::size_t>(r) * L, L, ly.Q, cfg.input_scale,
                               cfg.sat_level);
    for (int n = 0; n < L; ++n) {
      cplx acc = 0.0;
      for (int m = 0; m < ly.T && n - m >= 0; ++m)
        acc += p.up[n - m] * tap_poly(ly, th, p, n - m, m, L);
      yc[static_cast<std::size_t>(r) * L + n] = cfg.input_scale * acc;
    }
  }
  const bool ng = t.needs_grad(x) || t.needs_grad(coeffs);
  return t.record(s, std::move(out), ng, [x, coeffs, cfg, R, L, count](Tape& tp, Var self) {
    const GmpLayout ly(cfg.structure);
    const bool want_x = tp.needs_grad(x);
    const bool want_c = tp.needs_grad(coeffs);
    const cplx* gy = tp.cgrad(self);
    const cplx* xc = tp.cvalue(x);
    const cplx* th_all = tp.cvalue(coeffs);
    cplx* gx = want_x ? tp.cgrad(x) : nullptr;
    cplx* gth_all = want_c ? tp.cgrad(coeffs) : nullptr;
    std::vector<cplx> gup(L);
    std::vector<double> S(L);
    std::vector<double> D(static_cast<std::size_t>(L) * ly.Q);
    for (int r = 0; r < R; ++r) {
      const cplx* th = th_all + static_cast<std::size_t>(r % count) * ly.P;
      const cplx* xr = xc + static_cast<std::size_t>(r) * L;
      const RowPrep p = prep_row(xr, L, ly.Q, cfg.input_scale, cfg.sat_level);
      const cplx* g = gy + static_cast<std::size_t>(r) * L;
      if (want_c) {
        cplx* gth = gth_all + static_cast<std::size_t>(r % count) * ly.P;
        for (int n = 0; n < L; ++n) {
          const cplx gs = cfg.input_scale * g[n];
          if (gs == cplx(0.0)) continue;
          for (int m = 0; m < ly.T && n - m >= 0; ++m) {
            const int j = n - m;
            const cplx cu = std::conj(p.up[j]) * gs;
            const double* e0 = &p.env[static_cast<std::size_t>(j) * ly.Q];
            for (int q = 0; q < ly.Q; ++q) gth[ly.a(q, m)] += cu * e0[q];
            for (int gg = 1; gg <= ly.G; ++gg) {
              if (j - gg >= 0) {
                const double* el = &p.env[static_cast<std::size_t>(j - gg) * ly.Q];
                for (int q = 1; q < ly.Q; ++q) gth[ly.base_c + ly.cross(q, m, gg)] += cu * el[q];
              }
              if (j + gg < L) {
                const double* er = &p.env[static_cast<std::size_t>(j + gg) * ly.Q];
                for (int q = 1; q < ly.Q; ++q) gth[ly.base_e + ly.cross(q, m, gg)] += cu * er[q];
              }
            }
          }
        }
      }
      if (!want_x) continue;
      // D(j, q) = d(r^q)/dr / r = q r^(q-2), the radial factor of the envelope gradient
      for (int j = 0; j < L; ++j) {
        const double rr = std::abs(p.up[j]);
        for (int q = 0; q < ly.Q; ++q) {
          double d = 0.0;
          if (q == 1) d = rr > 0.0 ? 1.0 / rr : 0.0;
          else if (q >= 2) d = q * std::pow(rr, q - 2);
          D[static_cast<std::size_t>(j) * ly.Q + q] = d;
        }
      }
      std::fill(gup.begin(), gup.end(), cplx(0.0));
      std::fill(S.begin(), S.end(), 0.0);
      for (int n = 0; n < L; ++n) {
        const cplx gs = cfg.input_scale * g[n];
        if (gs == cplx(0.0)) continue;
        for (int m = 0; m < ly.T && n - m >= 0; ++m) {
          const int j = n - m;
          gup[j] += std::conj(tap_poly(ly, th, p, j, m, L)) * gs;
          const cplx z = std::conj(gs) * p.up[j];
          const double* d0 = &D[static_cast<std::size_t>(j) * ly.Q];
          for (int q = 1; q < ly.Q; ++q) S[j] += (z * th[ly.a(q, m)]).real() * d0[q];
          for (int gg = 1; gg <= ly.G; ++gg) {
            if (j - gg >= 0) {
              const double* dl = &D[static_cast<std::size_t>(j - gg) * ly.Q];
              double acc = 0.0;
              for (int q = 1; q < ly.Q; ++q)
                acc += (z * th[ly.base_c + ly.cross(q, m, gg)]).real() * dl[q];
              S[j - gg] += acc;
            }
            if (j + gg < L) {
              const double* dr = &D[static_cast<std::size_t>(j + gg) * ly.Q];
              double acc = 0.0;
              for (int q = 1; q < ly.Q; ++q)
                acc += (z * th[ly.base_e + ly.cross(q, m, gg)]).real() * dr[q];
              S[j + gg] += acc;
            }
          }
        }
      }
      cplx* gxr = gx + static_cast<std::size_t>(r) * L;
      for (int j = 0; j < L; ++j) {
        // through the 1/scale input normalization
        cplx gj = (gup[j] + S[j] * p.up[j]) / cfg.input_scale;
        const double mag = std::abs(xr[j]);
        if (cfg.sat_level > 0.0 && mag > cfg.sat_level) {
          const cplx uhat = xr[j] / mag;
          gj = (cfg.sat_level / mag) * (gj - (std::conj(uhat) * gj).real() * uhat);
        }
        gxr[j] += gj;
      }
    }
  });
}

Var mse(Tape& t, Var x, Var target) {
  const Shape s = t.shape(x);
  require(t.shape(target) == s, ErrorCode::kShapeMismatch, "mse: shape mismatch");
  require(!s.empty() && s.back() == 2, ErrorCode::kShapeMismatch, "mse: expected complex tensor");
  const auto& xv = t.value(x);
  const auto& tv = t.value(target);
  const double count = static_cast<double>(xv.size() / 2);
  double acc = 0.0;
  for (std::size_t i = 0; i < xv.size(); ++i) {
    const double d = xv[i] - tv[i];
    acc += d * d;
  }
  const bool ng = t.needs_grad(x) || t.needs_grad(target);
  return t.record({1}, {acc / count}, ng, [x, target, count](Tape& tp, Var self) {
    const double gl = tp.grad(self)[0];
    const auto& xv = tp.value(x);
    const auto& tv = tp.value(target);
    if (tp.needs_grad(x)) {
      auto& gx = tp.grad(x);
      for (std::size_t i = 0; i < xv.size(); ++i) gx[i] += 2.0 * (xv[i] - tv[i]) / count * gl;
    }
    if (tp.needs_grad(target)) {
      auto& gt = tp.grad(target);
      for (std::size_t i = 0; i < xv.size(); ++i) gt[i] -= 2.0 * (xv[i] - tv[i]) / count * gl;
    }
  });
}

Var dense(Tape& t, Var x, Var w, Var b) {
  const Shape xs = t.shape(x), ws = t.shape(w), bs = t.shape(b);
  require(xs.size() == 2 && ws.size() == 2 && bs.size() == 1 && ws[1] == xs[1] && bs[0] == ws[0],
          ErrorCode::kShapeMismatch, "dense: expected x[n,in], w[out,in], b[out]");
  const int n = xs[0], in = xs[1], out = ws[0];
  std::vector<double> y(static_cast<std::size_t>(n) * out);
  {
    CRMap X(t.value(x).data(), n, in);
    CRMap W(t.value(w).data(), out, in);
    RMap Y(y.data(), n, out);
    Y.noalias() = X * W.transpose();
    const auto& bv = t.value(b);
    for (int i = 0; i < n; ++i)
      for (int o = 0; o < out; ++o) Y(i, o) += bv[o];
  }
  const bool ng = t.needs_grad(x) || t.needs_grad(w) || t.needs_grad(b);
  return t.record({n, out}, std::move(y), ng, [x, w, b, n, in, out](Tape& tp, Var self) {
    CRMap GY(tp.grad(self).data(), n, out);
    if (tp.needs_grad(x)) {
      RMap GX(tp.grad(x).data(), n, in);
      GX.noalias() += GY * CRMap(tp.value(w).data(), out, in);
    }
    if (tp.needs_grad(w)) {
      RMap GW(tp.grad(w).data(), out, in);
      GW.noalias() += GY.transpose() * CRMap(tp.value(x).data(), n, in);
    }
    if (tp.needs_grad(b)) {
      auto& gb = tp.grad(b);
      for (int i = 0; i < n; ++i)
        for (int o = 0; o < out; ++o) gb[o] += GY(i, o);
    }
  });
}

Var relu(Tape& t, Var x) {
  std::vector<double> y = t.value(x);
  for (double& v : y) v = v > 0.0 ? v : 0.0;
  return t.record(t.shape(x), std::move(y), t.needs_grad(x), [x](Tape& tp, Var self) {
    const auto& xv = tp.value(x);
    const auto& gy = tp.grad(self);
    auto& gx = tp.grad(x);
    for (std::size_t i = 0; i < xv.size(); ++i)
      if (xv[i] > 0.0) gx[i] += gy[i];
  });
}

Var conv2d(Tape& t, Var x, Var k, Var b, int stride) {
  const Shape xs = t.shape(x), ks = t.shape(k), bs = t.shape(b);
  require(xs.size() == 4 && ks.size() == 4 && bs.size() == 1 && ks[1] == xs[1] &&
              ks[2] == ks[3] && bs[0] == ks[0] && stride >= 1 && ks[2] % 2 == 1,
          ErrorCode::kShapeMismatch, "conv2d: expected x[S,C,H,W], k[O,C,K,K] odd K, b[O]");
  const int S = xs[0], C = xs[1], H = xs[2], W = xs[3], O = ks[0], K = ks[2];
  const int pad = K / 2;
  const int Ho = (H + stride - 1) / stride, Wo = (W + stride - 1) / stride;
  const Shape os{S, O, Ho, Wo};
  std::vector<double> y(numel(os));
  const auto& xv = t.value(x);
  const auto& kv = t.value(k);
  const auto& bv = t.value(b);
  auto X = [&](int s, int c, int i, int j) {
    return xv[((static_cast<std::size_t>(s) * C + c) * H + i) * W + j];
  };
  for (int s = 0; s < S; ++s)
    for (int o = 0; o < O; ++o)
      for (int i = 0; i < Ho; ++i)
        for (int j = 0; j < Wo; ++j) {
          double acc = bv[o];
          for (int c = 0; c < C; ++c)
            for (int di = 0; di < K; ++di) {
              const int ii = i * stride + di - pad;
              if (ii < 0 || ii >= H) continue;
              for (int dj = 0; dj < K; ++dj) {
                const int jj = j * stride + dj - pad;
                if (jj < 0 || jj >= W) continue;
                acc += kv[((static_cast<std::size_t>(o) * C + c) * K + di) * K + dj] *
                       X(s, c, ii, jj);
              }
            }
          y[((static_cast<std::size_t>(s) * O + o) * Ho + i) * Wo + j] = acc;
        }
  const bool ng = t.needs_grad(x) || t.needs_grad(k) || t.needs_grad(b);
  return t.record(os, std::move(y), ng,
                  [=](Tape& tp, Var self) {
                    const auto& gy = tp.grad(self);
                    const auto& xv = tp.value(x);
                    const auto& kv = tp.value(k);
                    const bool wx = tp.needs_grad(x), wk = tp.needs_grad(k),
                               wb = tp.needs_grad(b);
                    double* gx = wx ? tp.grad(x).data() : nullptr;
                    double* gk = wk ? tp.grad(k).data() : nullptr;
                    double* gb = wb ? tp.grad(b).data() : nullptr;
                    for (int s = 0; s < S; ++s)
                      for (int o = 0; o < O; ++o)
                        for (int i = 0; i < Ho; ++i)
                          for (int j = 0; j < Wo; ++j) {
                            const double g =
                                gy[((static_cast<std::size_t>(s) * O + o) * Ho + i) * Wo + j];
                            if (g == 0.0) continue;
                            if (wb) gb[o] += g;
                            for (int c = 0; c < C; ++c)
                              for (int di = 0; di < K; ++di) {
                                const int ii = i * stride + di - pad;
                                if (ii < 0 || ii >= H) continue;
                                for (int dj = 0; dj < K; ++dj) {
                                  const int jj = j * stride + dj - pad;
                                  if (jj < 0 || jj >= W) continue;
                                  const std::size_t xi =
                                      ((static_cast<std::size_t>(s) * C + c) * H + ii) * W + jj;
                                  const std::size_t ki =
                                      ((static_cast<std::size_t>(o) * C + c) * K + di) * K + dj;
                                  if (wx) gx[xi] += kv[ki] * g;
                                  if (wk) gk[ki] += xv[xi] * g;
                                }
                              }
                          }
                  });
}

Var gather(Tape& t, Var x, std::vector<long> idx, Shape out_shape) {
  require(numel(out_shape) == idx.size(), ErrorCode::kShapeMismatch,
          "gather: index count does not match output shape");
  const auto& xv = t.value(x);
  std::vector<double> y(idx.size(), 0.0);
  for (std::size_t i = 0; i < idx.size(); ++i) {
    if (idx[i] < 0) continue;
    require(static_cast<std::size_t>(idx[i]) < xv.size(), ErrorCode::kInvalidArgument,
            "gather: index out of range");
    y[i] = xv[idx[i]];
  }
  return t.record(std::move(out_shape), std::move(y), t.needs_grad(x),
                  [x, idx = std::move(idx)](Tape& tp, Var self) {
                    const auto& gy = tp.grad(self);
                    auto& gx = tp.grad(x);
                    for (std::size_t i = 0; i < idx.size(); ++i)
                      if (idx[i] >= 0) gx[idx[i]] += gy[i];
                  });
}

Var scale(Tape& t, Var x, double c) {
  std::vector<double> y = t.value(x);
  for (double& v : y) v *= c;
  return t.record(t.shape(x), std::move(y), t.needs_grad(x), [x, c](Tape& tp, Var self) {
    const auto& gy = tp.grad(self);
    auto& gx = tp.grad(x);
    for (std::size_t i = 0; i < gy.size(); ++i) gx[i] += c * gy[i];
  });
}

Var add(Tape& t, Var a, Var b) {
  require(t.shape(a) == t.shape(b), ErrorCode::kShapeMismatch, "add: shape mismatch");
  std::vector<double> y = t.value(a);
  const auto& bv = t.value(b);
  for (std::size_t i = 0; i < y.size(); ++i) y[i] += bv[i];
  const bool ng = t.needs_grad(a) || t.needs_grad(b);
  return t.record(t.shape(a), std::move(y), ng, [a, b](Tape& tp, Var self) {
    const auto gy = tp.grad(self);
    if (tp.needs_grad(a)) {
      auto& ga = tp.grad(a);
      for (std::size_t i = 0; i < gy.size(); ++i) ga[i] += gy[i];
    }
    if (tp.needs_grad(b)) {
      auto& gb = tp.grad(b);
      for (std::size_t i = 0; i < gy.size(); ++i) gb[i] += gy[i];
    }
  });
}

}  // namespace mimodpd::ad
