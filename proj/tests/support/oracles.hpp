// Reference implementations used only by tests. Deliberately naive.
#pragma once

#include <cmath>
#include <complex>
#include <functional>
#include <vector>

#include "mimodpd/autodiff.hpp"
#include "mimodpd/gmp.hpp"

namespace oracle {

using cplx = std::complex<double>;

// O(N^2) unitary DFT with exponent sign -1 forward.
inline std::vector<cplx> direct_dft(const std::vector<cplx>& x, bool inverse) {
  const std::size_t n = x.size();
  std::vector<cplx> out(n);
  const double sign = inverse ? 1.0 : -1.0;
  for (std::size_t k = 0; k < n; ++k) {
    cplx acc = 0.0;
    for (std::size_t t = 0; t < n; ++t) {
      const double ph = sign * 2.0 * M_PI * static_cast<double>((k * t) % n) / n;
      acc += x[t] * std::polar(1.0, ph);
    }
    out[k] = acc / std::sqrt(static_cast<double>(n));
  }
  return out;
}

// y[n] = sum_k sum_m a_km u[n-m]|u[n-m]|^k
//      + sum_{k>=1} sum_m sum_g c_kmg u[n-m]|u[n-m-g]|^k + e_kmg u[n-m]|u[n-m+g]|^k
// samples outside [0, N) are zero.
inline std::vector<cplx> gmp_triple_loop(const mimodpd::GmpModel& m, std::vector<cplx> u) {
  const auto& s = m.structure;
  const long N = static_cast<long>(u.size());
  if (m.sat_level > 0)
    for (auto& v : u)
      if (std::abs(v) > m.sat_level) v *= m.sat_level / std::abs(v);
  auto at = [&](long i) { return (i < 0 || i >= N) ? cplx(0.0) : u[i]; };
  std::vector<cplx> y(u.size(), 0.0);
  for (long n = 0; n < N; ++n) {
    for (int k = 0; k < s.order; ++k)
      for (int mm = 0; mm <= s.memory; ++mm)
        y[n] += m.a(k, mm) * at(n - mm) * std::pow(std::abs(at(n - mm)), k);
    for (int k = 1; k < s.order; ++k)
      for (int mm = 0; mm <= s.memory; ++mm)
        for (int g = 1; g <= s.cross_terms; ++g) {
          y[n] += m.c_at(k, mm, g) * at(n - mm) * std::pow(std::abs(at(n - mm - g)), k);
          y[n] += m.e_at(k, mm, g) * at(n - mm) * std::pow(std::abs(at(n - mm + g)), k);
        }
  }
  return y;
}

// Worst relative error between the tape gradient and central finite
// differences, over all parameter entries: max|g_ad - g_fd| / max|g_fd|.
inline double gradient_mismatch(
    const std::function<mimodpd::ad::Var(mimodpd::ad::Tape&)>& build,
    const std::vector<mimodpd::ad::ParamTensor*>& params, double h = 1e-6) {
  using mimodpd::ad::Tape;
  for (auto* p : params) p->zero_grad();
  {
    Tape t;
    auto loss = build(t);
    t.backward(loss);
  }
  double worst = 0.0, scale = 0.0;
  for (auto* p : params) {
    const std::vector<double> g = p->grad;
    for (std::size_t i = 0; i < p->values.size(); ++i) {
      const double keep = p->values[i];
      p->values[i] = keep + h;
      Tape tp;
      const double lp = tp.value(build(tp))[0];
      p->values[i] = keep - h;
      Tape tm;
      const double lm = tm.value(build(tm))[0];
      p->values[i] = keep;
      const double fd = (lp - lm) / (2 * h);
      worst = std::max(worst, std::abs(fd - g[i]));
      scale = std::max(scale, std::abs(fd));
    }
  }
  return scale > 0 ? worst / scale : worst;
}

}  // namespace oracle
