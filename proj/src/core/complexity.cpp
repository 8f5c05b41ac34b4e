#include "mimodpd/complexity.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>

#include "mimodpd/common.hpp"

namespace mimodpd {

namespace {

using i64 = std::int64_t;

i64 ceil_sqrt(i64 n) {
  i64 r = static_cast<i64>(std::sqrt(static_cast<double>(n)));
  while (r * r < n) ++r;
  while (r > 0 && (r - 1) * (r - 1) >= n) --r;
  return r;
}

i64 log2_exact(i64 n) {
  i64 k = 0;
  while ((i64{1} << k) < n) ++k;
  return k;
}

// 4 N log2 N - 6 N + 8: one complex (I)DFT of size N
i64 fft_flops(i64 n) { return 4 * n * log2_exact(n) - 6 * n + 8; }

}  // namespace

Rational Rational::make(i64 n, i64 d) {
  require(d != 0, ErrorCode::kInvalidArgument, "rational: zero denominator");
  if (d < 0) {
    n = -n;
    d = -d;
  }
  const i64 g = std::gcd(n < 0 ? -n : n, d);
  return g > 1 ? Rational{n / g, d / g} : Rational{n, d};
}

i64 Rational::rounded() const {
  const i64 q = num / den, r = num % den;
  if (2 * (r < 0 ? -r : r) >= den) return num < 0 ? q - 1 : q + 1;
  return q;
}

Rational operator+(Rational a, Rational b) {
  const i64 g = std::gcd(a.den, b.den);
  return Rational::make(a.num * (b.den / g) + b.num * (a.den / g), a.den / g * b.den);
}
Rational operator*(Rational a, Rational b) {
  Rational x = Rational::make(a.num, b.den), y = Rational::make(b.num, a.den);
  return Rational::make(x.num * y.num, x.den * y.den);
}
Rational operator/(Rational a, Rational b) {
  require(b.num != 0, ErrorCode::kInvalidArgument, "rational: division by zero");
  return a * Rational::make(b.den, b.num);
}
bool operator<(const Rational& a, const Rational& b) {
  return static_cast<__int128>(a.num) * b.den < static_cast<__int128>(b.num) * a.den;
}

std::string format_sig3(double v) {
  if (v == 0.0) return "0";
  const int mag = static_cast<int>(std::floor(std::log10(std::fabs(v))));
  const double step = std::pow(10.0, mag - 2);
  const double r = std::round(v / step) * step;
  char buf[64];
  if (mag >= 2) std::snprintf(buf, sizeof buf, "%.0f", r);
  else std::snprintf(buf, sizeof buf, "%.*f", 2 - mag, r);
  return buf;
}

std::string format_rational(const Rational& r) {
  return r.den == 1 ? std::to_string(r.num)
                    : std::to_string(r.num) + "/" + std::to_string(r.den);
}

void ComplexityParams::validate() const {
  require(K >= 1 && M_TD >= 0 && M_FD >= 0 && G >= 0 && B >= 0 && U >= 1 && V >= 0 &&
              D >= 1 && K_NN >= 1 && N_conv1 >= 1 && K_C >= 1 && K_S >= 1,
          ErrorCode::kInvalidArgument, "complexity: parameter out of range");
  require(N_d >= 1 && N >= N_d && N % N_d == 0, ErrorCode::kInvalidArgument,
          "complexity: N must be a multiple of N_d");
  require((N & (N - 1)) == 0, ErrorCode::kInvalidArgument,
          "complexity: N must be a power of two");
}

i64 flops_gmp_per_sample(int K, int M, int G) {
  require(K >= 1 && M >= 0 && G >= 0, ErrorCode::kInvalidArgument,
          "complexity: bad GMP structure");
  const i64 k = K, m = M, g = G;
  // G(G+1)/2 is always integral
  return 8 * ((m + 1) * (k + 2 * k * g) - g * (g + 1) / 2 * (k - 1)) + 10 + 2 * k +
         2 * (k - 1) * g + 2 * k * std::min(g, m);
}

Rational flops_td_gmp(const ComplexityParams& p, int rate) {
  p.validate();
  const i64 r = rate > 0 ? rate : p.R();
  return Rational::make(flops_gmp_per_sample(p.K, p.M_TD, p.G) * r * p.B, 1);
}

FlopPair flops_fd_gmp(const ComplexityParams& p) {
  p.validate();
  const i64 c = flops_gmp_per_sample(p.K, p.M_FD, p.G);
  const i64 n = p.N, nd = p.N_d, r = p.R(), u = p.U, v = p.V, b = p.B, k = p.K,
            m = p.M_FD, ng = p.N_g();
  const i64 num = c * nd * r * (u + v) + (u + (u + v) * k * m) * fft_flops(n) +
                  8 * (u * ng + n * v) * b;
  FlopPair out;
  out.exact = Rational::make(num, nd);
  out.approx = (static_cast<double>(c) + 4.0 * k * m * log2_exact(n) + 8.0 * b) *
               static_cast<double>(r * (u + v));
  return out;
}

FlopPair flops_fd_nn(const ComplexityParams& p) {
  p.validate();
  const i64 n = p.N, nd = p.N_d, u = p.U, d = p.D, knn = p.K_NN, m = p.M_FD, b = p.B,
            ng = p.N_g();
  const i64 num = n * (4 * u * (m + 1) * d + 2 * (knn - 1) * d * d + 4 * d * u) +
                  2 * u * fft_flops(n) + 8 * ng * u * b;
  FlopPair out;
  out.exact = Rational::make(num, nd);
  out.approx = (static_cast<double>(d) + static_cast<double>(d * d) / u + 8.0 * b) *
               static_cast<double>(p.R() * u);
  return out;
}

FlopPair flops_fd_cnn(const ComplexityParams& p) {
  p.validate();
  const i64 side = ceil_sqrt(p.N_d);
  const i64 u = p.U, kc = p.K_C, nc = p.N_conv1, nd = p.N_d;
  // (side / K_S)^2 kept as a fraction
  const Rational area = Rational::make(side * side, static_cast<i64>(p.K_S) * p.K_S);
  const Rational conv1 = Rational::make(2 * nc * u * (2 * kc * kc - 1), 1) * area;
  const Rational conv2 = conv1;
  const Rational fc = Rational::make(8 * nd * u, 1) * area;
  FlopPair out;
  out.exact = (conv1 + conv2 + fc) / Rational::make(nd, 1);
  out.approx = 8.0 * static_cast<double>(kc * kc * nc + nd) * static_cast<double>(u);
  return out;
}

std::string flop_scheme_name(FlopScheme s) {
  switch (s) {
    case FlopScheme::kTdGmpR1: return "td_gmp_r1";
    case FlopScheme::kTdGmp: return "td_gmp";
    case FlopScheme::kFdGmp: return "fd_gmp";
    case FlopScheme::kFdNn: return "fd_nn";
    case FlopScheme::kFdCnn: return "fd_cnn";
  }
  return "?";
}

const std::vector<FlopScheme>& all_flop_schemes() {
  static const std::vector<FlopScheme> all = {FlopScheme::kTdGmpR1, FlopScheme::kTdGmp,
                                              FlopScheme::kFdGmp, FlopScheme::kFdNn,
                                              FlopScheme::kFdCnn};
  return all;
}

namespace {

FlopEntry entry_for(FlopScheme s, const ComplexityParams& p) {
  FlopEntry e{s, {}, 0.0};
  FlopPair fp;
  switch (s) {
    case FlopScheme::kTdGmpR1:
      e.exact = flops_td_gmp(p, 1);
      e.approx = e.exact.value();
      return e;
    case FlopScheme::kTdGmp:
      e.exact = flops_td_gmp(p);
      e.approx = e.exact.value();
      return e;
    case FlopScheme::kFdGmp: fp = flops_fd_gmp(p); break;
    case FlopScheme::kFdNn: fp = flops_fd_nn(p); break;
    case FlopScheme::kFdCnn: fp = flops_fd_cnn(p); break;
  }
  e.exact = fp.exact;
  e.approx = fp.approx;
  return e;
}

bool is_td(FlopScheme s) { return s == FlopScheme::kTdGmpR1 || s == FlopScheme::kTdGmp; }

}  // namespace

FlopReport flop_report(const ComplexityParams& p) {
  FlopReport r{p, {}};
  for (FlopScheme s : all_flop_schemes()) r.entries.push_back(entry_for(s, p));
  return r;
}

SweepResult sweep(const ComplexityParams& base, SweepAxis axis, const std::vector<int>& values) {
  require(!values.empty(), ErrorCode::kInvalidArgument, "sweep: no axis values");
  require(std::is_sorted(values.begin(), values.end()) &&
              std::adjacent_find(values.begin(), values.end()) == values.end(),
          ErrorCode::kInvalidArgument, "sweep: axis values must be strictly ascending");
  SweepResult res{axis, {}, {}};
  std::vector<std::vector<FlopEntry>> table;  // [value][scheme]
  for (int v : values) {
    ComplexityParams p = base;
    (axis == SweepAxis::kB ? p.B : p.U) = v;
    table.push_back(flop_report(p).entries);
  }
  const auto& schemes = all_flop_schemes();
  for (std::size_t s = 0; s < schemes.size(); ++s)
    for (std::size_t i = 0; i < values.size(); ++i)
      res.rows.push_back({schemes[s], values[i], table[i][s].exact, table[i][s].approx});

  for (std::size_t t = 0; t < schemes.size(); ++t) {
    if (!is_td(schemes[t])) continue;
    for (std::size_t f = 0; f < schemes.size(); ++f) {
      if (is_td(schemes[f])) continue;
      for (std::size_t i = 1; i < values.size(); ++i) {
        const bool before = table[i - 1][f].exact < table[i - 1][t].exact;
        const bool after = table[i][f].exact < table[i][t].exact;
        if (before != after) {
          res.crossovers.push_back({schemes[f], schemes[t], values[i], after});
          break;
        }
      }
    }
  }
  return res;
}

const std::vector<ReferencePoint>& reference_points() {
  using S = FlopScheme;
  using A = SweepAxis;
  static const std::vector<ReferencePoint> pts = [] {
    std::vector<ReferencePoint> v;
    const int bs[] = {1, 4, 16, 100, 256, 1024, 4096};
    const double td1[] = {994, 3976, 15904, 99400, 254464, 1017856, 4071424};
    const double td4[] = {3976, 15904, 63616, 397600, 1017856, 4071424, 16285696};
    const double fdg[] = {4080, 4152, 4440, 6456, 10200, 28632, 102360};
    const double fdn[] = {4904, 4976, 5264, 7280, 11024, 29456, 103184};
    for (int i = 0; i < 7; ++i) {
      v.push_back({S::kTdGmpR1, A::kB, bs[i], td1[i]});
      v.push_back({S::kTdGmp, A::kB, bs[i], td4[i]});
      v.push_back({S::kFdGmp, A::kB, bs[i], fdg[i]});
      v.push_back({S::kFdNn, A::kB, bs[i], fdn[i]});
      v.push_back({S::kFdCnn, A::kB, bs[i], 1800});
    }
    const int us[] = {1, 2, 4, 8, 16, 64};
    for (int u : us) {
      v.push_back({S::kTdGmpR1, A::kU, u, 99400});
      v.push_back({S::kTdGmp, A::kU, u, 397600});
      v.push_back({S::kFdGmp, A::kU, u, 6456.0 * u});
      v.push_back({S::kFdNn, A::kU, u, 7280.0 * u});
      v.push_back({S::kFdCnn, A::kU, u, 1800.0 * u});
    }
    return v;
  }();
  return pts;
}

}  // namespace mimodpd
