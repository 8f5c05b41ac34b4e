// Independent transcription of the FLOP formulas in 128-bit integers.
#pragma once

#include <algorithm>
#include <vector>

#include "mimodpd/complexity.hpp"
#include "mimodpd/rng.hpp"

namespace flop_oracle {

using i128 = __int128;

// Formulas transcribed term by term, numerator over N_d.
struct Frac {
  i128 num, den;
};

inline bool same(const mimodpd::Rational& r, const Frac& f) {
  return static_cast<i128>(r.num) * f.den == f.num * static_cast<i128>(r.den);
}

inline i128 c_samp(i128 K, i128 M, i128 G) {
  const i128 first = (M + 1) * (K + 2 * K * G);
  const i128 second = G * (G + 1) * (K - 1) / 2;
  return 8 * (first - second) + 10 + 2 * K + 2 * (K - 1) * G + 2 * K * (G < M ? G : M);
}

inline i128 lg(i128 n) {
  i128 k = 0;
  while ((i128(1) << k) != n) ++k;
  return k;
}

inline i128 dft(i128 N) { return 4 * N * lg(N) - 6 * N + 8; }

inline Frac fd_gmp(const mimodpd::ComplexityParams& p) {
  const i128 R = p.N / p.N_d, U = p.U, V = p.V, K = p.K, M = p.M_FD, N = p.N, Ng = p.N - p.N_d;
  const i128 num = c_samp(K, M, p.G) * p.N_d * R * (U + V) + (U + (U + V) * K * M) * dft(N) +
                   8 * (U * Ng + N * V) * p.B;
  return {num, p.N_d};
}

inline Frac fd_nn(const mimodpd::ComplexityParams& p) {
  const i128 N = p.N, U = p.U, D = p.D, M = p.M_FD, Ng = p.N - p.N_d;
  const i128 num = N * (4 * U * (M + 1) * D + 2 * (p.K_NN - 1) * D * D + 4 * D * U) +
                   2 * U * dft(N) + 8 * Ng * U * p.B;
  return {num, p.N_d};
}

inline Frac fd_cnn(const mimodpd::ComplexityParams& p) {
  i128 side = 0;
  while (side * side < p.N_d) ++side;
  const i128 U = p.U, KS2 = i128(p.K_S) * p.K_S;
  // every term carries (side/K_S)^2; keep K_S^2 in the denominator
  const i128 conv = 2 * i128(p.N_conv1) * U * (2 * i128(p.K_C) * p.K_C - 1) * side * side;
  const i128 fc = 8 * i128(p.N_d) * U * side * side;
  return {2 * conv + fc, KS2 * p.N_d};
}

inline std::vector<mimodpd::ComplexityParams> tuples() {
  std::vector<mimodpd::ComplexityParams> out;
  out.push_back(mimodpd::ComplexityParams{});  // the evaluation configuration
  mimodpd::Rng rng(2024);
  const int Ns[] = {64, 128, 256, 512, 1024, 2048, 4096};
  while (out.size() < 40) {
    mimodpd::ComplexityParams p;
    p.K = 1 + static_cast<int>(rng.uniform_int(9));
    p.M_TD = static_cast<int>(rng.uniform_int(8));
    p.M_FD = static_cast<int>(rng.uniform_int(6));
    p.G = static_cast<int>(rng.uniform_int(4));
    p.B = static_cast<int>(rng.uniform_int(300));
    p.U = 1 + static_cast<int>(rng.uniform_int(16));
    p.V = static_cast<int>(rng.uniform_int(3));
    p.N = Ns[rng.uniform_int(7)];
    const int r = 1 << rng.uniform_int(4);
    p.N_d = std::max(1, p.N / r);
    p.D = 1 + static_cast<int>(rng.uniform_int(40));
    p.K_NN = 1 + static_cast<int>(rng.uniform_int(3));
    p.N_conv1 = 1 + static_cast<int>(rng.uniform_int(32));
    p.K_C = 1 + 2 * static_cast<int>(rng.uniform_int(3));
    p.K_S = 1 + static_cast<int>(rng.uniform_int(3));
    out.push_back(p);
  }
  return out;
}

}  // namespace flop_oracle
