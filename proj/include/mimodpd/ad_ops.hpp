#pragma once

#include <vector>

#include "mimodpd/autodiff.hpp"
#include "mimodpd/gmp.hpp"

namespace mimodpd::ad {

// Complex tensors: shape [rows, len, 2]. Real tensors: any shape.
// All gradients follow dL/dRe + j dL/dIm per complex entry.

Var complex_constant(Tape& t, const CMat& m);
CMat to_cmat(const Tape& t, Var v);

/// Unitary DFT along the second dimension of [rows, n, 2].
Var cfft(Tape& t, Var x, bool inverse);

/// x: [S*U, N, 2] (symbol-major), w[k]: B x U. Output [S*B, N, 2].
Var precode(Tape& t, const std::vector<CMat>& w, Var x);

/// out_b = in_b + sum_{b' != b} g(b, b') in_b' within each block of B rows.
Var mix(Tape& t, const CMat& coupling, Var x);

struct GmpOpConfig {
  GmpStructure structure;
  /// Row r uses model r % count where count = coeffs.shape[0].
  double input_scale = 1.0;
  double sat_level = 0.0;
};

/// y = scale * GMP_theta(clamp(x) / scale). coeffs: [count, P, 2].
Var gmp(Tape& t, Var x, Var coeffs, const GmpOpConfig& cfg);

/// mean over complex entries of |x - target|^2, shape [1].
Var mse(Tape& t, Var x, Var target);

/// x: [n, in], w: [out, in], b: [out] -> [n, out]
Var dense(Tape& t, Var x, Var w, Var b);
Var relu(Tape& t, Var x);
/// x: [S, C, H, W], k: [O, C, K, K], b: [O]; zero padding K/2, output ceil(H/stride).
Var conv2d(Tape& t, Var x, Var k, Var b, int stride);
/// out.flat[i] = idx[i] >= 0 ? x.flat[idx[i]] : 0
Var gather(Tape& t, Var x, std::vector<long> idx, Shape out_shape);
Var scale(Tape& t, Var x, double c);
Var add(Tape& t, Var a, Var b);

}  // namespace mimodpd::ad
