#pragma once

#include <vector>

#include "mimodpd/common.hpp"

namespace mimodpd {

/// Orders run q = 0..order-1 (so order 7 reaches |u|^6), memory taps
/// m = 0..memory, envelope offsets g = 1..cross_terms.
struct GmpStructure {
  int order = 1;
  int memory = 0;
  int cross_terms = 0;

  int taps() const { return memory + 1; }
  int coeff_count() const {
    return order * taps() + 2 * (order - 1) * taps() * cross_terms;
  }
  void validate() const;
  bool operator==(const GmpStructure&) const = default;
};

/// y[n] = sum_{q,m} a(q,m) u[n-m] |u[n-m]|^q
///      + sum_{q>=1,m,g} c(q,m,g) u[n-m] |u[n-m-g]|^q      (lagging envelope)
///      + sum_{q>=1,m,g} e(q,m,g) u[n-m] |u[n-m+g]|^q      (leading envelope)
/// with u = 0 outside [0, n). When sat_level > 0 the input magnitude is
/// clamped to sat_level before evaluation.
struct GmpModel {
  GmpStructure structure;
  CMat a;                 // order x taps
  std::vector<cplx> c;    // (order-1) x taps x cross_terms, row-major
  std::vector<cplx> e;
  double sat_level = 0.0;

  static GmpModel zeros(const GmpStructure& s);
  /// a(0,0) = 1, everything else zero.
  static GmpModel identity(const GmpStructure& s);

  std::size_t cross_index(int q, int m, int g) const {
    return (static_cast<std::size_t>(q - 1) * structure.taps() + m) * structure.cross_terms +
           (g - 1);
  }
  cplx& c_at(int q, int m, int g) { return c[cross_index(q, m, g)]; }
  cplx& e_at(int q, int m, int g) { return e[cross_index(q, m, g)]; }
  cplx c_at(int q, int m, int g) const { return c[cross_index(q, m, g)]; }
  cplx e_at(int q, int m, int g) const { return e[cross_index(q, m, g)]; }

  /// Flattened a (q-major), then c, then e.
  std::vector<cplx> flatten() const;
  static GmpModel unflatten(const GmpStructure& s, const std::vector<cplx>& theta,
                            double sat_level = 0.0);
  void check() const;
};

cplx clamp_magnitude(cplx u, double sat_level);

void gmp_forward(const GmpModel& model, const cplx* u, std::size_t n, cplx* y);
std::vector<cplx> gmp_forward(const GmpModel& model, const std::vector<cplx>& u);

/// n x coeff_count regressor for already-clamped input, columns in flatten() order.
CMat gmp_regressor(const GmpStructure& s, const cplx* u, std::size_t n);

struct GmpFit {
  GmpModel model;
  double nmse_db = 0.0;
  double condition = 0.0;
};

/// Least-squares GMP identification. Inputs are scaled to unit RMS before the
/// solve and coefficients rescaled afterwards. Fails with kIllConditioned when
/// the scaled regressor's condition number exceeds max_condition and ridge == 0.
/// segment > 0 treats the series as independent segments of that length, each
/// zero-padded at its edges (matches gmp_forward applied per segment).
GmpFit fit_gmp_ls(const std::vector<cplx>& inputs, const std::vector<cplx>& outputs,
                  const GmpStructure& s, double ridge = 0.0, double max_condition = 1e12,
                  std::size_t segment = 0);

/// gmp_forward on consecutive segments of length segment (0 = whole series).
std::vector<cplx> gmp_forward_segmented(const GmpModel& model, const std::vector<cplx>& u,
                                        std::size_t segment);

double nmse_db(const std::vector<cplx>& actual, const std::vector<cplx>& reference);

}  // namespace mimodpd
