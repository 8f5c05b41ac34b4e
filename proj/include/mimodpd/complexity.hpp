#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace mimodpd {

/// Non-negative exact fraction in lowest terms.
struct Rational {
  std::int64_t num = 0;
  std::int64_t den = 1;

  static Rational make(std::int64_t n, std::int64_t d);
  double value() const { return static_cast<double>(num) / static_cast<double>(den); }
  /// Nearest integer, halves rounded away from zero.
  std::int64_t rounded() const;
  bool operator==(const Rational&) const = default;
};

Rational operator+(Rational a, Rational b);
Rational operator*(Rational a, Rational b);
Rational operator/(Rational a, Rational b);
bool operator<(const Rational& a, const Rational& b);

/// 3 significant figures, e.g. "1.01e+03" style avoided: "1010", "3410", "0.123".
std::string format_sig3(double v);
/// "num/den", or "num" when den == 1.
std::string format_rational(const Rational& r);

struct ComplexityParams {
  int K = 7;          // nonlinear order
  int M_TD = 5;       // TD-GMP memory length (taps = M + 1)
  int M_FD = 3;       // FD-GMP / FD-NN memory length
  int G = 1;          // cross-term length
  int B = 100;
  int U = 1;
  int V = 0;          // victim predistorters (FD-GMP only)
  int N = 1024;
  int N_d = 256;
  int D = 15;         // FD-NN width
  int K_NN = 1;       // FD-NN hidden layers
  int N_conv1 = 20;
  int K_C = 3;
  int K_S = 1;

  int R() const { return N / N_d; }
  int N_g() const { return N - N_d; }
  void validate() const;
};

/// FLOPs per input sample of a GMP with order K, memory M, cross terms G.
std::int64_t flops_gmp_per_sample(int K, int M, int G);

/// TD-GMP per QAM symbol: C_Samp(K, M_TD, G) * R * B. rate overrides R when > 0.
Rational flops_td_gmp(const ComplexityParams& p, int rate = 0);

struct FlopPair {
  Rational exact;
  double approx = 0.0;
};

FlopPair flops_fd_gmp(const ComplexityParams& p);
FlopPair flops_fd_nn(const ComplexityParams& p);
FlopPair flops_fd_cnn(const ComplexityParams& p);

enum class FlopScheme { kTdGmpR1, kTdGmp, kFdGmp, kFdNn, kFdCnn };
std::string flop_scheme_name(FlopScheme s);
const std::vector<FlopScheme>& all_flop_schemes();

struct FlopEntry {
  FlopScheme scheme;
  Rational exact;
  double approx = 0.0;  // TD schemes: equal to exact
};

struct FlopReport {
  ComplexityParams params;
  std::vector<FlopEntry> entries;
};

FlopReport flop_report(const ComplexityParams& p);

enum class SweepAxis { kB, kU };

struct SweepRow {
  FlopScheme scheme;
  int axis_value = 0;
  Rational exact;
  double approx = 0.0;
};

/// First axis value at which an FD scheme's exact count crosses the reference
/// TD scheme's count (becomes cheaper on a B sweep, more expensive on a U sweep).
struct Crossover {
  FlopScheme fd_scheme;
  FlopScheme td_scheme;
  int axis_value = 0;
  bool fd_cheaper_after = false;
};

struct SweepResult {
  SweepAxis axis;
  std::vector<SweepRow> rows;  // scheme-major, axis ascending
  std::vector<Crossover> crossovers;
};

SweepResult sweep(const ComplexityParams& base, SweepAxis axis, const std::vector<int>& values);

/// Externally reported FLOP counts (B sweep at U = 1, U sweep at B = 100, default
/// OFDM parameters). They are diagnostics only: several disagree with the formulas.
struct ReferencePoint {
  FlopScheme scheme;
  SweepAxis axis;
  int axis_value;
  double flops;
};
const std::vector<ReferencePoint>& reference_points();

}  // namespace mimodpd
