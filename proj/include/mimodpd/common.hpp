#pragma once

#include <complex>
#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace mimodpd {

using cplx = std::complex<double>;

/// Row-major complex matrix. Rows are streams/branches, columns are
/// subcarriers or time samples, so each row is contiguous for the FFT.
using CMat = Eigen::Matrix<cplx, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using CVec = Eigen::Matrix<cplx, Eigen::Dynamic, 1>;

enum class ErrorCode {
  kInvalidArgument,
  kShapeMismatch,
  kIllConditioned,
  kRankDeficient,
  kNonFinite,
  kDiverged,
  kTapeConsumed,
  kIo,
  kConfig,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) {
  throw Error(code, what);
}

inline void require(bool ok, ErrorCode code, const std::string& what) {
  if (!ok) fail(code, what);
}

// Baseband amplitudes are peak volts across a 50 ohm load, so the average
// power of a phasor v is |v|^2 / (2 * 50) watts.
inline constexpr double kLoadOhms = 50.0;

inline double v2_to_watts(double v2) { return v2 / (2.0 * kLoadOhms); }
inline double watts_to_v2(double w) { return w * 2.0 * kLoadOhms; }
double v2_to_dbm(double v2);
double dbm_to_v2(double dbm);
double db_to_lin(double db);
double lin_to_db(double lin);

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kSpeedOfLight = 299792458.0;

}  // namespace mimodpd
