#include "mimodpd/fft.hpp"

#include <fftw3.h>

#include <cmath>
#include <map>
#include <mutex>
#include <utility>
#include <vector>

namespace mimodpd {
namespace {

// Planning is not thread-safe in FFTW; execution of an existing plan on new
// arrays is. Plans are created unaligned and in place so one plan per
// (size, direction) serves every buffer.
struct PlanCache {
  std::mutex mu;
  std::map<std::pair<std::size_t, int>, fftw_plan> plans;

  fftw_plan get(std::size_t n, int sign) {
    std::lock_guard<std::mutex> lock(mu);
    auto key = std::make_pair(n, sign);
    auto it = plans.find(key);
    if (it != plans.end()) return it->second;
    std::vector<fftw_complex> scratch(n);
    fftw_plan p = fftw_plan_dft_1d(static_cast<int>(n), scratch.data(), scratch.data(),
                                   sign, FFTW_ESTIMATE | FFTW_UNALIGNED);
    plans.emplace(key, p);
    return p;
  }

  ~PlanCache() {
    for (auto& kv : plans) fftw_destroy_plan(kv.second);
  }
};

PlanCache& cache() {
  static PlanCache c;
  return c;
}

}  // namespace

bool is_power_of_two(std::size_t n) { return n > 0 && (n & (n - 1)) == 0; }

int ilog2(std::size_t n) {
  int r = 0;
  while (n > 1) {
    n >>= 1;
    ++r;
  }
  return r;
}

void fft_unitary(cplx* data, std::size_t n, bool inverse) {
  require(n > 0, ErrorCode::kInvalidArgument, "fft: empty buffer");
  fftw_plan p = cache().get(n, inverse ? FFTW_BACKWARD : FFTW_FORWARD);
  auto* buf = reinterpret_cast<fftw_complex*>(data);
  fftw_execute_dft(p, buf, buf);
  const double s = 1.0 / std::sqrt(static_cast<double>(n));
  for (std::size_t i = 0; i < n; ++i) data[i] *= s;
}

void fft_rows(CMat& m, bool inverse) {
  const auto n = static_cast<std::size_t>(m.cols());
  for (Eigen::Index r = 0; r < m.rows(); ++r) fft_unitary(m.data() + r * m.cols(), n, inverse);
}

}  // namespace mimodpd
