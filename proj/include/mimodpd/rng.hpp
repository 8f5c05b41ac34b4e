#pragma once

#include <cstdint>

#include "mimodpd/common.hpp"

namespace mimodpd {

/// Counter-based generator: every draw is a keyed hash of (key, counter), so a
/// stream is fully determined by its seed and the number of draws taken.
/// Independent sub-streams come from fork(tag), which rekeys without touching
/// the parent's counter.
class Rng {
 public:
  explicit Rng(std::uint64_t seed, std::uint64_t stream = 0);

  Rng fork(std::uint64_t tag) const;

  std::uint64_t next_u64();
  /// Uniform on [0, 1).
  double uniform();
  double uniform(double lo, double hi);
  /// Standard normal (Box-Muller, one value per pair of uniforms).
  double normal();
  /// Circularly-symmetric complex normal with E|z|^2 = variance.
  cplx cnormal(double variance = 1.0);
  std::uint64_t uniform_int(std::uint64_t n);

  std::uint64_t key() const { return key_; }
  std::uint64_t counter() const { return counter_; }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

std::uint64_t mix64(std::uint64_t x);

}  // namespace mimodpd
