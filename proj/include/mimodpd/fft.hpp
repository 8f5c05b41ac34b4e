#pragma once

#include <cstddef>

#include "mimodpd/common.hpp"

namespace mimodpd {

/// Unitary DFT in place on a contiguous buffer of length n (any n > 0).
/// forward: X[k] = 1/sqrt(n) sum_t x[t] e^{-j2pi kt/n}; inverse uses +j.
void fft_unitary(cplx* data, std::size_t n, bool inverse);

/// Row-wise unitary transform of a row-major matrix, in place.
void fft_rows(CMat& m, bool inverse);

bool is_power_of_two(std::size_t n);
int ilog2(std::size_t n);

}  // namespace mimodpd
