#pragma once

#include <complex>
#include <cstddef>
#include <vector>

namespace greenstop {

constexpr bool is_power_of_two(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

/// In-place radix-2 transform of a power-of-two-length vector.
/// sign = -1: X_m = sum_j x_j e^{-2 pi i j m / n}   (forward)
/// sign = +1: the unnormalized inverse; divide by n to invert.
void fft_pow2(std::vector<std::complex<double>>& a, int sign);

} // namespace greenstop
