#pragma once

#include <complex>
#include <span>
#include <vector>

namespace forge {

// In-place iterative radix-2 FFT. data.size() must be a power of two.
// inverse=true applies the 1/N scale.
void fft_radix2(std::vector<std::complex<double>>& data, bool inverse);

// Linear convolution, length a.size() + b.size() - 1. Uses the FFT above
// when the product of sizes is large enough to matter, direct accumulation
// otherwise. Both paths are deterministic.
std::vector<double> convolve(std::span<const double> a, std::span<const double> b);

}  // namespace forge
