#pragma once

#include <complex>
#include <span>
#include <vector>

namespace pulsesynth {

// One-sided DFT: bins 0..n/2 of sum_k x[k] exp(-2*pi*i*j*k/n).
// Radix-2 FFT when n is a power of two, direct evaluation otherwise.
std::vector<std::complex<double>> rdft(std::span<const double> x);

// Periodic Hann window of length n.
std::vector<double> hann_window(std::size_t n);

}  // namespace pulsesynth
