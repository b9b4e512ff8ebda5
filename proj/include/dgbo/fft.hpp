#pragma once

#include <complex>
#include <cstddef>

namespace dgbo::detail {

// Unnormalized complex DFT, out[k] = sum_j in[j] exp(-2*pi*i*j*k/n).
// in and out must be distinct arrays of length n.
void fft_forward(std::size_t n, const std::complex<double>* in, std::complex<double>* out);

// Unnormalized inverse, out[j] = sum_k in[k] exp(+2*pi*i*j*k/n). No 1/n factor.
void fft_backward(std::size_t n, const std::complex<double>* in, std::complex<double>* out);

} // namespace dgbo::detail
