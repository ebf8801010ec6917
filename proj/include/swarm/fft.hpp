#pragma once

#include <complex>
#include <vector>

namespace swarm::fft {

/// Real-to-complex FFT of length n (out has n/2+1 entries, unnormalized).
void rfft(const double* in, std::complex<double>* out, int n);

/// Complex-to-real inverse of rfft, normalized by 1/n.
void irfft(const std::complex<double>* in, double* out, int n);

std::vector<std::complex<double>> rfft(const std::vector<double>& in);
std::vector<double> irfft(const std::vector<std::complex<double>>& in, int n);

/// Row-major 2D/3D real transforms; the last axis is halved to n_last/2+1.
/// Inverses are normalized by the total point count.
void rfftn(const double* in, std::complex<double>* out, const int* dims, int rank);
void irfftn(const std::complex<double>* in, double* out, const int* dims, int rank);

/// Number of complex coefficients of an rfftn with the given real dims.
std::size_t spectral_size(const int* dims, int rank);

} // namespace swarm::fft
