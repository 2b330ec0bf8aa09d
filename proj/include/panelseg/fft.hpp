#ifndef PANELSEG_FFT_HPP
#define PANELSEG_FFT_HPP

#include <complex>
#include <span>
#include <vector>

namespace panelseg {

// Thin real-FFT facade (FFTW backed, plan cache per length, thread-safe).
// Forward: length-T real -> T/2+1 complex coefficients c_f = sum_t x_t e^{-2pi i f t/T}.
// Inverse includes the 1/T factor so irfft(rfft(x), T) == x.
std::vector<std::complex<double>> rfft(std::span<const double> x);
std::vector<double> irfft(std::span<const std::complex<double>> c, long T);

}  // namespace panelseg

#endif  // PANELSEG_FFT_HPP
