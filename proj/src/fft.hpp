#pragma once

// Thin RAII layer over FFTW. Plans use FFTW_ESTIMATE so that transforms are
// bitwise reproducible between runs.

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

namespace levytail::detail {

std::size_t next_pow2(std::size_t n);

// Real-to-complex / complex-to-real transform pair of a fixed length.
class RealFft {
 public:
  explicit RealFft(std::size_t n);
  ~RealFft();
  RealFft(const RealFft&) = delete;
  RealFft& operator=(const RealFft&) = delete;

  std::size_t size() const { return n_; }
  std::size_t spectrum_size() const { return n_ / 2 + 1; }

  // Zero-pads input to size() and returns its spectrum.
  std::vector<std::complex<double>> forward(std::span<const double> input);
  // Unnormalised inverse; the caller divides by size().
  std::vector<double> inverse(std::span<const std::complex<double>> spectrum);

 private:
  std::size_t n_;
  double* real_;
  std::complex<double>* cplx_;
  void* plan_fwd_;
  void* plan_inv_;
};

// In-place complex DFT of power-of-two (or any) length.
// sign = -1: sum_k c_k exp(-2 pi i k m / n); sign = +1: exp(+...).
void complex_dft(std::vector<std::complex<double>>& data, int sign);

// Full linear convolution (length a.size() + b.size() - 1), zero-padded to the
// next power of two so that no circular wrap occurs.
std::vector<double> linear_convolve(std::span<const double> a, std::span<const double> b);

// Repeated linear convolution against a fixed kernel, keeping only the first
// out_len samples of each product.
class KernelConvolver {
 public:
  KernelConvolver(std::span<const double> kernel, std::size_t max_input_len, std::size_t out_len);
  std::vector<double> apply(std::span<const double> input);

 private:
  std::size_t out_len_;
  RealFft fft_;
  std::vector<std::complex<double>> kernel_hat_;
};

// sum_k a[k] * b[n - k] computed directly; exact up to summation rounding for
// non-negative data, used where FFT round-off would swamp tiny tail values.
double direct_convolution_at(std::span<const double> a, std::span<const double> b, std::size_t n);

}  // namespace levytail::detail
