#include "fft.hpp"

#include <fftw3.h>

#include <algorithm>
#include <mutex>

#include "levytail/errors.hpp"

namespace levytail::detail {

namespace {

// FFTW's planner is not re-entrant.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

}  // namespace

std::size_t next_pow2(std::size_t n) {
  std::size_t p = 1;
  while (p < n) p <<= 1;
  return p;
}

RealFft::RealFft(std::size_t n) : n_(n) {
  if (n_ < 2) n_ = 2;
  real_ = static_cast<double*>(fftw_malloc(sizeof(double) * n_));
  cplx_ = static_cast<std::complex<double>*>(fftw_malloc(sizeof(fftw_complex) * (n_ / 2 + 1)));
  if (!real_ || !cplx_) fail(ErrorCode::GridInfeasible, "FFT buffer allocation failed");
  std::lock_guard<std::mutex> lock(planner_mutex());
  plan_fwd_ = fftw_plan_dft_r2c_1d(static_cast<int>(n_), real_, reinterpret_cast<fftw_complex*>(cplx_),
                                   FFTW_ESTIMATE);
  plan_inv_ = fftw_plan_dft_c2r_1d(static_cast<int>(n_), reinterpret_cast<fftw_complex*>(cplx_), real_,
                                   FFTW_ESTIMATE);
}

RealFft::~RealFft() {
  {
    std::lock_guard<std::mutex> lock(planner_mutex());
    fftw_destroy_plan(static_cast<fftw_plan>(plan_fwd_));
    fftw_destroy_plan(static_cast<fftw_plan>(plan_inv_));
  }
  fftw_free(real_);
  fftw_free(cplx_);
}

std::vector<std::complex<double>> RealFft::forward(std::span<const double> input) {
  const std::size_t m = std::min(input.size(), n_);
  std::copy_n(input.begin(), m, real_);
  std::fill(real_ + m, real_ + n_, 0.0);
  fftw_execute(static_cast<fftw_plan>(plan_fwd_));
  return {cplx_, cplx_ + spectrum_size()};
}

std::vector<double> RealFft::inverse(std::span<const std::complex<double>> spectrum) {
  std::copy_n(spectrum.begin(), spectrum_size(), cplx_);
  fftw_execute(static_cast<fftw_plan>(plan_inv_));
  return {real_, real_ + n_};
}

void complex_dft(std::vector<std::complex<double>>& data, int sign) {
  if (data.empty()) return;
  fftw_plan plan;
  {
    std::lock_guard<std::mutex> lock(planner_mutex());
    auto* p = reinterpret_cast<fftw_complex*>(data.data());
    plan = fftw_plan_dft_1d(static_cast<int>(data.size()), p, p, sign < 0 ? FFTW_FORWARD : FFTW_BACKWARD,
                            FFTW_ESTIMATE);
  }
  fftw_execute(plan);
  std::lock_guard<std::mutex> lock(planner_mutex());
  fftw_destroy_plan(plan);
}

std::vector<double> linear_convolve(std::span<const double> a, std::span<const double> b) {
  if (a.empty() || b.empty()) return {};
  const std::size_t out_len = a.size() + b.size() - 1;
  RealFft fft(next_pow2(out_len));
  auto fa = fft.forward(a);
  auto fb = fft.forward(b);
  for (std::size_t i = 0; i < fa.size(); ++i) fa[i] *= fb[i];
  auto r = fft.inverse(fa);
  const double scale = 1.0 / static_cast<double>(fft.size());
  r.resize(out_len);
  for (double& v : r) v *= scale;
  return r;
}

KernelConvolver::KernelConvolver(std::span<const double> kernel, std::size_t max_input_len,
                                 std::size_t out_len)
    : out_len_(out_len), fft_(next_pow2(max_input_len + kernel.size() - 1)) {
  kernel_hat_ = fft_.forward(kernel);
}

std::vector<double> KernelConvolver::apply(std::span<const double> input) {
  auto h = fft_.forward(input);
  for (std::size_t i = 0; i < h.size(); ++i) h[i] *= kernel_hat_[i];
  auto r = fft_.inverse(h);
  const double scale = 1.0 / static_cast<double>(fft_.size());
  r.resize(std::min(out_len_, r.size()));
  for (double& v : r) v *= scale;
  return r;
}

double direct_convolution_at(std::span<const double> a, std::span<const double> b, std::size_t n) {
  // k ranges over indices with 0 <= k < a.size() and 0 <= n-k < b.size().
  const std::size_t k_lo = n >= b.size() ? n - b.size() + 1 : 0;
  const std::size_t k_hi = std::min(n, a.size() - 1);
  double s = 0.0;
  for (std::size_t k = k_lo; k <= k_hi && k_lo <= k_hi; ++k) s += a[k] * b[n - k];
  return s;
}

}  // namespace levytail::detail
