#include "fttm/kernels.hpp"

#include <algorithm>

#include "fttm/fft.hpp"

namespace fttm::kernels {

std::vector<Complex> direct_convolution(std::span<const Complex> x, const FirKernel& kernel) {
  const auto n_in = static_cast<long>(x.size());
  const auto len = static_cast<long>(kernel.taps.size());
  const auto c = static_cast<long>(kernel.center);
  std::vector<Complex> y(x.size());
  for (long n = 0; n < n_in; ++n) {
    Complex acc{0.0, 0.0};
    // tap index j = c + m, input index n - m = n + c - j
    const long j_lo = std::max(0L, n + c - n_in + 1);
    const long j_hi = std::min(len - 1, n + c);
    for (long j = j_lo; j <= j_hi; ++j) acc += kernel.taps[j] * x[n + c - j];
    y[n] = acc;
  }
  return y;
}

std::size_t overlap_save_block(std::size_t input_length, std::size_t kernel_length) {
  const std::size_t by_kernel = fft::next_pow2(8 * kernel_length);
  const std::size_t whole = fft::next_pow2(input_length + kernel_length - 1);
  return std::max(std::min(by_kernel, whole), fft::next_pow2(kernel_length + 1));
}

namespace {

std::vector<Complex> overlap_save_impl(std::span<const Complex> x, const FirKernel& kernel,
                                       bool parallel) {
  const std::size_t n_in = x.size();
  const std::size_t len = kernel.taps.size();
  const std::size_t block = overlap_save_block(n_in, len);
  const std::size_t hop = block - len + 1;
  const std::size_t c = kernel.center;

  std::vector<Complex> spectrum = fft::forward_copy(kernel.taps, block);
  const double scale = 1.0 / static_cast<double>(block);
  for (auto& v : spectrum) v *= scale;

  // z[i] = full causal convolution; y[n] = z[n + c]. Block b produces
  // z[b*hop, b*hop + hop) from padded input xp[b*hop, b*hop + block) where
  // xp = [len-1 zeros, x, zeros].
  const std::size_t z_needed = c + n_in;
  const long n_blocks = static_cast<long>((z_needed + hop - 1) / hop);
  std::vector<Complex> y(n_in);

  auto run_block = [&](long b, std::vector<Complex>& buf) {
    const long s = b * static_cast<long>(hop);
    for (std::size_t i = 0; i < block; ++i) {
      const long xi = s + static_cast<long>(i) - static_cast<long>(len - 1);
      buf[i] = (xi >= 0 && xi < static_cast<long>(n_in)) ? x[xi] : Complex{0.0, 0.0};
    }
    fft::forward(buf);
    for (std::size_t i = 0; i < block; ++i) buf[i] *= spectrum[i];
    fft::inverse(buf);
    for (std::size_t i = 0; i < hop; ++i) {
      const long zi = s + static_cast<long>(i);
      const long n = zi - static_cast<long>(c);
      if (n >= 0 && n < static_cast<long>(n_in)) y[n] = buf[len - 1 + i];
    }
  };

  if (parallel) {
#pragma omp parallel
    {
      std::vector<Complex> buf(block);
#pragma omp for schedule(static)
      for (long b = 0; b < n_blocks; ++b) run_block(b, buf);
    }
  } else {
    std::vector<Complex> buf(block);
    for (long b = 0; b < n_blocks; ++b) run_block(b, buf);
  }
  return y;
}

}  // namespace

std::vector<Complex> overlap_save(std::span<const Complex> x, const FirKernel& kernel) {
  return overlap_save_impl(x, kernel, true);
}

std::vector<Complex> overlap_save_serial(std::span<const Complex> x, const FirKernel& kernel) {
  return overlap_save_impl(x, kernel, false);
}

}  // namespace fttm::kernels
