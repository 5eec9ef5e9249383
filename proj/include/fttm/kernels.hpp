#pragma once

// Numerical inner loops. Each parallel kernel has a serial reference that
// the tests hold it against and the benchmark compares it with.

#include <span>
#include <vector>

#include "fttm/filters.hpp"
#include "fttm/waveform.hpp"

namespace fttm::kernels {

// y[n] = sum_m taps[center + m] * x[n - m], n in [0, x.size()).
std::vector<Complex> direct_convolution(std::span<const Complex> x, const FirKernel& kernel);

// Same result via FFT overlap-save; blocks run in parallel.
std::vector<Complex> overlap_save(std::span<const Complex> x, const FirKernel& kernel);
std::vector<Complex> overlap_save_serial(std::span<const Complex> x, const FirKernel& kernel);

// FFT block length used by overlap_save: 8 x kernel length rounded up to a
// power of two, but never more than one block covering the whole record.
std::size_t overlap_save_block(std::size_t input_length, std::size_t kernel_length);

}  // namespace fttm::kernels
