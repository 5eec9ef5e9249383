#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "fttm/waveform.hpp"

namespace fttm::fft {

// In-place complex transforms of arbitrary length, backed by FFTW. Plans are
// cached per (size, direction) and shared between threads; execution is
// thread-safe. The inverse is unnormalized, matching FFTW.
void forward(std::span<Complex> data);
void inverse(std::span<Complex> data);

// Convenience wrappers that copy.
std::vector<Complex> forward_copy(std::span<const Complex> data, std::size_t padded_size);
std::vector<Complex> inverse_normalized(std::span<const Complex> data);

// Frequency of bin `i` for an `n`-point transform at rate `fs`, mapped to
// [-fs/2, fs/2).
double bin_frequency(std::size_t i, std::size_t n, double fs) noexcept;

std::size_t next_pow2(std::size_t n) noexcept;

}  // namespace fttm::fft
