#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

namespace fttm {

using Complex = std::complex<double>;

// Uniformly sampled complex baseband record. Every time-domain signal in the
// toolkit (signals under test, probe chirps, filtered fields, photodetected
// envelopes) is carried by this type; envelopes keep a zero imaginary part.
class Waveform {
 public:
  Waveform(double sample_rate, double start_time, std::vector<Complex> samples);

  double sample_rate() const noexcept { return sample_rate_; }
  double start_time() const noexcept { return start_time_; }
  std::size_t size() const noexcept { return samples_.size(); }
  double duration() const noexcept { return static_cast<double>(samples_.size()) / sample_rate_; }
  double time_at(std::size_t n) const noexcept {
    return start_time_ + static_cast<double>(n) / sample_rate_;
  }

  std::span<const Complex> samples() const noexcept { return samples_; }
  std::span<Complex> mutable_samples() noexcept { return samples_; }
  const Complex& operator[](std::size_t n) const noexcept { return samples_[n]; }

  // Real parts as a plain vector; meaningful for envelopes.
  std::vector<double> real_part() const;

  double energy() const noexcept;
  double rms() const noexcept;

 private:
  double sample_rate_;
  double start_time_;
  std::vector<Complex> samples_;
};

Waveform make_real_waveform(double sample_rate, double start_time, std::span<const double> values);

}  // namespace fttm
