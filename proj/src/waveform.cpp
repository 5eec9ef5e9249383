#include "fttm/waveform.hpp"

#include <cmath>

#include "fttm/error.hpp"

namespace fttm {

Waveform::Waveform(double sample_rate, double start_time, std::vector<Complex> samples)
    : sample_rate_(sample_rate), start_time_(start_time), samples_(std::move(samples)) {
  if (!(sample_rate_ > 0.0) || !std::isfinite(sample_rate_))
    throw ValidationError("sample_rate", "must be positive and finite");
  if (!std::isfinite(start_time_)) throw ValidationError("start_time", "must be finite");
  if (samples_.empty()) throw ValidationError("samples", "waveform must not be empty");
}

std::vector<double> Waveform::real_part() const {
  std::vector<double> out(samples_.size());
  for (std::size_t i = 0; i < samples_.size(); ++i) out[i] = samples_[i].real();
  return out;
}

double Waveform::energy() const noexcept {
  double e = 0.0;
  for (const auto& s : samples_) e += std::norm(s);
  return e;
}

double Waveform::rms() const noexcept {
  return std::sqrt(energy() / static_cast<double>(samples_.size()));
}

Waveform make_real_waveform(double sample_rate, double start_time, std::span<const double> values) {
  std::vector<Complex> s(values.begin(), values.end());
  return Waveform(sample_rate, start_time, std::move(s));
}

}  // namespace fttm
