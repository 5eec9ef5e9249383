#pragma once

#include <cstdint>
#include <optional>
#include <variant>
#include <vector>

#include "fttm/waveform.hpp"

namespace fttm {

// Periodic probe chirp. Within each period the instantaneous frequency ramps
// linearly from f_start to f_stop.
//
// `band_origin` is the signal-under-test frequency that crosses the filter at
// the start of a period. It defaults to f_start. Setups that measure a
// baseband band [0, f_stop - f_start] with a 4.8-8.8 GHz probe (the STFT
// presets) set it to 0.
class SweepConfig {
 public:
  SweepConfig(double f_start, double f_stop, double period,
              std::optional<double> band_origin = std::nullopt);

  double f_start() const noexcept { return f_start_; }
  double f_stop() const noexcept { return f_stop_; }
  double period() const noexcept { return period_; }
  double span() const noexcept { return f_stop_ - f_start_; }
  // Sweep rate k in Hz/s.
  double rate() const noexcept { return (f_stop_ - f_start_) / period_; }
  double band_origin() const noexcept { return band_origin_.value_or(f_start_); }
  bool has_explicit_origin() const noexcept { return band_origin_.has_value(); }
  // Frequency shift applied at heterodyne so band_origin maps to t = 0.
  double origin_shift() const noexcept { return f_start_ - band_origin(); }

 private:
  double f_start_;
  double f_stop_;
  double period_;
  std::optional<double> band_origin_;
};

struct Tone {
  double frequency;
  double amplitude = 1.0;
  double phase = 0.0;  // radians at t = 0
};

struct Dwell {
  double frequency;
  double dwell;
};

namespace sut {

struct Tones {
  std::vector<Tone> tones;
};

// Linear chirp f0 -> f1 for t in [0, duration); zero afterwards.
struct Lfm {
  double f0;
  double f1;
  double duration;
};

// Up-chirp f0 -> f1 plus down-chirp f1 -> f0 over the same interval.
struct DualChirpLfm {
  double f0;
  double f1;
  double duration;
};

// Consecutive dwells with continuous phase; zero after the last dwell.
struct StepFrequency {
  std::vector<Dwell> steps;
};

// Consecutive dwells; each hop restarts its oscillator phase.
struct FrequencyHopping {
  std::vector<Dwell> hops;
};

}  // namespace sut

using SutSpec = std::variant<sut::Tones, sut::Lfm, sut::DualChirpLfm, sut::StepFrequency,
                             sut::FrequencyHopping>;

struct NoiseSpec {
  bool enabled = false;
  double snr_db = 0.0;
  std::uint64_t seed = 0;
};

void validate(const SutSpec& spec);
double max_frequency(const SutSpec& spec);

// Instantaneous frequency of the SUT at `t`, or nullopt when silent. Multiple
// components (tones, dual chirp) report every active frequency.
std::vector<double> instantaneous_frequencies(const SutSpec& spec, double t);

// Analytic signal sampled at `sample_rate` over [start_time, start_time + duration).
Waveform synthesize_sut(const SutSpec& spec, double sample_rate, double duration,
                        double start_time = 0.0);

// `n_samples` of the SUT starting at `start_time`; used by segment-wise processing.
Waveform synthesize_sut_samples(const SutSpec& spec, double sample_rate, double start_time,
                                std::size_t n_samples);

// Periodic chirp starting at t = 0. Phase resets at every period boundary.
Waveform synthesize_probe_chirp(const SweepConfig& cfg, int n_periods, double sample_rate);

// Probe samples for an arbitrary window of absolute time.
Waveform probe_chirp_segment(const SweepConfig& cfg, double sample_rate, double start_time,
                             std::size_t n_samples);

// Complex white Gaussian noise at `snr_db` relative to the input RMS.
Waveform add_awgn(const Waveform& w, const NoiseSpec& noise);

// As add_awgn, but the noise power is set against `reference_rms` instead of
// the waveform's own RMS.
Waveform add_awgn_referenced(const Waveform& w, const NoiseSpec& noise, double reference_rms);

// Auto sample rate: 4 x the highest frequency in play.
inline constexpr double kAutoSampleRateFactor = 4.0;
inline constexpr double kMinSampleRateFactor = 2.5;

}  // namespace fttm
