#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "fttm/filters.hpp"
#include "fttm/signal.hpp"
#include "fttm/waveform.hpp"

namespace fttm {

struct DetectedPulse {
  int period_index = 0;
  double peak_time = 0.0;  // s, from the start of its period
  double fwhm = 0.0;       // s
  double peak_amplitude = 0.0;
  std::optional<double> mapped_frequency;
  bool boundary_flag = false;  // peak within one FWHM of a period edge
  bool out_of_band = false;    // mapped outside the swept band

  double fwhm_frequency(double sweep_rate) const noexcept { return sweep_rate * fwhm; }
};

struct CalibrationOffset {
  double time_offset = 0.0;
  double reference_frequency = 0.0;
};

struct PulseTrain {
  SweepConfig sweep;
  std::vector<DetectedPulse> pulses;  // sorted by (period_index, peak_time)
  std::optional<CalibrationOffset> calibration;
};

// sut * conj(probe), shifted so that a SUT component at f lands on
// `filter_center` at tau = (f - band_origin)/k of every period.
Waveform heterodyne(const Waveform& sut, const Waveform& probe, double filter_center,
                    double origin_shift = 0.0);
Waveform heterodyne(const Waveform& sut, const Waveform& probe, double filter_center,
                    const SweepConfig& sweep);

// Power envelope |w|^2, optionally through a zero-phase low-pass with a
// 4th-order Butterworth magnitude at `lowpass_cutoff`.
Waveform photodetect(const Waveform& w, std::optional<double> lowpass_cutoff = std::nullopt);

inline constexpr double kDefaultThreshold = 0.5;

// Per sweep period: local maxima above threshold_frac x the period maximum,
// accepted strongest first. A weaker maximum counts as its own pulse only if
// the envelope dips below half of it on the way to every accepted pulse
// (which keeps pulses at least one mean FWHM apart); otherwise it is ripple.
PulseTrain detect_pulses(const Waveform& envelope, const SweepConfig& sweep,
                         double threshold_frac = kDefaultThreshold);

// FWHM of the pulse peaking at sample `peak` of `env`, searched within
// [lo, hi): the outermost half-power crossings, linearly interpolated.
// Returns the width in samples.
double fwhm_samples(const std::vector<double>& env, std::size_t peak, std::size_t lo, std::size_t hi);

// Sub-sample peak position from a parabola through log-power at peak-1..peak+1.
double refine_peak(const std::vector<double>& env, std::size_t peak);

CalibrationOffset calibrate_reference(const PulseTrain& train, double reference_frequency);

// Fills mapped_frequency = band_origin + k (peak_time - time_offset) and the
// out-of-band flag. Uses a zero offset when the train carries no calibration.
PulseTrain map_time_to_frequency(const PulseTrain& train);

enum class NoiseStage { PostFilter, PreFilter };

struct AcquisitionOptions {
  NoiseSpec noise{};
  NoiseStage noise_stage = NoiseStage::PostFilter;
  std::optional<double> lowpass_cutoff;
  double threshold = kDefaultThreshold;
  std::optional<double> sample_rate;  // default: auto
};

// Sample rate used when none is given: 4 x the highest frequency in play
// (SUT, probe, filter band).
double auto_sample_rate(const SutSpec& sut, const SweepConfig& sweep, const FilterSpec& filter);

struct Acquisition {
  Waveform envelope;
  PulseTrain train;
  double sample_rate;
};

// End-to-end: synthesize, heterodyne, filter, add noise, photodetect, detect.
// Noise power is referenced to the RMS of the heterodyned field, so it does
// not depend on the filter.
Acquisition acquire(const SutSpec& sut, const SweepConfig& sweep, const FilterSpec& filter,
                    int n_periods, const AcquisitionOptions& options = {});

}  // namespace fttm
