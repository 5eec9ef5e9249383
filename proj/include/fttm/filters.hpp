#pragma once

#include <cstddef>
#include <variant>
#include <vector>

#include "fttm/waveform.hpp"

namespace fttm {

namespace filter {

// Brick-wall bandpass, zero phase.
struct IdealBpf {
  double center;
  double bandwidth;
};

// Complex single-pole line H = 1 / (1 + 2j(f - center)/fwhm); |H|^2 has its
// half-power points at center +/- fwhm/2.
struct Lorentzian {
  double center;
  double natural_fwhm;
};

// SBS gain line broadened by a linearly swept pump.
//
// The gain coefficient is the complex Lorentzian line averaged over a uniform
// pump-frequency distribution of width `pump_sweep_range` (peak-normalized).
// With `peak_gain` = 0 the response is that averaged line itself; otherwise it
// is exp(peak_gain * line) - 1, the probe-sideband response of a
// small-signal SBS amplifier whose peak amplitude gain is exp(peak_gain).
struct BroadenedSbs {
  double center;
  double natural_fwhm;
  double pump_sweep_range;
  double peak_gain = 0.0;  // nepers; 0 selects the linear-line model
};

}  // namespace filter

using FilterSpec = std::variant<filter::IdealBpf, filter::Lorentzian, filter::BroadenedSbs>;

// Amplitude gain (nepers) used by the SBS presets and the analysis defaults.
inline constexpr double kDefaultSbsPeakGain = 5.0;

void validate(const FilterSpec& spec);
double center_frequency(const FilterSpec& spec);
FilterSpec with_center(const FilterSpec& spec, double center);

// Nominal width used for grid sizing and representability checks; the exact
// 3-dB width comes from three_db_bandwidth().
double nominal_width(const FilterSpec& spec);

// Complex gain at absolute frequency f, peak magnitude 1.
Complex response_at(const FilterSpec& spec, double f);

struct FrequencyGrid {
  double f_lo;
  double f_hi;
  double step;
};

class FrequencyResponse {
 public:
  FrequencyResponse(double f0, double step, std::vector<Complex> gain);

  double f0() const noexcept { return f0_; }
  double step() const noexcept { return step_; }
  std::size_t size() const noexcept { return gain_.size(); }
  double frequency(std::size_t i) const noexcept { return f0_ + static_cast<double>(i) * step_; }
  const std::vector<Complex>& gain() const noexcept { return gain_; }

 private:
  double f0_;
  double step_;
  std::vector<Complex> gain_;
};

// Samples the response on a uniform grid. The grid must cover at least six
// nominal widths around the center.
FrequencyResponse frequency_response(const FilterSpec& spec, const FrequencyGrid& grid);

// Width between the outermost half-power crossings, linearly interpolated.
double three_db_bandwidth(const FrequencyResponse& resp);

// Contiguous span around the peak where |H| stays within `tol_db` of the peak.
double flat_span(const FrequencyResponse& resp, double tol_db = 1.0);

// A response is flagged flat-top when its 1-dB span covers at least this
// fraction of its 3-dB width (a Lorentzian covers ~0.51).
inline constexpr double kFlatTopRatio = 0.75;
bool is_flat_top(const FrequencyResponse& resp);

// Finite impulse response sampled at `sample_rate`. taps[center] is t = 0,
// taps[center + m] is t = m / sample_rate.
struct FirKernel {
  std::vector<Complex> taps;
  std::size_t center = 0;
  double sample_rate = 0.0;

  std::size_t length() const noexcept { return taps.size(); }
  std::size_t causal_extent() const noexcept { return taps.size() - center - 1; }
  std::size_t anticausal_extent() const noexcept { return center; }
};

// Designs the kernel for a record of `input_length` samples: the impulse
// response is obtained on a fine frequency grid, truncated to its 99.9% energy
// window (never longer than the record can use) and scaled so its peak gain
// does not exceed 1.
FirKernel design_kernel(const FilterSpec& spec, double sample_rate, std::size_t input_length);

struct FilterOutput {
  Waveform waveform;
  // Samples [settled_begin, settled_end) are free of record-edge transients.
  std::size_t settled_begin = 0;
  std::size_t settled_end = 0;
};

// LTI filtering, overlap-save fast path. Output has the input's length and
// time axis.
FilterOutput apply_filter(const Waveform& w, const FilterSpec& spec);

// Same kernel, direct time-domain convolution.
FilterOutput apply_filter_direct(const Waveform& w, const FilterSpec& spec);

// Overlap-save with a kernel designed beforehand (it must match the
// waveform's sample rate). Lets repeated runs share one design.
FilterOutput apply_kernel(const Waveform& w, const FirKernel& kernel);

}  // namespace fttm
