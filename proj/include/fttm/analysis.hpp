#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "fttm/engine.hpp"
#include "fttm/filters.hpp"
#include "fttm/signal.hpp"

namespace fttm {

enum class CombineRule { Rss, Max };

struct WidthModel {
  double sigma1;  // passing width B/k
  double sigma2;  // broadening width 1/B
  double combined;
  CombineRule rule;
};

WidthModel predicted_widths(double bandwidth, double sweep_rate, CombineRule rule = CombineRule::Rss);

// Bandwidth minimizing the rss width: sigma1 = sigma2 at B = sqrt(k).
double model_optimal_bandwidth(double sweep_rate) noexcept;

struct ResolutionReport {
  double sweep_rate;
  FilterSpec filter;
  double fwhm_time;
  double fwhm_frequency;
  std::optional<double> two_tone_min_sep;
};

// Single tone through the full pipeline, noiseless. The filter is moved to
// 0 Hz and the tone placed mid-sweep; only k and the filter shape matter.
ResolutionReport simulate_pulse_width(const FilterSpec& filter, double sweep_rate);

// Natural SBS linewidth for which the zero-pump-sweep pulse at `sweep_rate`
// has FWHM `target_fwhm`. Memoized per argument set.
inline constexpr double kFitSweepRate = 4e15;
inline constexpr double kFitTargetFwhm = 60.3e-9;
double fit_natural_linewidth(double peak_gain = kDefaultSbsPeakGain, double sweep_rate = kFitSweepRate,
                             double target_fwhm = kFitTargetFwhm);

enum class FilterFamily { IdealBpf, Lorentzian };

// Filter of the given family with 3-dB width `bandwidth`, centered at 0.
FilterSpec make_filter(FilterFamily family, double bandwidth);

struct BandwidthSample {
  double bandwidth;
  double fwhm_time;
};

struct OptimalBandwidth {
  double b_star;
  double width_star;
  std::string method;  // "golden-section" or "grid-scan"
  std::vector<BandwidthSample> samples;  // coarse scan, ascending bandwidth
};

// Golden-section search over log-bandwidth on simulate_pulse_width. Falls back
// to a fine grid scan when the coarse scan is not unimodal. The default span
// is [sqrt(k)/10, 10 sqrt(k)].
OptimalBandwidth optimal_bandwidth(double sweep_rate, FilterFamily family,
                                   std::optional<double> b_lo = std::nullopt,
                                   std::optional<double> b_hi = std::nullopt);

// Log-spaced grid, both ends included.
std::vector<double> log_grid(double lo, double hi, int points);

// Widths over a bandwidth grid, evaluated in parallel.
std::vector<BandwidthSample> width_scan(double sweep_rate, FilterFamily family,
                                        const std::vector<double>& bandwidths);

inline constexpr double kDefaultDipDb = 3.0;

// Smallest separation (1 MHz precision) at which two equal tones give two
// peaks with a dip of at least dip_db below the smaller one. The envelope is
// averaged over four relative tone phases, which removes their beat.
double two_tone_min_separation(const FilterSpec& filter, double sweep_rate, double dip_db = kDefaultDipDb);

// Whether two tones `separation` apart are resolved (same criterion).
bool two_tone_resolved(const FilterSpec& filter, double sweep_rate, double separation,
                       double dip_db = kDefaultDipDb);

struct IntervalSetup {
  double f_start = 4.8e9;       // probe start
  double period = 1e-6;         // probe period; f_stop = f_start + k period
  double first_tone = 6e9;      // lower tone; the second sits true_sep above
  std::optional<double> lowpass_cutoff = 200e6;
  NoiseStage noise_stage = NoiseStage::PostFilter;
  double threshold = kDefaultThreshold;
};

struct IntervalStats {
  double max_abs_error = 0.0;  // Hz
  double mean_error = 0.0;
  double stddev_error = 0.0;   // population
  int trials = 0;
  int failures = 0;            // trials without exactly two pulses
  std::vector<double> errors;  // per successful trial, trial order
};

// Measures the two-tone interval from mapped pulse pairs over `trials`
// trials; trial i uses seed noise.seed + i for the noise and tone phases.
IntervalStats interval_measurement_error(double true_sep, const FilterSpec& filter, double sweep_rate,
                                         const NoiseSpec& noise, int trials,
                                         const IntervalSetup& setup = {});

// SNR at which the max interval error of `filter` is `target_max_error`
// (bisection in dB; trials with failures count as too noisy).
double calibrate_snr(double true_sep, const FilterSpec& filter, double sweep_rate, double target_max_error,
                     int trials, std::uint64_t seed, const IntervalSetup& setup = {});

}  // namespace fttm
