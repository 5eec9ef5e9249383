#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "fttm/engine.hpp"
#include "fttm/filters.hpp"
#include "fttm/signal.hpp"

namespace fttm {

// Time-frequency grid, one row per sweep period.
struct Spectrogram {
  std::vector<double> time_axis;   // s, period midpoints
  std::vector<double> freq_axis;   // Hz, bin centers across the swept band
  std::vector<double> magnitudes;  // row-major, rows x cols, globally normalized to max 1
  double sweep_rate = 0.0;
  double time_offset = 0.0;        // calibration applied to the mapping

  std::size_t rows() const noexcept { return time_axis.size(); }
  std::size_t cols() const noexcept { return freq_axis.size(); }
  double at(std::size_t r, std::size_t c) const noexcept { return magnitudes[r * cols() + c]; }
  double bin_width() const noexcept { return freq_axis.size() > 1 ? freq_axis[1] - freq_axis[0] : 0.0; }
};

struct StftOptions {
  std::optional<double> sample_rate;  // default: auto
  std::optional<double> lowpass_cutoff;
  NoiseSpec noise{};
};

inline constexpr std::size_t kMinFreqBins = 16;

// Each period is processed with the preceding period as a guard, so filter
// memory is realistic; the photodetected envelope is mapped onto the
// frequency bins through a calibration tone at mid-band.
Spectrogram run_stft(const SutSpec& sut, const SweepConfig& sweep, const FilterSpec& filter, double duration,
                     std::size_t freq_bins, const StftOptions& options = {});

// FWHM (Hz) of the main lobe around the row maximum.
double ridge_width(const Spectrogram& spec, std::size_t row);

// Rows whose maximum reaches `min_level` of the global maximum.
bool row_has_ridge(const Spectrogram& spec, std::size_t row, double min_level = 0.1);

// Frequency of the row maximum, or nullopt when the row has no ridge or its
// main lobe is cut by an edge of the band.
std::vector<std::optional<double>> ridge_track(const Spectrogram& spec, double min_level = 0.1);

struct LineFit {
  double slope;
  double intercept;
  std::size_t points;
};

// Least-squares line through the ridge track against the time axis.
LineFit fit_ridge_line(const Spectrogram& spec, double min_level = 0.1);

}  // namespace fttm
