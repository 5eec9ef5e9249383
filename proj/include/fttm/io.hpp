#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "fttm/analysis.hpp"
#include "fttm/engine.hpp"
#include "fttm/filters.hpp"
#include "fttm/stft.hpp"
#include "fttm/waveform.hpp"

namespace fttm::io {

// Waveform file: "FTTM", u32 version, f64 sample_rate, f64 start_time,
// u64 count, then count interleaved (I, Q) f64 pairs. Little-endian.
inline constexpr std::uint32_t kFormatVersion = 1;

void write_waveform(const std::filesystem::path& path, const Waveform& w);
Waveform read_waveform(const std::filesystem::path& path);

// Shortest round-trip decimal, '.' separator regardless of locale.
std::string format_number(double v);

void write_frequency_response_csv(std::ostream& os, const FrequencyResponse& resp);
void write_pulses_csv(std::ostream& os, const PulseTrain& train);

struct WidthRow {
  double sweep_rate;
  double bandwidth;  // filter bandwidth, or pump sweep range for SBS filters
  double fwhm_time;
};
void write_width_surface_csv(std::ostream& os, const std::vector<WidthRow>& rows);

struct ResolutionRow {
  double sweep_rate;
  double pump_sweep;
  double min_separation;
};
void write_resolution_csv(std::ostream& os, const std::vector<ResolutionRow>& rows);

struct ErrorRow {
  double true_sep;
  double pump_sweep;
  double snr_db;  // NaN when noiseless
  IntervalStats stats;
};
void write_error_stats_csv(std::ostream& os, const std::vector<ErrorRow>& rows);

// Long form, row-major: one line per (time, frequency) cell.
void write_spectrogram_csv(std::ostream& os, const Spectrogram& spec);

// Waveform-style header (sample_rate = 1/period, start_time = first row
// time, count = rows), u64 cols, time axis, frequency axis, then the grid.
void write_spectrogram_binary(const std::filesystem::path& path, const Spectrogram& spec);
Spectrogram read_spectrogram_binary(const std::filesystem::path& path);

// Opens `path` for writing in binary mode (LF endings), creating parents.
std::ofstream open_output(const std::filesystem::path& path);

}  // namespace fttm::io
