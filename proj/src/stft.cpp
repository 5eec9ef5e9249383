#include "fttm/stft.hpp"

#include <algorithm>
#include <cmath>

#include "fttm/error.hpp"
#include "fttm/parallel.hpp"

namespace fttm {
namespace {

// Envelope over [pP + delay, (p+1)P + delay), computed from a record that
// starts one period earlier so the filter carries realistic memory. `delay`
// is the filter's calibrated time offset: pulses of period p arrive late by
// that much, so the window follows them.
std::vector<double> period_envelope(const SutSpec& sut, const SweepConfig& sweep, const FilterSpec& filter,
                                    const FirKernel& kernel, double fs, std::size_t n_period, int p,
                                    double delay, const StftOptions& opt) {
  const auto shift = static_cast<long>(std::llround(delay * fs));
  const double t0 = (p - 1) * sweep.period() + static_cast<double>(shift) / fs;
  const std::size_t n = 2 * n_period;
  const Waveform s = synthesize_sut_samples(sut, fs, t0, n);
  const Waveform probe = probe_chirp_segment(sweep, fs, t0, n);
  const Waveform mixed = heterodyne(s, probe, center_frequency(filter), sweep);
  Waveform y = apply_kernel(mixed, kernel).waveform;
  if (opt.noise.enabled) {
    NoiseSpec noise = opt.noise;
    noise.seed += static_cast<std::uint64_t>(p);
    y = add_awgn_referenced(y, noise, mixed.rms());
  }
  const auto env = photodetect(y, opt.lowpass_cutoff).real_part();
  return std::vector<double>(env.begin() + static_cast<long>(n_period), env.end());
}

double interpolate(const std::vector<double>& v, double x) {
  if (x < 0.0 || x > static_cast<double>(v.size() - 1)) return 0.0;
  const auto i = static_cast<std::size_t>(std::floor(x));
  if (i + 1 >= v.size()) return v.back();
  const double f = x - static_cast<double>(i);
  return v[i] * (1.0 - f) + v[i + 1] * f;
}

}  // namespace

Spectrogram run_stft(const SutSpec& sut, const SweepConfig& sweep, const FilterSpec& filter, double duration,
                     std::size_t freq_bins, const StftOptions& options) {
  validate(sut);
  validate(filter);
  const double period = sweep.period();
  if (!(duration >= 2.0 * period * (1.0 - 1e-12)))
    throw ValidationError("duration", "must cover at least two sweep periods");
  if (freq_bins < kMinFreqBins) throw ValidationError("freq_bins", "must be >= 16");

  const double origin = sweep.band_origin();
  const double k = sweep.rate();
  const double fs = options.sample_rate.value_or(auto_sample_rate(sut, sweep, filter));
  const auto n_period = static_cast<std::size_t>(std::llround(period * fs));
  const FirKernel kernel = design_kernel(filter, fs, 2 * n_period);

  // Calibration: a clean tone at mid-band fixes the filter's time offset.
  const double f_ref = origin + sweep.span() / 2.0;
  const SutSpec ref = sut::Tones{{{f_ref}}};
  StftOptions clean = options;
  clean.noise.enabled = false;
  const auto ref_env = period_envelope(ref, sweep, filter, kernel, fs, n_period, 1, 0.0, clean);
  const PulseTrain ref_train = detect_pulses(make_real_waveform(fs, period, ref_env), sweep, kDefaultThreshold);
  const CalibrationOffset cal = calibrate_reference(ref_train, f_ref);
  const double delay = std::round(cal.time_offset * fs) / fs;

  Spectrogram out;
  out.sweep_rate = k;
  out.time_offset = cal.time_offset;
  const std::size_t rows = static_cast<std::size_t>(std::floor(duration / period + 1e-9));
  out.time_axis.resize(rows);
  for (std::size_t r = 0; r < rows; ++r) out.time_axis[r] = (static_cast<double>(r) + 0.5) * period;
  const double bin = sweep.span() / static_cast<double>(freq_bins);
  out.freq_axis.resize(freq_bins);
  for (std::size_t c = 0; c < freq_bins; ++c) out.freq_axis[c] = origin + (static_cast<double>(c) + 0.5) * bin;

  out.magnitudes.assign(rows * freq_bins, 0.0);
  parallel::for_each_index(rows, [&](std::size_t r) {
    const auto env =
        period_envelope(sut, sweep, filter, kernel, fs, n_period, static_cast<int>(r), delay, options);
    for (std::size_t c = 0; c < freq_bins; ++c) {
      const double tau = (out.freq_axis[c] - origin) / k + cal.time_offset - delay;
      out.magnitudes[r * freq_bins + c] = std::max(0.0, interpolate(env, tau * fs));
    }
  });
  const double peak = *std::max_element(out.magnitudes.begin(), out.magnitudes.end());
  if (peak > 0.0)
    for (auto& v : out.magnitudes) v /= peak;
  return out;
}

double ridge_width(const Spectrogram& spec, std::size_t row) {
  if (row >= spec.rows()) throw ValidationError("period_index", "row out of range");
  const double* v = spec.magnitudes.data() + row * spec.cols();
  const std::size_t n = spec.cols();
  const auto ipk = static_cast<std::size_t>(std::max_element(v, v + n) - v);
  if (!(v[ipk] > 0.0)) throw RuntimeError("no ridge in row " + std::to_string(row));
  const double half = v[ipk] / 2.0;
  std::size_t lo = ipk;
  while (lo > 0 && v[lo - 1] >= half) --lo;
  std::size_t hi = ipk;
  while (hi + 1 < n && v[hi + 1] >= half) ++hi;
  const double df = spec.bin_width();
  double f_lo = spec.freq_axis[lo];
  double f_hi = spec.freq_axis[hi];
  if (lo > 0) f_lo -= df * (v[lo] - half) / (v[lo] - v[lo - 1]);
  if (hi + 1 < n) f_hi += df * (v[hi] - half) / (v[hi] - v[hi + 1]);
  return f_hi - f_lo;
}

bool row_has_ridge(const Spectrogram& spec, std::size_t row, double min_level) {
  const auto first = spec.magnitudes.begin() + static_cast<long>(row * spec.cols());
  return *std::max_element(first, first + static_cast<long>(spec.cols())) >= min_level;
}

std::vector<std::optional<double>> ridge_track(const Spectrogram& spec, double min_level) {
  std::vector<std::optional<double>> track(spec.rows());
  const std::size_t n = spec.cols();
  for (std::size_t r = 0; r < spec.rows(); ++r) {
    if (!row_has_ridge(spec, r, min_level)) continue;
    const double* v = spec.magnitudes.data() + r * n;
    const auto c = static_cast<std::size_t>(std::max_element(v, v + n) - v);
    // A lobe cut by the band edge is a boundary pulse (it may belong to the
    // neighbouring period), so it carries no usable position.
    std::size_t lo = c;
    while (lo > 0 && v[lo - 1] >= v[c] / 2.0) --lo;
    std::size_t hi = c;
    while (hi + 1 < n && v[hi + 1] >= v[c] / 2.0) ++hi;
    if (lo == 0 || hi + 1 == n) continue;
    track[r] = spec.freq_axis[c];
  }
  return track;
}

LineFit fit_ridge_line(const Spectrogram& spec, double min_level) {
  const auto track = ridge_track(spec, min_level);
  double st = 0.0, sf = 0.0, stt = 0.0, stf = 0.0;
  std::size_t m = 0;
  for (std::size_t r = 0; r < track.size(); ++r) {
    if (!track[r]) continue;
    const double t = spec.time_axis[r];
    st += t;
    sf += *track[r];
    stt += t * t;
    stf += t * *track[r];
    ++m;
  }
  if (m < 2) throw RuntimeError("fewer than two ridge points");
  const double n = static_cast<double>(m);
  const double slope = (n * stf - st * sf) / (n * stt - st * st);
  return LineFit{slope, (sf - slope * st) / n, m};
}

}  // namespace fttm
