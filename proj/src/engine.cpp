#include "fttm/engine.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "fttm/error.hpp"
#include "fttm/fft.hpp"

namespace fttm {
namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

struct Candidate {
  std::size_t index;  // within the period segment
  double value;
};

// Lowest sample strictly between a and b (a < b).
std::size_t valley(const std::vector<double>& env, std::size_t a, std::size_t b) {
  std::size_t best = a;
  for (std::size_t i = a; i <= b; ++i)
    if (env[i] < env[best]) best = i;
  return best;
}

// Basin of `peak` given the other accepted peaks: bounded by the valleys
// towards its nearest accepted neighbours.
std::pair<std::size_t, std::size_t> basin(const std::vector<double>& env, std::size_t peak,
                                          const std::vector<std::size_t>& others) {
  std::size_t lo = 0;
  std::size_t hi = env.size();
  for (std::size_t o : others) {
    if (o < peak) lo = std::max(lo, valley(env, o, peak));
    if (o > peak) hi = std::min(hi, valley(env, peak, o) + 1);
  }
  return {lo, hi};
}

void detect_in_period(const std::vector<double>& seg, int period_index, double offset_samples,
                      double fs, double period, double threshold, std::vector<DetectedPulse>& out) {
  if (seg.size() < 3) return;
  const double peak_value = *std::max_element(seg.begin(), seg.end());
  if (!(peak_value > 0.0)) return;
  const double floor_value = threshold * peak_value;

  std::vector<Candidate> cands;
  const std::size_t n = seg.size();
  for (std::size_t i = 0; i < n; ++i) {
    const bool left_ok = i == 0 || seg[i] >= seg[i - 1];
    const bool right_ok = i + 1 == n || seg[i] > seg[i + 1];
    if (left_ok && right_ok && seg[i] >= floor_value) cands.push_back({i, seg[i]});
  }
  std::stable_sort(cands.begin(), cands.end(),
                   [](const Candidate& a, const Candidate& b) { return a.value > b.value; });

  // A weaker candidate is a pulse of its own only if the envelope falls below
  // half of the weaker peak somewhere between it and every accepted pulse;
  // otherwise it is a ripple on an accepted pulse.
  std::vector<std::size_t> accepted;
  for (const auto& c : cands) {
    bool separate = true;
    for (std::size_t a : accepted) {
      const auto [lo, hi] = std::minmax(a, c.index);
      const double dip = seg[valley(seg, lo, hi)];
      if (dip >= 0.5 * std::min(seg[a], c.value)) separate = false;
    }
    if (separate) accepted.push_back(c.index);
  }

  std::vector<DetectedPulse> local;
  for (std::size_t a = 0; a < accepted.size(); ++a) {
    std::vector<std::size_t> others;
    for (std::size_t b = 0; b < accepted.size(); ++b)
      if (b != a) others.push_back(accepted[b]);
    const auto [lo, hi] = basin(seg, accepted[a], others);
    DetectedPulse p;
    p.period_index = period_index;
    p.fwhm = fwhm_samples(seg, accepted[a], lo, hi) / fs;
    p.peak_time = std::clamp((offset_samples + refine_peak(seg, accepted[a])) / fs, 0.0, std::nextafter(period, 0.0));
    p.peak_amplitude = seg[accepted[a]];
    p.boundary_flag = p.peak_time < p.fwhm || period - p.peak_time < p.fwhm;
    local.push_back(p);
  }
  std::sort(local.begin(), local.end(),
            [](const DetectedPulse& a, const DetectedPulse& b) { return a.peak_time < b.peak_time; });
  out.insert(out.end(), local.begin(), local.end());
}

}  // namespace

Waveform heterodyne(const Waveform& sut, const Waveform& probe, double filter_center,
                    double origin_shift) {
  if (sut.size() != probe.size()) throw ValidationError("probe", "length mismatch with SUT");
  if (sut.sample_rate() != probe.sample_rate())
    throw ValidationError("probe", "sample rate mismatch with SUT");
  const double shift = filter_center + origin_shift;
  std::vector<Complex> out(sut.size());
  for (std::size_t n = 0; n < out.size(); ++n) {
    const double cycles = shift * sut.time_at(n);
    const Complex lo = std::polar(1.0, kTwoPi * (cycles - std::floor(cycles)));
    out[n] = sut[n] * std::conj(probe[n]) * lo;
  }
  return Waveform(sut.sample_rate(), sut.start_time(), std::move(out));
}

Waveform heterodyne(const Waveform& sut, const Waveform& probe, double filter_center,
                    const SweepConfig& sweep) {
  return heterodyne(sut, probe, filter_center, sweep.origin_shift());
}

Waveform photodetect(const Waveform& w, std::optional<double> lowpass_cutoff) {
  std::vector<Complex> p(w.size());
  for (std::size_t n = 0; n < p.size(); ++n) p[n] = std::norm(w[n]);
  if (lowpass_cutoff) {
    const double fc = *lowpass_cutoff;
    if (!(fc > 0.0) || !std::isfinite(fc)) throw ValidationError("lowpass_cutoff", "must be positive");
    if (fc >= w.sample_rate() / 2.0) throw ValidationError("lowpass_cutoff", "cutoff must be below Nyquist");
    fft::forward(p);
    const std::size_t n = p.size();
    for (std::size_t i = 0; i < n; ++i) {
      const double r = fft::bin_frequency(i, n, w.sample_rate()) / fc;
      p[i] /= std::sqrt(1.0 + std::pow(r, 8)) * static_cast<double>(n);
    }
    fft::inverse(p);
    for (auto& v : p) v = v.real();
  }
  return Waveform(w.sample_rate(), w.start_time(), std::move(p));
}

double fwhm_samples(const std::vector<double>& env, std::size_t peak, std::size_t lo, std::size_t hi) {
  const double half = env[peak] / 2.0;
  std::size_t l = lo;
  while (l < peak && env[l] < half) ++l;
  std::size_t r = hi - 1;
  while (r > peak && env[r] < half) --r;
  double left = static_cast<double>(l);
  double right = static_cast<double>(r);
  if (l > lo) left -= (env[l] - half) / (env[l] - env[l - 1]);
  if (r + 1 < hi) right += (env[r] - half) / (env[r] - env[r + 1]);
  return std::max(right - left, 1.0);
}

double refine_peak(const std::vector<double>& env, std::size_t peak) {
  const double x = static_cast<double>(peak);
  if (peak == 0 || peak + 1 >= env.size()) return x;
  if (!(env[peak - 1] > 0.0) || !(env[peak + 1] > 0.0)) return x;
  const double a = std::log(env[peak - 1]);
  const double b = std::log(env[peak]);
  const double c = std::log(env[peak + 1]);
  const double den = a - 2.0 * b + c;
  if (!(den < 0.0)) return x;
  return x + std::clamp(0.5 * (a - c) / den, -0.5, 0.5);
}

PulseTrain detect_pulses(const Waveform& envelope, const SweepConfig& sweep, double threshold_frac) {
  if (!(threshold_frac > 0.0 && threshold_frac < 1.0))
    throw ValidationError("threshold", "must lie in (0, 1)");
  const double fs = envelope.sample_rate();
  const double period = sweep.period();
  if (envelope.duration() < period - 1.0 / fs)
    throw ValidationError("duration", "envelope shorter than one sweep period");

  const auto env = envelope.real_part();
  const auto [mn, mx] = std::minmax_element(env.begin(), env.end());
  if (*mx > 0.0 && *mx - *mn <= 1e-12 * *mx)
    throw RuntimeError("degenerate flat envelope: no pulse structure to detect");

  PulseTrain train{sweep, {}, std::nullopt};
  if (!(*mx > 0.0)) return train;

  // Period p holds samples with absolute time in [p P, (p + 1) P).
  const double t0 = envelope.start_time();
  const double t_end = envelope.time_at(env.size() - 1);
  const int p_first = static_cast<int>(std::floor(t0 / period + 1e-9));
  const int p_last = static_cast<int>(std::floor(t_end / period + 1e-9));
  for (int p = p_first; p <= p_last; ++p) {
    const double ps = p * period;
    const double i_begin = std::max(0.0, std::ceil((ps - t0) * fs - 1e-6));
    const double i_end = std::min(static_cast<double>(env.size()), std::ceil((ps + period - t0) * fs - 1e-6));
    if (i_end - i_begin < 3) continue;
    const auto b = static_cast<std::size_t>(i_begin);
    const auto e = static_cast<std::size_t>(i_end);
    std::vector<double> seg(env.begin() + static_cast<long>(b), env.begin() + static_cast<long>(e));
    // Offset, in samples, of seg[0] from the period start.
    const double offset = (t0 - ps) * fs + static_cast<double>(b);
    detect_in_period(seg, p, offset, fs, period, threshold_frac, train.pulses);
  }
  return train;
}

CalibrationOffset calibrate_reference(const PulseTrain& train, double reference_frequency) {
  const double k = train.sweep.rate();
  const double period = train.sweep.period();
  const double expected = (reference_frequency - train.sweep.band_origin()) / k;
  double sum = 0.0;
  int count = 0;
  std::size_t i = 0;
  while (i < train.pulses.size()) {
    const int p = train.pulses[i].period_index;
    const DetectedPulse* best = nullptr;
    for (; i < train.pulses.size() && train.pulses[i].period_index == p; ++i) {
      const auto& c = train.pulses[i];
      if (!best || std::abs(c.peak_time - expected) < std::abs(best->peak_time - expected)) best = &c;
    }
    if (best && std::abs(best->peak_time - expected) < period / 2.0) {
      sum += best->peak_time - expected;
      ++count;
    }
  }
  if (count == 0)
    throw RuntimeError("no reference pulse within half a period of its expected position");
  return CalibrationOffset{sum / count, reference_frequency};
}

PulseTrain map_time_to_frequency(const PulseTrain& train) {
  PulseTrain out = train;
  const double offset = train.calibration ? train.calibration->time_offset : 0.0;
  const double k = train.sweep.rate();
  const double f0 = train.sweep.band_origin();
  const double f1 = f0 + train.sweep.span();
  for (auto& p : out.pulses) {
    const double f = f0 + k * (p.peak_time - offset);
    p.mapped_frequency = f;
    p.out_of_band = f < f0 || f > f1;
  }
  return out;
}

double auto_sample_rate(const SutSpec& sut, const SweepConfig& sweep, const FilterSpec& filter) {
  const double fc = std::abs(center_frequency(filter));
  const double f_max = std::max({max_frequency(sut), sweep.f_stop(), fc + sweep.span(),
                                 fc + nominal_width(filter)});
  return kAutoSampleRateFactor * f_max;
}

Acquisition acquire(const SutSpec& sut, const SweepConfig& sweep, const FilterSpec& filter,
                    int n_periods, const AcquisitionOptions& options) {
  validate(sut);
  validate(filter);
  if (n_periods < 1) throw ValidationError("duration", "must cover at least one sweep period");
  const double fs = options.sample_rate.value_or(auto_sample_rate(sut, sweep, filter));
  const auto n = static_cast<std::size_t>(std::llround(n_periods * sweep.period() * fs));
  const Waveform s = synthesize_sut_samples(sut, fs, 0.0, n);
  const Waveform probe = probe_chirp_segment(sweep, fs, 0.0, n);
  Waveform mixed = heterodyne(s, probe, center_frequency(filter), sweep);
  const double ref_rms = mixed.rms();
  if (options.noise.enabled && options.noise_stage == NoiseStage::PreFilter)
    mixed = add_awgn_referenced(mixed, options.noise, ref_rms);
  Waveform field = apply_filter(mixed, filter).waveform;
  if (options.noise.enabled && options.noise_stage == NoiseStage::PostFilter)
    field = add_awgn_referenced(field, options.noise, ref_rms);
  Waveform env = photodetect(field, options.lowpass_cutoff);
  PulseTrain train = detect_pulses(env, sweep, options.threshold);
  return Acquisition{std::move(env), std::move(train), fs};
}

}  // namespace fttm
