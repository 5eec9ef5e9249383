#include "fttm/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <mutex>
#include <numbers>
#include <random>
#include <tuple>

#include "fttm/error.hpp"
#include "fttm/parallel.hpp"

namespace fttm {
namespace {

// Single-period records never exceed this many samples.
constexpr double kMaxRecordSamples = 2097152.0;
constexpr double kRecordWidths = 32.0;

struct Layout {
  SweepConfig sweep;
  double sample_rate;
  std::size_t samples;
};

double measured_3db(const FilterSpec& centered) {
  const double w = nominal_width(centered);
  return three_db_bandwidth(frequency_response(centered, {-4.0 * w, 4.0 * w, w / 4000.0}));
}

// Expected pulse width, used only to size the record.
double width_hint(const FilterSpec& centered, double k) {
  const double b = measured_3db(centered);
  return std::hypot(b / k, 1.0 / b);
}

// Filter at 0 Hz, sweep 0 -> kP; a tone at kP/2 crosses mid-period.
Layout layout_for(double hint, double k, double extra_time = 0.0) {
  double period = kRecordWidths * hint + extra_time;
  period = std::min(period, std::sqrt(kMaxRecordSamples / (kAutoSampleRateFactor * k)));
  SweepConfig sweep(0.0, k * period, period);
  const double fs = kAutoSampleRateFactor * sweep.f_stop();
  return Layout{sweep, fs, static_cast<std::size_t>(std::llround(period * fs))};
}

double golden_section(const std::function<double(double)>& f, double a, double b, double tol,
                      double& f_best) {
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double c = b - inv_phi * (b - a);
  double d = a + inv_phi * (b - a);
  double fc = f(c);
  double fd = f(d);
  while (b - a > tol) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - inv_phi * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + inv_phi * (b - a);
      fd = f(d);
    }
  }
  if (fc < fd) {
    f_best = fc;
    return c;
  }
  f_best = fd;
  return d;
}

bool unimodal(const std::vector<BandwidthSample>& s, std::size_t& imin) {
  imin = 0;
  for (std::size_t i = 1; i < s.size(); ++i)
    if (s[i].fwhm_time < s[imin].fwhm_time) imin = i;
  for (std::size_t i = 1; i <= imin; ++i)
    if (s[i].fwhm_time > s[i - 1].fwhm_time) return false;
  for (std::size_t i = imin + 1; i < s.size(); ++i)
    if (s[i].fwhm_time < s[i - 1].fwhm_time) return false;
  return imin > 0 && imin + 1 < s.size();
}

std::vector<double> two_tone_envelope(const FilterSpec& centered, const Layout& L, const FirKernel& kernel,
                                      const Waveform& probe, double separation) {
  const double mid = L.sweep.f_stop() / 2.0;
  std::vector<double> acc(L.samples, 0.0);
  for (int q = 0; q < 4; ++q) {
    const double phase = q * std::numbers::pi / 2.0;
    const SutSpec sut = sut::Tones{{{mid - separation / 2.0, 1.0, 0.0}, {mid + separation / 2.0, 1.0, phase}}};
    const Waveform s = synthesize_sut_samples(sut, L.sample_rate, 0.0, L.samples);
    const Waveform y = apply_kernel(heterodyne(s, probe, center_frequency(centered), L.sweep), kernel).waveform;
    for (std::size_t n = 0; n < acc.size(); ++n) acc[n] += std::norm(y[n]) / 4.0;
  }
  return acc;
}

bool dip_resolved(const std::vector<double>& e, double separation_samples, double dip_db) {
  const double m = *std::max_element(e.begin(), e.end());
  if (!(m > 0.0)) return false;
  std::vector<std::size_t> peaks;
  for (std::size_t i = 1; i + 1 < e.size(); ++i)
    if (e[i] >= e[i - 1] && e[i] > e[i + 1] && e[i] >= 0.5 * m) peaks.push_back(i);
  if (peaks.size() < 2) return false;
  const std::size_t a = *std::max_element(peaks.begin(), peaks.end(),
                                          [&](std::size_t x, std::size_t y) { return e[x] < e[y]; });
  // The partner peak must sit roughly where the second tone maps, not on a
  // ripple of the first pulse.
  std::optional<std::size_t> b;
  for (std::size_t p : peaks) {
    const double dist = std::abs(static_cast<double>(p) - static_cast<double>(a));
    if (dist > 0.4 * separation_samples && (!b || e[p] > e[*b])) b = p;
  }
  if (!b) return false;
  const auto [lo, hi] = std::minmax(a, *b);
  const double dip = *std::min_element(e.begin() + static_cast<long>(lo), e.begin() + static_cast<long>(hi) + 1);
  const double smaller = std::min(e[a], e[*b]);
  return 10.0 * std::log10(std::max(dip, 1e-300) / smaller) <= -dip_db;
}

}  // namespace

WidthModel predicted_widths(double bandwidth, double sweep_rate, CombineRule rule) {
  if (!(bandwidth > 0.0) || !std::isfinite(bandwidth)) throw ValidationError("bandwidth", "must be positive");
  if (!(sweep_rate > 0.0) || !std::isfinite(sweep_rate)) throw ValidationError("sweep_rate", "must be positive");
  WidthModel m{bandwidth / sweep_rate, 1.0 / bandwidth, 0.0, rule};
  m.combined = rule == CombineRule::Rss ? std::hypot(m.sigma1, m.sigma2) : std::max(m.sigma1, m.sigma2);
  return m;
}

double model_optimal_bandwidth(double sweep_rate) noexcept { return std::sqrt(sweep_rate); }

ResolutionReport simulate_pulse_width(const FilterSpec& filter, double sweep_rate) {
  validate(filter);
  if (!(sweep_rate > 0.0) || !std::isfinite(sweep_rate)) throw ValidationError("sweep_rate", "must be positive");
  const FilterSpec centered = with_center(filter, 0.0);
  const Layout L = layout_for(width_hint(centered, sweep_rate), sweep_rate);
  AcquisitionOptions opt;
  opt.sample_rate = L.sample_rate;
  const SutSpec tone = sut::Tones{{{L.sweep.f_stop() / 2.0}}};
  const Acquisition acq = acquire(tone, L.sweep, centered, 1, opt);
  if (acq.train.pulses.empty()) throw RuntimeError("pulse not detected");
  // One tone, one pulse: every lobe above half power belongs to it (a
  // brick-wall filter at low B^2/k rings into Fresnel lobes that the
  // detector would otherwise split), so the width spans the outermost
  // half-power crossings of the whole record.
  const auto env = acq.envelope.real_part();
  const auto peak = static_cast<std::size_t>(std::max_element(env.begin(), env.end()) - env.begin());
  const double fwhm = fwhm_samples(env, peak, 0, env.size()) / acq.sample_rate;
  return ResolutionReport{sweep_rate, filter, fwhm, sweep_rate * fwhm, std::nullopt};
}

double fit_natural_linewidth(double peak_gain, double sweep_rate, double target_fwhm) {
  static std::mutex m;
  static std::map<std::tuple<double, double, double>, double> cache;
  const auto key = std::make_tuple(peak_gain, sweep_rate, target_fwhm);
  {
    std::lock_guard<std::mutex> lock(m);
    if (auto it = cache.find(key); it != cache.end()) return it->second;
  }
  auto width = [&](double gamma) {
    return simulate_pulse_width(filter::BroadenedSbs{0.0, gamma, 0.0, peak_gain}, sweep_rate).fwhm_time;
  };
  double lo = 10e6;
  double hi = 40e6;
  // The width falls monotonically with the linewidth; widen the bracket
  // geometrically, then bisect in log space.
  while (width(lo) <= target_fwhm) {
    hi = lo;
    lo /= 2.0;
    if (lo < 1e5) throw RuntimeError("target pulse width not reachable: linewidth below 100 kHz");
  }
  while (width(hi) >= target_fwhm) {
    lo = hi;
    hi *= 2.0;
    if (hi > 1e10) throw RuntimeError("target pulse width not reachable: linewidth above 10 GHz");
  }
  while (hi / lo > 1.0 + 1e-3) {
    const double mid = std::sqrt(lo * hi);
    if (width(mid) > target_fwhm) lo = mid;
    else hi = mid;
  }
  const double gamma = std::sqrt(lo * hi);
  std::lock_guard<std::mutex> lock(m);
  cache[key] = gamma;
  return gamma;
}

FilterSpec make_filter(FilterFamily family, double bandwidth) {
  switch (family) {
    case FilterFamily::IdealBpf: return filter::IdealBpf{0.0, bandwidth};
    case FilterFamily::Lorentzian: return filter::Lorentzian{0.0, bandwidth};
  }
  throw ValidationError("filter.type", "unknown filter family");
}

std::vector<double> log_grid(double lo, double hi, int points) {
  if (!(lo > 0.0) || !(hi > lo) || points < 2) throw ValidationError("grid", "need 0 < lo < hi and >= 2 points");
  std::vector<double> g(static_cast<std::size_t>(points));
  const double step = std::log(hi / lo) / (points - 1);
  for (int i = 0; i < points; ++i) g[static_cast<std::size_t>(i)] = lo * std::exp(step * i);
  g.back() = hi;
  return g;
}

std::vector<BandwidthSample> width_scan(double sweep_rate, FilterFamily family,
                                        const std::vector<double>& bandwidths) {
  std::vector<BandwidthSample> out(bandwidths.size());
  parallel::for_each_index(bandwidths.size(), [&](std::size_t i) {
    out[i] = {bandwidths[i], simulate_pulse_width(make_filter(family, bandwidths[i]), sweep_rate).fwhm_time};
  });
  return out;
}

OptimalBandwidth optimal_bandwidth(double sweep_rate, FilterFamily family, std::optional<double> b_lo,
                                   std::optional<double> b_hi) {
  const double root = std::sqrt(sweep_rate);
  const double lo = b_lo.value_or(root / 10.0);
  const double hi = b_hi.value_or(root * 10.0);
  OptimalBandwidth result;
  result.samples = width_scan(sweep_rate, family, log_grid(lo, hi, 9));
  std::size_t imin = 0;
  if (unimodal(result.samples, imin)) {
    double w_best = 0.0;
    auto f = [&](double log_b) {
      return simulate_pulse_width(make_filter(family, std::exp(log_b)), sweep_rate).fwhm_time;
    };
    const double lb = golden_section(f, std::log(result.samples[imin - 1].bandwidth),
                                     std::log(result.samples[imin + 1].bandwidth), 1e-3, w_best);
    result.b_star = std::exp(lb);
    result.width_star = w_best;
    result.method = "golden-section";
    if (result.samples[imin].fwhm_time < w_best) {
      result.b_star = result.samples[imin].bandwidth;
      result.width_star = result.samples[imin].fwhm_time;
    }
    return result;
  }
  const auto fine = width_scan(sweep_rate, family, log_grid(lo, hi, 65));
  const auto best = std::min_element(fine.begin(), fine.end(), [](const auto& a, const auto& b) {
    return a.fwhm_time < b.fwhm_time;
  });
  result.b_star = best->bandwidth;
  result.width_star = best->fwhm_time;
  result.method = "grid-scan";
  return result;
}

bool two_tone_resolved(const FilterSpec& filter, double sweep_rate, double separation, double dip_db) {
  if (!(dip_db > 0.0)) throw ValidationError("dip_db", "must be positive");
  if (!(separation > 0.0)) return false;
  const FilterSpec centered = with_center(filter, 0.0);
  const Layout L = layout_for(width_hint(centered, sweep_rate), sweep_rate, 2.0 * separation / sweep_rate);
  if (separation >= 0.9 * L.sweep.span()) throw RuntimeError("tone separation exceeds the sweep span");
  const FirKernel kernel = design_kernel(centered, L.sample_rate, L.samples);
  const Waveform probe = probe_chirp_segment(L.sweep, L.sample_rate, 0.0, L.samples);
  const auto env = two_tone_envelope(centered, L, kernel, probe, separation);
  return dip_resolved(env, separation / sweep_rate * L.sample_rate, dip_db);
}

double two_tone_min_separation(const FilterSpec& filter, double sweep_rate, double dip_db) {
  const double w = simulate_pulse_width(filter, sweep_rate).fwhm_frequency;
  double hi = std::max(10.0 * w, 2e6);
  const double limit = 100.0 * w;
  while (!two_tone_resolved(filter, sweep_rate, hi, dip_db)) {
    hi *= 2.0;
    if (hi > limit) throw RuntimeError("filter cannot resolve any two-tone separation within the sweep span");
  }
  double lo = 0.0;
  while (hi - lo > 1e6) {
    const double mid = 0.5 * (lo + hi);
    if (two_tone_resolved(filter, sweep_rate, mid, dip_db)) hi = mid;
    else lo = mid;
  }
  return hi;
}

IntervalStats interval_measurement_error(double true_sep, const FilterSpec& filter, double sweep_rate,
                                         const NoiseSpec& noise, int trials, const IntervalSetup& setup) {
  validate(filter);
  if (trials < 1) throw ValidationError("trials", "must be >= 1");
  if (!(true_sep > 0.0)) throw ValidationError("true_sep", "must be positive");
  const SweepConfig sweep(setup.f_start, setup.f_start + sweep_rate * setup.period, setup.period);
  const double f1 = setup.first_tone;
  const double f2 = f1 + true_sep;
  if (f1 < sweep.f_start() || f2 > sweep.f_stop())
    throw ValidationError("true_sep", "both tones must lie inside the sweep span");
  const SutSpec nominal = sut::Tones{{{f1}, {f2}}};
  const double fs = auto_sample_rate(nominal, sweep, filter);
  const auto n = static_cast<std::size_t>(std::llround(setup.period * fs));
  const FirKernel kernel = design_kernel(filter, fs, n);
  const Waveform probe = probe_chirp_segment(sweep, fs, 0.0, n);
  const double fc = center_frequency(filter);

  std::vector<std::optional<double>> errs(static_cast<std::size_t>(trials));
  parallel::for_each_index(errs.size(), [&](std::size_t i) {
    const std::uint64_t seed = noise.seed + i;
    std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ULL);
    std::uniform_real_distribution<double> uni(0.0, 2.0 * std::numbers::pi);
    const double p1 = uni(rng);
    const double p2 = uni(rng);
    const SutSpec sut = sut::Tones{{{f1, 1.0, p1}, {f2, 1.0, p2}}};
    const NoiseSpec trial_noise{noise.enabled, noise.snr_db, seed};
    Waveform x = heterodyne(synthesize_sut_samples(sut, fs, 0.0, n), probe, fc, sweep);
    const double ref = x.rms();
    if (setup.noise_stage == NoiseStage::PreFilter) x = add_awgn_referenced(x, trial_noise, ref);
    Waveform y = apply_kernel(x, kernel).waveform;
    if (setup.noise_stage == NoiseStage::PostFilter) y = add_awgn_referenced(y, trial_noise, ref);
    const PulseTrain train = map_time_to_frequency(
        detect_pulses(photodetect(y, setup.lowpass_cutoff), sweep, setup.threshold));
    if (train.pulses.size() != 2) return;
    const double measured = *train.pulses[1].mapped_frequency - *train.pulses[0].mapped_frequency;
    errs[i] = measured - true_sep;
  });

  IntervalStats s;
  s.trials = trials;
  for (const auto& e : errs) {
    if (!e) {
      ++s.failures;
      continue;
    }
    s.errors.push_back(*e);
  }
  if (s.errors.empty()) return s;
  double sum = 0.0;
  for (double e : s.errors) {
    sum += e;
    s.max_abs_error = std::max(s.max_abs_error, std::abs(e));
  }
  s.mean_error = sum / static_cast<double>(s.errors.size());
  double var = 0.0;
  for (double e : s.errors) var += (e - s.mean_error) * (e - s.mean_error);
  s.stddev_error = std::sqrt(var / static_cast<double>(s.errors.size()));
  return s;
}

double calibrate_snr(double true_sep, const FilterSpec& filter, double sweep_rate, double target_max_error,
                     int trials, std::uint64_t seed, const IntervalSetup& setup) {
  auto score = [&](double snr) {
    const auto s = interval_measurement_error(true_sep, filter, sweep_rate, NoiseSpec{true, snr, seed}, trials, setup);
    return s.failures > 0 || s.errors.empty() ? std::numeric_limits<double>::infinity() : s.max_abs_error;
  };
  double lo = -10.0;
  double hi = 60.0;
  double s_hi = score(hi);
  if (s_hi > target_max_error) throw RuntimeError("interval error stays above target even at 60 dB SNR");
  double s_lo = score(lo);
  if (s_lo <= target_max_error) return lo;
  while (hi - lo > 0.05) {
    const double mid = 0.5 * (lo + hi);
    const double s = score(mid);
    if (s > target_max_error) {
      lo = mid;
      s_lo = s;
    } else {
      hi = mid;
      s_hi = s;
    }
  }
  // The max error jumps when a peak hops between lobes, so the bracket ends
  // can straddle the target by a wide margin; keep the closer one.
  return std::abs(s_lo - target_max_error) < std::abs(s_hi - target_max_error) ? lo : hi;
}

}  // namespace fttm
