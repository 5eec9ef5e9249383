#include "fttm/signal.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <string>

#include "fttm/error.hpp"

namespace fttm {
namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

Complex unit_phasor(double cycles) {
  const double frac = cycles - std::floor(cycles);
  return std::polar(1.0, kTwoPi * frac);
}

void check_frequency(double f, const std::string& field) {
  if (!std::isfinite(f) || f < 0.0) throw ValidationError(field, "frequency must be finite and >= 0");
}

void check_positive(double v, const std::string& field) {
  if (!std::isfinite(v) || !(v > 0.0)) throw ValidationError(field, "must be positive");
}

void check_dwells(const std::vector<Dwell>& dwells, const std::string& field) {
  if (dwells.empty()) throw ValidationError(field, "list must not be empty");
  for (std::size_t i = 0; i < dwells.size(); ++i) {
    const auto idx = field + "[" + std::to_string(i) + "]";
    check_frequency(dwells[i].frequency, idx + ".frequency");
    check_positive(dwells[i].dwell, idx + ".dwell");
  }
}

void check_alias(double sample_rate, double f_max) {
  if (!(sample_rate > 0.0) || !std::isfinite(sample_rate))
    throw ValidationError("sample_rate", "must be positive and finite");
  if (sample_rate < kMinSampleRateFactor * f_max)
    throw ValidationError("sample_rate", "sample rate too low: " + std::to_string(sample_rate) +
                                             " Hz < 2.5 x " + std::to_string(f_max) + " Hz");
}

// Locates the dwell active at t; returns its index and start time, or -1.
std::pair<long, double> find_dwell(const std::vector<Dwell>& dwells, double t) {
  if (t < 0.0) return {-1, 0.0};
  double start = 0.0;
  for (std::size_t i = 0; i < dwells.size(); ++i) {
    if (t < start + dwells[i].dwell) return {static_cast<long>(i), start};
    start += dwells[i].dwell;
  }
  return {-1, 0.0};
}

Complex sample_at(const SutSpec& spec, double t) {
  return std::visit(
      overloaded{
          [t](const sut::Tones& s) {
            Complex acc{0.0, 0.0};
            for (const auto& tone : s.tones) acc += tone.amplitude * unit_phasor(tone.frequency * t + tone.phase / kTwoPi);
            return acc;
          },
          [t](const sut::Lfm& s) {
            if (t < 0.0 || t >= s.duration) return Complex{0.0, 0.0};
            const double r = (s.f1 - s.f0) / s.duration;
            return unit_phasor(s.f0 * t + 0.5 * r * t * t);
          },
          [t](const sut::DualChirpLfm& s) {
            if (t < 0.0 || t >= s.duration) return Complex{0.0, 0.0};
            const double r = (s.f1 - s.f0) / s.duration;
            return unit_phasor(s.f0 * t + 0.5 * r * t * t) + unit_phasor(s.f1 * t - 0.5 * r * t * t);
          },
          [t](const sut::StepFrequency& s) {
            auto [idx, start] = find_dwell(s.steps, t);
            if (idx < 0) return Complex{0.0, 0.0};
            double cycles = 0.0;
            for (long i = 0; i < idx; ++i) cycles += s.steps[i].frequency * s.steps[i].dwell;
            return unit_phasor(cycles + s.steps[idx].frequency * (t - start));
          },
          [t](const sut::FrequencyHopping& s) {
            auto [idx, start] = find_dwell(s.hops, t);
            if (idx < 0) return Complex{0.0, 0.0};
            return unit_phasor(s.hops[idx].frequency * (t - start));
          },
      },
      spec);
}

}  // namespace

SweepConfig::SweepConfig(double f_start, double f_stop, double period,
                         std::optional<double> band_origin)
    : f_start_(f_start), f_stop_(f_stop), period_(period), band_origin_(band_origin) {
  if (!std::isfinite(f_start) || !std::isfinite(f_stop) || !(f_stop > f_start))
    throw ValidationError("sweep.f_stop", "f_stop must exceed f_start");
  check_positive(period, "sweep.period");
  if (band_origin && !std::isfinite(*band_origin))
    throw ValidationError("sweep.band_origin", "must be finite");
}

void validate(const SutSpec& spec) {
  std::visit(overloaded{
                 [](const sut::Tones& s) {
                   if (s.tones.empty()) throw ValidationError("sut.tones", "tone list must not be empty");
                   for (std::size_t i = 0; i < s.tones.size(); ++i) {
                     const auto idx = "sut.tones[" + std::to_string(i) + "]";
                     check_frequency(s.tones[i].frequency, idx + ".frequency");
                     check_positive(s.tones[i].amplitude, idx + ".amplitude");
                   }
                 },
                 [](const sut::Lfm& s) {
                   check_frequency(s.f0, "sut.f0");
                   check_frequency(s.f1, "sut.f1");
                   check_positive(s.duration, "sut.duration");
                 },
                 [](const sut::DualChirpLfm& s) {
                   check_frequency(s.f0, "sut.f0");
                   check_frequency(s.f1, "sut.f1");
                   check_positive(s.duration, "sut.duration");
                 },
                 [](const sut::StepFrequency& s) { check_dwells(s.steps, "sut.steps"); },
                 [](const sut::FrequencyHopping& s) { check_dwells(s.hops, "sut.hops"); },
             },
             spec);
}

double max_frequency(const SutSpec& spec) {
  return std::visit(overloaded{
                        [](const sut::Tones& s) {
                          double m = 0.0;
                          for (const auto& t : s.tones) m = std::max(m, t.frequency);
                          return m;
                        },
                        [](const sut::Lfm& s) { return std::max(s.f0, s.f1); },
                        [](const sut::DualChirpLfm& s) { return std::max(s.f0, s.f1); },
                        [](const sut::StepFrequency& s) {
                          double m = 0.0;
                          for (const auto& d : s.steps) m = std::max(m, d.frequency);
                          return m;
                        },
                        [](const sut::FrequencyHopping& s) {
                          double m = 0.0;
                          for (const auto& d : s.hops) m = std::max(m, d.frequency);
                          return m;
                        },
                    },
                    spec);
}

std::vector<double> instantaneous_frequencies(const SutSpec& spec, double t) {
  return std::visit(
      overloaded{
          [](const sut::Tones& s) {
            std::vector<double> f;
            for (const auto& tone : s.tones) f.push_back(tone.frequency);
            return f;
          },
          [t](const sut::Lfm& s) {
            if (t < 0.0 || t >= s.duration) return std::vector<double>{};
            return std::vector<double>{s.f0 + (s.f1 - s.f0) * t / s.duration};
          },
          [t](const sut::DualChirpLfm& s) {
            if (t < 0.0 || t >= s.duration) return std::vector<double>{};
            const double d = (s.f1 - s.f0) * t / s.duration;
            return std::vector<double>{s.f0 + d, s.f1 - d};
          },
          [t](const sut::StepFrequency& s) {
            auto [idx, start] = find_dwell(s.steps, t);
            if (idx < 0) return std::vector<double>{};
            return std::vector<double>{s.steps[idx].frequency};
          },
          [t](const sut::FrequencyHopping& s) {
            auto [idx, start] = find_dwell(s.hops, t);
            if (idx < 0) return std::vector<double>{};
            return std::vector<double>{s.hops[idx].frequency};
          },
      },
      spec);
}

Waveform synthesize_sut_samples(const SutSpec& spec, double sample_rate, double start_time,
                                std::size_t n_samples) {
  validate(spec);
  check_alias(sample_rate, max_frequency(spec));
  if (n_samples == 0) throw ValidationError("duration", "must cover at least one sample");
  std::vector<Complex> s(n_samples);
  for (std::size_t n = 0; n < n_samples; ++n)
    s[n] = sample_at(spec, start_time + static_cast<double>(n) / sample_rate);
  return Waveform(sample_rate, start_time, std::move(s));
}

Waveform synthesize_sut(const SutSpec& spec, double sample_rate, double duration,
                        double start_time) {
  check_positive(duration, "duration");
  const auto n = static_cast<std::size_t>(std::llround(duration * sample_rate));
  return synthesize_sut_samples(spec, sample_rate, start_time, n);
}

Waveform probe_chirp_segment(const SweepConfig& cfg, double sample_rate, double start_time,
                             std::size_t n_samples) {
  check_alias(sample_rate, cfg.f_stop());
  if (n_samples == 0) throw ValidationError("n_samples", "must be positive");
  const double period = cfg.period();
  const double k = cfg.rate();
  std::vector<Complex> s(n_samples);
  for (std::size_t n = 0; n < n_samples; ++n) {
    const double t = start_time + static_cast<double>(n) / sample_rate;
    const double tau = t - std::floor(t / period) * period;
    s[n] = unit_phasor(cfg.f_start() * tau + 0.5 * k * tau * tau);
  }
  return Waveform(sample_rate, start_time, std::move(s));
}

Waveform synthesize_probe_chirp(const SweepConfig& cfg, int n_periods, double sample_rate) {
  if (n_periods < 1) throw ValidationError("n_periods", "must be >= 1");
  const auto n = static_cast<std::size_t>(
      std::llround(static_cast<double>(n_periods) * cfg.period() * sample_rate));
  return probe_chirp_segment(cfg, sample_rate, 0.0, n);
}

Waveform add_awgn_referenced(const Waveform& w, const NoiseSpec& noise, double reference_rms) {
  if (!noise.enabled) return w;
  if (!std::isfinite(noise.snr_db)) throw ValidationError("noise.snr_db", "must be finite");
  const double noise_power = reference_rms * reference_rms * std::pow(10.0, -noise.snr_db / 10.0);
  const double sigma = std::sqrt(noise_power / 2.0);
  std::mt19937_64 rng(noise.seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::vector<Complex> out(w.samples().begin(), w.samples().end());
  for (auto& v : out) {
    const double re = gauss(rng);
    const double im = gauss(rng);
    v += Complex{sigma * re, sigma * im};
  }
  return Waveform(w.sample_rate(), w.start_time(), std::move(out));
}

Waveform add_awgn(const Waveform& w, const NoiseSpec& noise) {
  return add_awgn_referenced(w, noise, w.rms());
}

}  // namespace fttm
