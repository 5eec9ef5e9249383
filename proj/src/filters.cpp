#include "fttm/filters.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "fttm/error.hpp"
#include "fttm/fft.hpp"
#include "fttm/kernels.hpp"

namespace fttm {
namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

constexpr double kEnergyFraction = 0.999;
constexpr std::size_t kMaxDesignSize = std::size_t{1} << 23;

Complex lorentz_line(double detuning, double fwhm) {
  return 1.0 / Complex{1.0, 2.0 * detuning / fwhm};
}

// Complex Lorentzian line averaged over a uniform pump distribution of width
// `range`, normalized to 1 at zero detuning (where it is real).
//   int dx / (1 + jx) = atan(x) - (j/2) ln(1 + x^2)
Complex broadened_line(double detuning, double fwhm, double range) {
  if (range == 0.0) return lorentz_line(detuning, fwhm);
  const double x1 = 2.0 * (detuning + range / 2.0) / fwhm;
  const double x2 = 2.0 * (detuning - range / 2.0) / fwhm;
  const double dx = 2.0 * range / fwhm;  // x1 - x2 without cancellation
  const double re = std::atan2(dx, 1.0 + x1 * x2);
  const double im = -0.5 * std::log1p(dx * (4.0 * detuning / fwhm) / (1.0 + x2 * x2));
  const double peak = 2.0 * std::atan(range / fwhm);
  return Complex{re, im} / peak;
}

Complex broadened_response(const filter::BroadenedSbs& s, double f) {
  const double d = f - s.center;
  const Complex line = broadened_line(d, s.natural_fwhm, s.pump_sweep_range);
  if (s.peak_gain == 0.0) {
    // |H|^2 follows the broadened gain profile; phase from the complex line.
    const double profile = std::max(line.real(), 0.0);
    return std::polar(std::sqrt(profile), std::arg(line));
  }
  const double g = s.peak_gain;
  return (std::exp(g * line) - 1.0) / std::expm1(g);
}

// |sum_n taps[n] e^{-j 2 pi nu n}|, nu in cycles per sample.
double dtft_magnitude(const std::vector<Complex>& taps, double nu) {
  Complex acc{};
  const Complex step = std::polar(1.0, -2.0 * std::numbers::pi * nu);
  Complex w{1.0, 0.0};
  for (std::size_t n = 0; n < taps.size(); ++n) {
    acc += taps[n] * w;
    w *= step;
    if ((n & 255) == 255) w = std::polar(1.0, -2.0 * std::numbers::pi * nu * static_cast<double>(n + 1));
  }
  return std::abs(acc);
}

// Peak gain of a tap set: a 4x oversampled FFT grid, with the strongest
// local maxima refined by golden-section search on the exact transform.
double peak_gain(const std::vector<Complex>& taps) {
  const std::size_t m = std::max(fft::next_pow2(4 * taps.size()), std::size_t{16});
  const auto resp = fft::forward_copy(taps, m);
  std::vector<double> mag(m);
  for (std::size_t i = 0; i < m; ++i) mag[i] = std::abs(resp[i]);
  const double grid_peak = *std::max_element(mag.begin(), mag.end());
  std::vector<std::size_t> cand;
  for (std::size_t i = 0; i < m; ++i) {
    const double l = mag[(i + m - 1) % m], r = mag[(i + 1) % m];
    if (mag[i] >= l && mag[i] >= r && mag[i] >= 0.99 * grid_peak) cand.push_back(i);
  }
  std::sort(cand.begin(), cand.end(), [&](auto a, auto b) { return mag[a] > mag[b]; });
  if (cand.size() > 32) cand.resize(32);
  double peak = grid_peak;
  const double h = 1.0 / static_cast<double>(m);
  constexpr double kInvPhi = 0.6180339887498949;
  for (std::size_t i : cand) {
    double a = (static_cast<double>(i) - 1.0) * h, b = (static_cast<double>(i) + 1.0) * h;
    double c = b - kInvPhi * (b - a), d = a + kInvPhi * (b - a);
    double fc = dtft_magnitude(taps, c), fd = dtft_magnitude(taps, d);
    while (b - a > 1e-6 * h) {
      if (fc > fd) {
        b = d; d = c; fd = fc;
        c = b - kInvPhi * (b - a);
        fc = dtft_magnitude(taps, c);
      } else {
        a = c; c = d; fc = fd;
        d = a + kInvPhi * (b - a);
        fd = dtft_magnitude(taps, d);
      }
    }
    peak = std::max({peak, fc, fd});
  }
  return peak;
}

void check_positive(double v, const char* field) {
  if (!std::isfinite(v) || !(v > 0.0)) throw ValidationError(field, "must be positive");
}

}  // namespace

void validate(const FilterSpec& spec) {
  std::visit(overloaded{
                 [](const filter::IdealBpf& s) {
                   if (!std::isfinite(s.center)) throw ValidationError("filter.center", "must be finite");
                   check_positive(s.bandwidth, "filter.bandwidth");
                 },
                 [](const filter::Lorentzian& s) {
                   if (!std::isfinite(s.center)) throw ValidationError("filter.center", "must be finite");
                   check_positive(s.natural_fwhm, "filter.natural_fwhm");
                 },
                 [](const filter::BroadenedSbs& s) {
                   if (!std::isfinite(s.center)) throw ValidationError("filter.center", "must be finite");
                   check_positive(s.natural_fwhm, "filter.natural_fwhm");
                   if (!std::isfinite(s.pump_sweep_range) || s.pump_sweep_range < 0.0)
                     throw ValidationError("filter.pump_sweep_range", "must be >= 0");
                   if (!std::isfinite(s.peak_gain) || s.peak_gain < 0.0)
                     throw ValidationError("filter.peak_gain", "must be >= 0");
                 },
             },
             spec);
}

double center_frequency(const FilterSpec& spec) {
  return std::visit([](const auto& s) { return s.center; }, spec);
}

FilterSpec with_center(const FilterSpec& spec, double center) {
  return std::visit(
      [center](auto s) -> FilterSpec {
        s.center = center;
        return s;
      },
      spec);
}

double nominal_width(const FilterSpec& spec) {
  return std::visit(overloaded{
                        [](const filter::IdealBpf& s) { return s.bandwidth; },
                        [](const filter::Lorentzian& s) { return s.natural_fwhm; },
                        [](const filter::BroadenedSbs& s) { return s.pump_sweep_range + s.natural_fwhm; },
                    },
                    spec);
}

Complex response_at(const FilterSpec& spec, double f) {
  return std::visit(overloaded{
                        [f](const filter::IdealBpf& s) {
                          return std::abs(f - s.center) <= s.bandwidth / 2.0 ? Complex{1.0, 0.0}
                                                                             : Complex{0.0, 0.0};
                        },
                        [f](const filter::Lorentzian& s) { return lorentz_line(f - s.center, s.natural_fwhm); },
                        [f](const filter::BroadenedSbs& s) { return broadened_response(s, f); },
                    },
                    spec);
}

FrequencyResponse::FrequencyResponse(double f0, double step, std::vector<Complex> gain)
    : f0_(f0), step_(step), gain_(std::move(gain)) {
  if (!(step_ > 0.0)) throw ValidationError("grid.step", "must be positive");
  if (gain_.size() < 3) throw ValidationError("grid", "needs at least three points");
}

FrequencyResponse frequency_response(const FilterSpec& spec, const FrequencyGrid& grid) {
  validate(spec);
  if (!(grid.step > 0.0) || !std::isfinite(grid.step))
    throw ValidationError("grid.step", "must be positive");
  const double c = center_frequency(spec);
  const double w = nominal_width(spec);
  if (grid.f_lo > c - 3.0 * w || grid.f_hi < c + 3.0 * w)
    throw ValidationError("grid", "grid too narrow: must span 6 x filter width around center");
  const auto n = static_cast<std::size_t>(std::floor((grid.f_hi - grid.f_lo) / grid.step + 1e-9)) + 1;
  std::vector<Complex> g(n);
  double peak = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    g[i] = response_at(spec, grid.f_lo + static_cast<double>(i) * grid.step);
    peak = std::max(peak, std::abs(g[i]));
  }
  if (peak > 0.0)
    for (auto& v : g) v /= peak;
  return FrequencyResponse(grid.f_lo, grid.step, std::move(g));
}

double three_db_bandwidth(const FrequencyResponse& resp) {
  const auto& g = resp.gain();
  std::vector<double> p(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) p[i] = std::norm(g[i]);
  const double half = *std::max_element(p.begin(), p.end()) / 2.0;
  std::size_t lo = 0;
  while (lo < p.size() && p[lo] < half) ++lo;
  std::size_t hi = p.size() - 1;
  while (hi > 0 && p[hi] < half) --hi;
  if (lo == 0 || hi == p.size() - 1)
    throw RuntimeError("no half-power crossing within grid (grid too narrow)");
  const double f_lo = resp.frequency(lo - 1) + resp.step() * (half - p[lo - 1]) / (p[lo] - p[lo - 1]);
  const double f_hi = resp.frequency(hi) + resp.step() * (p[hi] - half) / (p[hi] - p[hi + 1]);
  return f_hi - f_lo;
}

double flat_span(const FrequencyResponse& resp, double tol_db) {
  const auto& g = resp.gain();
  std::vector<double> db(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) db[i] = 20.0 * std::log10(std::max(std::abs(g[i]), 1e-300));
  const auto ipk = static_cast<std::size_t>(std::max_element(db.begin(), db.end()) - db.begin());
  const double floor_db = db[ipk] - tol_db;
  std::size_t lo = ipk;
  while (lo > 0 && db[lo - 1] >= floor_db) --lo;
  std::size_t hi = ipk;
  while (hi + 1 < db.size() && db[hi + 1] >= floor_db) ++hi;
  double f_lo = resp.frequency(lo);
  double f_hi = resp.frequency(hi);
  if (lo > 0) f_lo -= resp.step() * (db[lo] - floor_db) / (db[lo] - db[lo - 1]);
  if (hi + 1 < db.size()) f_hi += resp.step() * (db[hi] - floor_db) / (db[hi] - db[hi + 1]);
  return f_hi - f_lo;
}

bool is_flat_top(const FrequencyResponse& resp) {
  return flat_span(resp, 1.0) >= kFlatTopRatio * three_db_bandwidth(resp);
}

FirKernel design_kernel(const FilterSpec& spec, double sample_rate, std::size_t input_length) {
  validate(spec);
  if (input_length == 0) throw ValidationError("input", "empty input");
  const double nyquist = sample_rate / 2.0;
  const double c = center_frequency(spec);
  const double half_band = nominal_width(spec) / 2.0;
  if (c - half_band <= -nyquist || c + half_band >= nyquist)
    throw ValidationError("filter.center", "band outside representable range at sample rate " +
                                               std::to_string(sample_rate) + " Hz");

  const std::size_t max_extent = input_length - 1;  // longer taps never reach an output sample
  std::size_t nd = fft::next_pow2(std::clamp<std::size_t>(2 * input_length, 1024, 65536));
  long m_lo = 0;
  long m_hi = 0;
  std::vector<Complex> h;
  for (;;) {
    std::vector<Complex> spectrum(nd);
    for (std::size_t i = 0; i < nd; ++i) spectrum[i] = response_at(spec, fft::bin_frequency(i, nd, sample_rate));
    h = fft::inverse_normalized(spectrum);

    // Reorder circular taps to times m in [-nd/2, nd/2) and trim the
    // weaker end until 0.1% of the energy is gone.
    const long half = static_cast<long>(nd / 2);
    auto tap = [&](long m) -> const Complex& { return h[static_cast<std::size_t>((m + static_cast<long>(nd)) % static_cast<long>(nd))]; };
    double total = 0.0;
    for (const auto& v : h) total += std::norm(v);
    double removed = 0.0;
    const double budget = (1.0 - kEnergyFraction) * total;
    m_lo = -half;
    m_hi = half - 1;
    while (m_lo < m_hi) {
      const double el = std::norm(tap(m_lo));
      const double eh = std::norm(tap(m_hi));
      const double e = std::min(el, eh);
      if (removed + e > budget) break;
      removed += e;
      if (el <= eh) ++m_lo;
      else --m_hi;
    }
    const bool settled = std::max(-m_lo, m_hi) < half / 2;
    if (settled || nd >= 4 * input_length || nd >= kMaxDesignSize) {
      m_lo = std::max(m_lo, -static_cast<long>(max_extent));
      m_hi = std::min(m_hi, static_cast<long>(max_extent));
      FirKernel k;
      k.sample_rate = sample_rate;
      k.center = static_cast<std::size_t>(-m_lo);
      k.taps.reserve(static_cast<std::size_t>(m_hi - m_lo + 1));
      for (long m = m_lo; m <= m_hi; ++m) k.taps.push_back(tap(m));

      // Truncation ripple can push the peak gain above 1; scale it back so
      // the filter stays passive.
      const double peak = peak_gain(k.taps);
      if (peak > 1.0)
        for (auto& v : k.taps) v /= peak;
      return k;
    }
    nd *= 2;
  }
}

namespace {

FilterOutput finish(const Waveform& w, const FirKernel& k, std::vector<Complex> y) {
  FilterOutput out{Waveform(w.sample_rate(), w.start_time(), std::move(y)), 0, 0};
  const std::size_t n = w.size();
  out.settled_begin = std::min(k.causal_extent(), n);
  out.settled_end = n > k.anticausal_extent() ? n - k.anticausal_extent() : 0;
  if (out.settled_end < out.settled_begin) out.settled_end = out.settled_begin;
  return out;
}

}  // namespace

FilterOutput apply_filter(const Waveform& w, const FilterSpec& spec) {
  const FirKernel k = design_kernel(spec, w.sample_rate(), w.size());
  return finish(w, k, kernels::overlap_save(w.samples(), k));
}

FilterOutput apply_kernel(const Waveform& w, const FirKernel& kernel) {
  if (kernel.sample_rate != w.sample_rate())
    throw ValidationError("sample_rate", "kernel designed for a different sample rate");
  return finish(w, kernel, kernels::overlap_save(w.samples(), kernel));
}

FilterOutput apply_filter_direct(const Waveform& w, const FilterSpec& spec) {
  const FirKernel k = design_kernel(spec, w.sample_rate(), w.size());
  return finish(w, k, kernels::direct_convolution(w.samples(), k));
}

}  // namespace fttm
