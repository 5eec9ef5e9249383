#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "fttm/error.hpp"
#include "fttm/fft.hpp"
#include "fttm/filters.hpp"
#include "fttm/kernels.hpp"

using namespace fttm;

namespace {

constexpr double kFs = 1e9;

double rel_l2(std::span<const Complex> a, std::span<const Complex> b) {
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    num += std::norm(a[i] - b[i]);
    den += std::norm(b[i]);
  }
  return std::sqrt(num / den);
}

Waveform noise_input(std::mt19937_64& rng, std::size_t n, double fs = kFs) {
  std::normal_distribution<double> g;
  std::vector<Complex> x(n);
  for (auto& v : x) v = {g(rng), g(rng)};
  return Waveform(fs, 0.0, std::move(x));
}

// Random representable spec at kFs.
FilterSpec random_spec(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const double c = (u(rng) - 0.5) * 0.5 * kFs;
  const double w = kFs * (0.005 + 0.1 * u(rng));
  switch (rng() % 4) {
    case 0: return filter::IdealBpf{c, w};
    case 1: return filter::Lorentzian{c, w};
    case 2: return filter::BroadenedSbs{c, 0.3 * w, w, 0.0};
    default: return filter::BroadenedSbs{c, 0.3 * w, w * u(rng), 5.0 * u(rng)};
  }
}

// Peak gain on a 64x oversampled grid.
double fine_peak_gain(const FirKernel& k) {
  const auto r = fft::forward_copy(k.taps, fft::next_pow2(64 * k.taps.size()));
  double p = 0.0;
  for (const auto& v : r) p = std::max(p, std::abs(v));
  return p;
}

FrequencyResponse around(const FilterSpec& f, double half, std::size_t n = 20001) {
  const double c = center_frequency(f);
  return frequency_response(f, {c - half, c + half, 2 * half / static_cast<double>(n - 1)});
}

}  // namespace

TEST(Response, IdealBpfBrickWall) {
  FilterSpec f = filter::IdealBpf{6e9, 100e6};
  EXPECT_EQ(std::abs(response_at(f, 5.949e9)), 0.0);
  EXPECT_EQ(std::abs(response_at(f, 6.0e9)), 1.0);
  EXPECT_EQ(std::abs(response_at(f, 6.049e9)), 1.0);
  EXPECT_EQ(std::arg(response_at(f, 6.01e9)), 0.0);
}

TEST(Response, LorentzianHalfPower) {
  const double g = 20e6;
  FilterSpec f = filter::Lorentzian{6e9, g};
  EXPECT_DOUBLE_EQ(std::norm(response_at(f, 6e9 + g / 2)), 0.5);
  EXPECT_DOUBLE_EQ(std::norm(response_at(f, 6e9 - g / 2)), 0.5);
  EXPECT_DOUBLE_EQ(std::abs(response_at(f, 6e9)), 1.0);
}

TEST(Response, UnbroadenedLinearSbsIsLorentzian) {
  FilterSpec sbs = filter::BroadenedSbs{6e9, 20e6, 0.0, 0.0};
  FilterSpec lor = filter::Lorentzian{6e9, 20e6};
  for (double d = -200e6; d <= 200e6; d += 0.37e6)
    EXPECT_LT(std::abs(response_at(sbs, 6e9 + d) - response_at(lor, 6e9 + d)), 1e-10) << d;
  // A vanishing pump sweep converges on the same line.
  FilterSpec tiny = filter::BroadenedSbs{6e9, 20e6, 1e-3, 0.0};
  for (double d = -100e6; d <= 100e6; d += 3.1e6)
    EXPECT_LT(std::abs(response_at(tiny, 6e9 + d) - response_at(lor, 6e9 + d)), 1e-8) << d;
}

TEST(Response, UnbroadenedLinearSbsKernelMatchesLorentzian) {
  auto a = design_kernel(filter::BroadenedSbs{50e6, 20e6, 0.0, 0.0}, kFs, 4096);
  auto b = design_kernel(filter::Lorentzian{50e6, 20e6}, kFs, 4096);
  ASSERT_EQ(a.taps.size(), b.taps.size());
  ASSERT_EQ(a.center, b.center);
  EXPECT_LT(rel_l2(a.taps, b.taps), 1e-10);
}

TEST(Response, BroadenedLineAgreesWithNumericalAverage) {
  // Closed form vs. a midpoint-rule average of the shifted Lorentzian.
  const double g = 26e6, r = 90e6;
  FilterSpec f = filter::BroadenedSbs{0.0, g, r, 0.0};
  auto avg = [&](double d) {
    Complex s{};
    const int n = 20000;
    for (int i = 0; i < n; ++i) {
      const double p = -r / 2 + r * (i + 0.5) / n;
      s += 1.0 / Complex{1.0, 2.0 * (d - p) / g};
    }
    return s / static_cast<double>(n);
  };
  const Complex c0 = avg(0.0);
  for (double d : {-150e6, -60e6, -10e6, 0.0, 25e6, 45e6, 80e6}) {
    const Complex line = avg(d) / c0;
    const Complex h = response_at(f, d);
    EXPECT_NEAR(std::abs(h), std::sqrt(std::max(line.real(), 0.0)), 1e-6) << d;
    EXPECT_NEAR(std::arg(h), std::arg(line), 1e-6) << d;
  }
}

TEST(Response, GainModelPeakAndMonotoneSkirts) {
  FilterSpec f = filter::BroadenedSbs{0.0, 26e6, 60e6, 5.0};
  EXPECT_NEAR(std::abs(response_at(f, 0.0)), 1.0, 1e-12);
  double prev = 1.0;
  for (double d = 0.0; d < 300e6; d += 5e6) {
    const double m = std::abs(response_at(f, d));
    EXPECT_LE(m, prev + 1e-12);
    prev = m;
  }
}

TEST(Bandwidth, DefinitionalWidths) {
  const auto lor = around(filter::Lorentzian{6e9, 20e6}, 200e6);
  EXPECT_NEAR(three_db_bandwidth(lor), 20e6, lor.step());
  const auto bpf = around(filter::IdealBpf{6e9, 100e6}, 400e6);
  EXPECT_NEAR(three_db_bandwidth(bpf), 100e6, bpf.step());
}

TEST(Bandwidth, GridMustCoverTheFilter) {
  FilterSpec f = filter::Lorentzian{6e9, 20e6};
  EXPECT_THROW(frequency_response(f, {5.99e9, 6.01e9, 1e5}), ValidationError);
  // Half-power crossings outside the grid.
  FrequencyResponse flat(0.0, 1.0, std::vector<Complex>(11, Complex{1.0, 0.0}));
  EXPECT_THROW(three_db_bandwidth(flat), RuntimeError);
}

TEST(Bandwidth, IncreasesWithPumpSweep) {
  for (double gain : {0.0, 5.0}) {
    double prev = 0.0;
    for (int i = 0; i <= 7; ++i) {
      FilterSpec f = filter::BroadenedSbs{6e9, 20e6, 30e6 * i, gain};
      const double w = three_db_bandwidth(around(f, 4.0 * nominal_width(f)));
      EXPECT_GT(w, prev) << "gain " << gain << " sweep " << 30 * i;
      prev = w;
    }
  }
}

TEST(Bandwidth, FlatTopAtWidePumpSweep) {
  FilterSpec f = filter::BroadenedSbs{6e9, 20e6, 210e6, 0.0};
  const auto r = around(f, 4.0 * nominal_width(f));
  EXPECT_GE(flat_span(r), 150e6);
  EXPECT_TRUE(is_flat_top(r));
  EXPECT_FALSE(is_flat_top(around(filter::Lorentzian{6e9, 20e6}, 200e6)));
}

TEST(Kernel, RepresentabilityChecked) {
  EXPECT_THROW(design_kernel(filter::IdealBpf{0.49 * kFs, 0.05 * kFs}, kFs, 1024), ValidationError);
  EXPECT_NO_THROW(design_kernel(filter::IdealBpf{0.4 * kFs, 0.05 * kFs}, kFs, 1024));
}

TEST(Kernel, LorentzianIsCausal) {
  auto k = design_kernel(filter::Lorentzian{0.0, 20e6}, kFs, 4096);
  double before = 0.0, after = 0.0;
  for (std::size_t i = 0; i < k.taps.size(); ++i) (i < k.center ? before : after) += std::norm(k.taps[i]);
  EXPECT_GT(after, 100.0 * before);
}

TEST(Kernel, ImpulseThroughBrickWallIsSinc) {
  const double b = 50e6;  // first zero at 1/B = 20 samples
  const std::size_t n = 4096, at = 2048;
  std::vector<Complex> x(n);
  x[at] = 1.0;
  auto y = apply_filter(Waveform(kFs, 0.0, x), filter::IdealBpf{100e6, b}).waveform;
  std::size_t first_zero = 0;
  for (std::size_t m = 1; m < 40; ++m)
    if (std::abs(y[at + m]) < std::abs(y[at + m - 1]) && std::abs(y[at + m]) < std::abs(y[at + m + 1])) {
      first_zero = m;
      break;
    }
  EXPECT_NEAR(static_cast<double>(first_zero), kFs / b, 1.0);
  // Carrier at the filter center.
  const double f = std::arg(y[at + 1] * std::conj(y[at])) * kFs / (2 * std::numbers::pi);
  EXPECT_NEAR(f, 100e6, 1e6);
}

TEST(Oracle, FastPathMatchesDirectConvolution) {
  std::mt19937_64 rng(20240611);
  double worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 16 + rng() % 4081;
    const auto spec = random_spec(rng);
    const auto x = noise_input(rng, n);
    const auto fast = apply_filter(x, spec).waveform;
    const auto slow = apply_filter_direct(x, spec).waveform;
    ASSERT_EQ(fast.size(), n);
    const double e = rel_l2(fast.samples(), slow.samples());
    worst = std::max(worst, e);
    EXPECT_LT(e, 1e-8) << "trial " << trial << " n " << n;
  }
  RecordProperty("worst_rel_l2", std::to_string(worst));
}

TEST(Oracle, ParallelOverlapSaveMatchesSerial) {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 20; ++trial) {
    const auto x = noise_input(rng, 1000 + rng() % 200000);
    const auto k = design_kernel(random_spec(rng), kFs, 512);
    const auto a = kernels::overlap_save(x.samples(), k);
    const auto b = kernels::overlap_save_serial(x.samples(), k);
    ASSERT_EQ(a.size(), b.size());
    EXPECT_LT(rel_l2(a, b), 1e-13);
  }
}

TEST(Properties, Passivity) {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 64 + rng() % 4033;
    const auto spec = random_spec(rng);
    const auto k = design_kernel(spec, kFs, n);
    EXPECT_LE(fine_peak_gain(k), 1.0 + 1e-9) << trial;

    const auto x = noise_input(rng, n);
    const auto y = apply_filter(x, spec).waveform;
    EXPECT_LE(y.energy(), x.energy() * (1.0 + 1e-9)) << trial;

    // Worst case: a tone parked at the filter's strongest frequency.
    const auto r = fft::forward_copy(k.taps, fft::next_pow2(64 * k.taps.size()));
    const auto ipk = static_cast<std::size_t>(
        std::max_element(r.begin(), r.end(), [](auto a, auto b) { return std::abs(a) < std::abs(b); }) -
        r.begin());
    const double f = fft::bin_frequency(ipk, r.size(), kFs);
    std::vector<Complex> tone(n);
    for (std::size_t i = 0; i < n; ++i) tone[i] = std::polar(1.0, 2 * std::numbers::pi * f * i / kFs);
    const Waveform xt(kFs, 0.0, tone);
    EXPECT_LE(apply_filter(xt, spec).waveform.energy(), xt.energy() * (1.0 + 1e-9)) << trial;
  }
}

TEST(Properties, ShiftInvariance) {
  std::mt19937_64 rng(5);
  int checked = 0;
  for (int trial = 0; trial < 40; ++trial) {
    const std::size_t n = 2048, shift = 1 + rng() % 300;
    const auto spec = random_spec(rng);
    auto x = noise_input(rng, n);
    std::vector<Complex> xs(n);
    for (std::size_t i = shift; i < n; ++i) xs[i] = x[i - shift];
    const auto y = apply_filter(x, spec);
    const auto ys = apply_filter(Waveform(kFs, 0.0, xs), spec).waveform;
    // Exact for outputs whose anticausal reach stays inside the shifted record.
    const std::size_t reach = design_kernel(spec, kFs, n).anticausal_extent();
    if (n <= reach + shift + 16) continue;
    const std::size_t end = n - reach;
    ++checked;
    double num = 0.0, den = 0.0;
    for (std::size_t i = shift; i < end; ++i) {
      num += std::norm(ys[i] - y.waveform[i - shift]);
      den += std::norm(y.waveform[i - shift]);
    }
    EXPECT_LT(std::sqrt(num / den), 1e-10) << trial << " shift " << shift << " settled " << y.settled_begin << ".." << end;
  }
  EXPECT_GE(checked, 10);
}

TEST(Properties, Linearity) {
  std::mt19937_64 rng(9);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t n = 1500;
    const auto spec = random_spec(rng);
    const auto x1 = noise_input(rng, n), x2 = noise_input(rng, n);
    const Complex a{0.7, -1.3}, b{-2.0, 0.4};
    std::vector<Complex> mix(n), expect(n);
    const auto y1 = apply_filter(x1, spec).waveform, y2 = apply_filter(x2, spec).waveform;
    for (std::size_t i = 0; i < n; ++i) {
      mix[i] = a * x1[i] + b * x2[i];
      expect[i] = a * y1[i] + b * y2[i];
    }
    const auto y = apply_filter(Waveform(kFs, 0.0, mix), spec).waveform;
    EXPECT_LT(rel_l2(y.samples(), expect), 1e-12) << trial;
  }
}

TEST(Properties, SettledRangeReported) {
  const auto k = design_kernel(filter::Lorentzian{0.0, 20e6}, kFs, 4096);
  const auto out = apply_filter(Waveform(kFs, 0.0, std::vector<Complex>(4096, 1.0)), filter::Lorentzian{0.0, 20e6});
  EXPECT_EQ(out.settled_begin, k.causal_extent());
  EXPECT_EQ(out.settled_end, 4096 - k.anticausal_extent());
}
