#include <gtest/gtest.h>

#include <cmath>

#include "fttm/analysis.hpp"
#include "fttm/error.hpp"
#include "fttm/parallel.hpp"

using namespace fttm;

TEST(WidthModel, PaperWidthPairs) {
  auto m = predicted_widths(100e6, 1e16);
  EXPECT_DOUBLE_EQ(m.sigma1, 10e-9);
  EXPECT_DOUBLE_EQ(m.sigma2, 10e-9);
  EXPECT_DOUBLE_EQ(m.combined, std::sqrt(2.0) * 10e-9);
  m = predicted_widths(25e6, 1e16);
  EXPECT_DOUBLE_EQ(m.sigma1, 2.5e-9);
  EXPECT_DOUBLE_EQ(m.sigma2, 40e-9);
  m = predicted_widths(400e6, 1e16, CombineRule::Max);
  EXPECT_DOUBLE_EQ(m.sigma1, 40e-9);
  EXPECT_DOUBLE_EQ(m.sigma2, 2.5e-9);
  EXPECT_DOUBLE_EQ(m.combined, 40e-9);
  EXPECT_THROW(predicted_widths(0.0, 1e16), ValidationError);
}

TEST(WidthModel, ClosedFormOptimum) {
  EXPECT_DOUBLE_EQ(model_optimal_bandwidth(1e16), 100e6);
  EXPECT_NEAR(model_optimal_bandwidth(4e15), 64e6, 0.02 * 64e6);
  const double slow = model_optimal_bandwidth(1e9);
  EXPECT_NEAR(slow, 31.6e3, 0.1e3);
  // The rss width is stationary at sqrt(k).
  const double k = 3e15, b = model_optimal_bandwidth(k);
  EXPECT_LT(predicted_widths(b, k).combined, predicted_widths(1.01 * b, k).combined);
  EXPECT_LT(predicted_widths(b, k).combined, predicted_widths(0.99 * b, k).combined);
}

TEST(PulseWidth, NineNanosecondsAtTenGigahertzPerMicrosecond) {
  const auto r = simulate_pulse_width(filter::IdealBpf{0.0, 100e6}, 1e16);
  EXPECT_NEAR(r.fwhm_time, 9e-9, 0.25 * 9e-9);
  EXPECT_DOUBLE_EQ(r.fwhm_frequency, 1e16 * r.fwhm_time);
}

TEST(PulseWidth, IndependentOfFilterCenter) {
  const auto a = simulate_pulse_width(filter::Lorentzian{0.0, 30e6}, 2e15);
  const auto b = simulate_pulse_width(filter::Lorentzian{6e9, 30e6}, 2e15);
  EXPECT_EQ(a.fwhm_time, b.fwhm_time);
}

TEST(PulseWidth, SlowerSweepsDwellLonger) {
  // Fixed 100 MHz brick wall: the passing width B/k grows as k drops.
  const double w1 = simulate_pulse_width(filter::IdealBpf{0.0, 100e6}, 1e15).fwhm_time;
  const double w2 = simulate_pulse_width(filter::IdealBpf{0.0, 100e6}, 2e15).fwhm_time;
  const double w4 = simulate_pulse_width(filter::IdealBpf{0.0, 100e6}, 4e15).fwhm_time;
  EXPECT_GT(w1, w2);
  EXPECT_GT(w2, w4);
  EXPECT_NEAR(w1, 1e8 / 1e15, 0.4 * 1e8 / 1e15);
}

TEST(PulseWidth, FittedLinewidthReproducesUnbroadenedPulse) {
  const double gamma = fit_natural_linewidth();
  EXPECT_EQ(gamma, fit_natural_linewidth());  // memoized
  const double w0 = simulate_pulse_width(filter::BroadenedSbs{0.0, gamma, 0.0, kDefaultSbsPeakGain}, 4e15).fwhm_time;
  EXPECT_NEAR(w0, 60.3e-9, 0.01 * 60.3e-9);
  const double w90 =
      simulate_pulse_width(filter::BroadenedSbs{0.0, gamma, 90e6, kDefaultSbsPeakGain}, 4e15).fwhm_time;
  EXPECT_NEAR(w90, 12.6e-9, 0.3 * 12.6e-9);
}

TEST(Optimum, SimulatedIdealBpfAtTenGigahertzPerMicrosecond) {
  const auto o = optimal_bandwidth(1e16, FilterFamily::IdealBpf);
  EXPECT_GE(o.b_star, 50e6);
  EXPECT_LE(o.b_star, 200e6);
  EXPECT_EQ(o.method, "golden-section");
  EXPECT_EQ(o.samples.size(), 9u);
  for (const auto& s : o.samples) EXPECT_GE(s.fwhm_time, o.width_star * (1 - 1e-9));
}

TEST(Optimum, LogGrid) {
  const auto g = log_grid(1e6, 1e8, 5);
  ASSERT_EQ(g.size(), 5u);
  EXPECT_DOUBLE_EQ(g.front(), 1e6);
  EXPECT_DOUBLE_EQ(g.back(), 1e8);
  EXPECT_NEAR(g[2], 1e7, 1e-3);
  EXPECT_THROW(log_grid(1e8, 1e6, 5), ValidationError);
  EXPECT_THROW(log_grid(1e6, 1e8, 1), ValidationError);
}

TEST(Optimum, WidthScanMatchesPointwiseAndThreadCount) {
  const std::vector<double> bw{20e6, 60e6, 180e6};
  const int saved = parallel::max_threads();
  parallel::set_max_threads(1);
  const auto serial = width_scan(1e16, FilterFamily::Lorentzian, bw);
  parallel::set_max_threads(4);
  const auto par = width_scan(1e16, FilterFamily::Lorentzian, bw);
  parallel::set_max_threads(saved);
  for (std::size_t i = 0; i < bw.size(); ++i) {
    EXPECT_EQ(serial[i].fwhm_time, par[i].fwhm_time);
    EXPECT_EQ(serial[i].fwhm_time, simulate_pulse_width(make_filter(FilterFamily::Lorentzian, bw[i]), 1e16).fwhm_time);
  }
}

TEST(TwoTone, FarApartResolvedCoincidentNot) {
  const FilterSpec f = filter::Lorentzian{0.0, 30e6};
  const double k = 4e15;
  const double w = simulate_pulse_width(f, k).fwhm_frequency;
  EXPECT_TRUE(two_tone_resolved(f, k, 10 * w));
  EXPECT_FALSE(two_tone_resolved(f, k, 0.0));
  const double m = two_tone_min_separation(f, k);
  EXPECT_TRUE(two_tone_resolved(f, k, m));
  EXPECT_FALSE(two_tone_resolved(f, k, m - 2e6));
  // A deeper dip needs more separation.
  EXPECT_GT(two_tone_min_separation(f, k, 10.0), m);
  EXPECT_THROW(two_tone_resolved(f, k, 100e6, 0.0), ValidationError);
}

TEST(Interval, NoiselessSingleTrialHasZeroSpread) {
  const auto s = interval_measurement_error(500e6, filter::IdealBpf{6e9, 100e6}, 4e15, NoiseSpec{}, 1);
  EXPECT_EQ(s.trials, 1);
  EXPECT_EQ(s.failures, 0);
  ASSERT_EQ(s.errors.size(), 1u);
  EXPECT_EQ(s.stddev_error, 0.0);
  EXPECT_LT(s.max_abs_error, 2e6);
  EXPECT_EQ(s.mean_error, s.errors[0]);
}

TEST(Interval, StatisticsAreConsistentAndDeterministic) {
  const FilterSpec f = filter::BroadenedSbs{6e9, 26e6, 90e6, kDefaultSbsPeakGain};
  const NoiseSpec noise{true, 25.0, 42};
  const int saved = parallel::max_threads();
  parallel::set_max_threads(1);
  const auto a = interval_measurement_error(1e9, f, 4e15, noise, 12);
  parallel::set_max_threads(3);
  const auto b = interval_measurement_error(1e9, f, 4e15, noise, 12);
  parallel::set_max_threads(saved);
  EXPECT_EQ(a.errors, b.errors);
  ASSERT_EQ(a.errors.size() + static_cast<std::size_t>(a.failures), 12u);
  double mean = 0.0, mx = 0.0;
  for (double e : a.errors) {
    mean += e;
    mx = std::max(mx, std::abs(e));
  }
  mean /= static_cast<double>(a.errors.size());
  double var = 0.0;
  for (double e : a.errors) var += (e - mean) * (e - mean);
  EXPECT_NEAR(a.mean_error, mean, 1e-6);
  EXPECT_NEAR(a.stddev_error, std::sqrt(var / static_cast<double>(a.errors.size())), 1e-6);
  EXPECT_EQ(a.max_abs_error, mx);
}

TEST(Interval, Validation) {
  const FilterSpec f = filter::IdealBpf{6e9, 100e6};
  EXPECT_THROW(interval_measurement_error(5e9, f, 4e15, NoiseSpec{}, 1), ValidationError);
  EXPECT_THROW(interval_measurement_error(500e6, f, 4e15, NoiseSpec{}, 0), ValidationError);
  EXPECT_THROW(interval_measurement_error(-1.0, f, 4e15, NoiseSpec{}, 1), ValidationError);
}
