#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "fttm/error.hpp"
#include "fttm/fft.hpp"
#include "fttm/signal.hpp"

using namespace fttm;

namespace {

std::vector<double> dft_magnitudes(const Waveform& w) {
  auto spec = fft::forward_copy(w.samples(), w.size());
  std::vector<double> mag(spec.size());
  for (std::size_t i = 0; i < spec.size(); ++i) mag[i] = std::abs(spec[i]);
  return mag;
}

std::size_t argmax(const std::vector<double>& v) {
  return static_cast<std::size_t>(std::max_element(v.begin(), v.end()) - v.begin());
}

// Instantaneous frequency from the phase step between neighbouring samples.
double inst_freq(const Waveform& w, std::size_t n) {
  return std::arg(w[n + 1] * std::conj(w[n])) * w.sample_rate() / (2.0 * std::numbers::pi);
}

}  // namespace

TEST(Sweep, RateFromEndpoints) {
  EXPECT_DOUBLE_EQ(SweepConfig(4.8e9, 8.8e9, 1e-6).rate(), 4e15);
  EXPECT_DOUBLE_EQ(SweepConfig(4.8e9, 5.8e9, 1e-6).rate(), 1e15);
  EXPECT_THROW(SweepConfig(5e9, 4e9, 1e-6), ValidationError);
  EXPECT_THROW(SweepConfig(4e9, 5e9, 0.0), ValidationError);
}

TEST(Sweep, BandOriginDefaultsToStart) {
  SweepConfig a(4.8e9, 8.8e9, 1e-6);
  EXPECT_DOUBLE_EQ(a.band_origin(), 4.8e9);
  EXPECT_DOUBLE_EQ(a.origin_shift(), 0.0);
  SweepConfig b(4.8e9, 8.8e9, 1e-6, 0.0);
  EXPECT_DOUBLE_EQ(b.origin_shift(), 4.8e9);
}

TEST(Synthesis, SingleToneIsOneBin) {
  // 1 GHz at 8 GHz for 1 us: exactly 1000 cycles, so no leakage.
  auto w = synthesize_sut(sut::Tones{{{1e9, 1.0}}}, 8e9, 1e-6);
  ASSERT_EQ(w.size(), 8000u);
  auto mag = dft_magnitudes(w);
  const auto pk = argmax(mag);
  EXPECT_NEAR(fft::bin_frequency(pk, w.size(), w.sample_rate()), 1e9, 1.0);
  for (std::size_t i = 0; i < mag.size(); ++i)
    if (i != pk) {
      EXPECT_LT(mag[i], 1e-6 * mag[pk]) << i;
    }
}

TEST(Synthesis, TwoTonesFiveHundredMegahertzApart) {
  auto w = synthesize_sut(sut::Tones{{{6.0e9, 1.0}, {6.5e9, 1.0}}}, 32e9, 1e-6);
  auto mag = dft_magnitudes(w);
  const auto a = argmax(mag);
  const double fa = fft::bin_frequency(a, w.size(), w.sample_rate());
  mag[a] = 0;
  const double fb = fft::bin_frequency(argmax(mag), w.size(), w.sample_rate());
  EXPECT_NEAR(std::abs(fa - fb), 500e6, 1.0);
}

TEST(Synthesis, LfmInstantaneousFrequencyAtMidpoint) {
  // 0 -> 4 GHz over 200 us; only a short window around 100 us is needed.
  const double fs = 16e9;
  auto w = synthesize_sut_samples(sut::Lfm{0.0, 4e9, 200e-6}, fs, 100e-6, 64);
  EXPECT_NEAR(inst_freq(w, 0), 2e9, fs / 64.0);
  EXPECT_EQ(instantaneous_frequencies(sut::Lfm{0.0, 4e9, 200e-6}, 100e-6).at(0), 2e9);
}

TEST(Synthesis, SingleStepEqualsTruncatedTone) {
  const double fs = 4e9, d = 0.5e-6;
  auto step = synthesize_sut(sut::StepFrequency{{{700e6, d}}}, fs, 1e-6);
  auto tone = synthesize_sut(sut::Tones{{{700e6, 1.0}}}, fs, 1e-6);
  for (std::size_t n = 0; n < step.size(); ++n) {
    const Complex expect = tone.time_at(n) < d ? tone[n] : Complex{};
    EXPECT_EQ(step[n], expect) << n;
  }
}

TEST(Synthesis, DualChirpReportsBothComponents) {
  auto f = instantaneous_frequencies(sut::DualChirpLfm{0.0, 4e9, 200e-6}, 50e-6);
  ASSERT_EQ(f.size(), 2u);
  EXPECT_NEAR(f[0], 1e9, 1.0);
  EXPECT_NEAR(f[1], 3e9, 1.0);
}

TEST(Synthesis, HoppingRestartsPhaseStepKeepsIt) {
  const double fs = 8e9;
  sut::StepFrequency steps{{{1e9 + 1e6, 10e-9}, {2e9, 10e-9}}};
  sut::FrequencyHopping hops{{{1e9 + 1e6, 10e-9}, {2e9, 10e-9}}};
  auto a = synthesize_sut(steps, fs, 20e-9);
  auto b = synthesize_sut(hops, fs, 20e-9);
  const std::size_t first_of_second = 80;
  EXPECT_NEAR(std::arg(b[first_of_second]), 0.0, 1e-12);
  EXPECT_GT(std::abs(a[first_of_second] - b[first_of_second]), 1e-3);
}

TEST(Synthesis, ValidationNamesFields) {
  try {
    validate(SutSpec{sut::Tones{}});
    FAIL();
  } catch (const ValidationError& e) {
    EXPECT_EQ(e.field(), "sut.tones");
  }
  EXPECT_THROW(synthesize_sut(sut::Tones{{{4e9, 1.0}}}, 8e9, 1e-6), ValidationError);  // aliasing
}

TEST(Probe, EndpointsAndPeriodicity) {
  SweepConfig cfg(4.8e9, 8.8e9, 1e-6);
  const double fs = 40e9;
  auto p = synthesize_probe_chirp(cfg, 2, fs);
  ASSERT_EQ(p.size(), 80000u);
  const double bin = fs / 64.0;
  EXPECT_NEAR(inst_freq(p, 0), 4.8e9, bin);
  EXPECT_NEAR(inst_freq(p, 39998), 8.8e9, bin);
  // Phase resets: period two repeats period one.
  for (std::size_t n = 0; n < 40000; n += 997) EXPECT_NEAR(std::abs(p[n] - p[n + 40000]), 0.0, 1e-9);
  auto seg = probe_chirp_segment(cfg, fs, 1e-6 + 10.0 / fs, 16);
  for (std::size_t n = 0; n < 16; ++n) EXPECT_NEAR(std::abs(seg[n] - p[40010 + n]), 0.0, 1e-9);
}

TEST(Noise, DisabledIsIdentity) {
  auto w = synthesize_sut(sut::Tones{{{1e9, 1.0}}}, 8e9, 1e-7);
  auto n = add_awgn(w, NoiseSpec{false, 0.0, 1});
  for (std::size_t i = 0; i < w.size(); ++i) EXPECT_EQ(w[i], n[i]);
}

TEST(Noise, ZeroDbPowerRatio) {
  auto w = synthesize_sut(sut::Tones{{{1e9, 1.0}}}, 8e9, 2e-5);  // 160k samples
  auto n = add_awgn(w, NoiseSpec{true, 0.0, 42});
  double pn = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) pn += std::norm(n[i] - w[i]);
  const double ratio = pn / w.energy();
  EXPECT_GT(ratio, 0.9);
  EXPECT_LT(ratio, 1.1);
}

TEST(Noise, RequestedSnrAndCircularity) {
  auto w = synthesize_sut(sut::Tones{{{1e9, 2.0}}}, 8e9, 2e-5);
  auto n = add_awgn(w, NoiseSpec{true, 20.0, 7});
  double re2 = 0.0, im2 = 0.0, cross = 0.0, mean_re = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) {
    const Complex e = n[i] - w[i];
    re2 += e.real() * e.real();
    im2 += e.imag() * e.imag();
    cross += e.real() * e.imag();
    mean_re += e.real();
  }
  const double N = static_cast<double>(w.size());
  const double snr = 10.0 * std::log10(w.energy() / (re2 + im2));
  EXPECT_NEAR(snr, 20.0, 0.1);
  EXPECT_NEAR(re2 / im2, 1.0, 0.03);
  EXPECT_NEAR(cross / N, 0.0, 0.01 * (re2 / N));
  EXPECT_NEAR(mean_re / N, 0.0, 5.0 * std::sqrt(re2 / N / N));
}

TEST(Noise, SeededDeterminism) {
  auto w = synthesize_sut(sut::Tones{{{1e9, 1.0}}}, 8e9, 1e-6);
  auto a = add_awgn(w, NoiseSpec{true, 10.0, 5});
  auto b = add_awgn(w, NoiseSpec{true, 10.0, 5});
  auto c = add_awgn(w, NoiseSpec{true, 10.0, 6});
  bool differs = false;
  for (std::size_t i = 0; i < w.size(); ++i) {
    EXPECT_EQ(a[i], b[i]);
    differs |= a[i] != c[i];
  }
  EXPECT_TRUE(differs);
}
