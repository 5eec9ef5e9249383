#include "fttm/fft.hpp"

#include <fftw3.h>

#include <map>
#include <mutex>
#include <utility>

namespace fttm::fft {
namespace {

// fftw_plan_* is not reentrant; only plan creation is serialized.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

fftw_plan plan_for(std::size_t n, int sign) {
  static std::map<std::pair<std::size_t, int>, fftw_plan> cache;
  std::lock_guard<std::mutex> lock(planner_mutex());
  auto key = std::make_pair(n, sign);
  auto it = cache.find(key);
  if (it != cache.end()) return it->second;
  std::vector<Complex> scratch(n);
  auto* buf = reinterpret_cast<fftw_complex*>(scratch.data());
  fftw_plan p = fftw_plan_dft_1d(static_cast<int>(n), buf, buf, sign,
                                 FFTW_ESTIMATE | FFTW_UNALIGNED);
  cache.emplace(key, p);
  return p;
}

void execute(std::span<Complex> data, int sign) {
  if (data.empty()) return;
  fftw_plan p = plan_for(data.size(), sign);
  auto* buf = reinterpret_cast<fftw_complex*>(data.data());
  fftw_execute_dft(p, buf, buf);
}

}  // namespace

void forward(std::span<Complex> data) { execute(data, FFTW_FORWARD); }
void inverse(std::span<Complex> data) { execute(data, FFTW_BACKWARD); }

std::vector<Complex> forward_copy(std::span<const Complex> data, std::size_t padded_size) {
  std::vector<Complex> out(std::max(padded_size, data.size()));
  std::copy(data.begin(), data.end(), out.begin());
  forward(out);
  return out;
}

std::vector<Complex> inverse_normalized(std::span<const Complex> data) {
  std::vector<Complex> out(data.begin(), data.end());
  inverse(out);
  const double scale = 1.0 / static_cast<double>(out.size());
  for (auto& v : out) v *= scale;
  return out;
}

double bin_frequency(std::size_t i, std::size_t n, double fs) noexcept {
  const auto half = (n + 1) / 2;
  const double idx = i < half ? static_cast<double>(i)
                              : static_cast<double>(i) - static_cast<double>(n);
  return idx * fs / static_cast<double>(n);
}

std::size_t next_pow2(std::size_t n) noexcept {
  std::size_t p = 1;
  while (p < n) p <<= 1;
  return p;
}

}  // namespace fttm::fft
