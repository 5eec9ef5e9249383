#include "fttm/io.hpp"

#include <array>
#include <bit>
#include <charconv>
#include <cstring>
#include <fstream>
#include <limits>
#include <ostream>

#include "fttm/error.hpp"

namespace fttm::io {
namespace {

static_assert(std::endian::native == std::endian::little, "binary formats assume a little-endian host");

constexpr std::array<char, 4> kMagic{'F', 'T', 'T', 'M'};

template <class T>
void put(std::ostream& os, T v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <class T>
T get(std::istream& is) {
  T v{};
  if (!is.read(reinterpret_cast<char*>(&v), sizeof(T))) throw RuntimeError("truncated file");
  return v;
}

struct Header {
  double sample_rate;
  double start_time;
  std::uint64_t count;
};

void write_header(std::ostream& os, const Header& h) {
  os.write(kMagic.data(), kMagic.size());
  put(os, kFormatVersion);
  put(os, h.sample_rate);
  put(os, h.start_time);
  put(os, h.count);
}

Header read_header(std::istream& is) {
  std::array<char, 4> magic{};
  if (!is.read(magic.data(), magic.size()) || magic != kMagic) throw RuntimeError("not an FTTM file");
  const auto version = get<std::uint32_t>(is);
  if (version != kFormatVersion) throw RuntimeError("unsupported format version " + std::to_string(version));
  Header h{};
  h.sample_rate = get<double>(is);
  h.start_time = get<double>(is);
  h.count = get<std::uint64_t>(is);
  return h;
}

// Rejects headers whose payload cannot fit in what is left of the stream.
void require_bytes(std::istream& is, std::uint64_t items, std::uint64_t item_size) {
  const auto here = is.tellg();
  is.seekg(0, std::ios::end);
  const auto end = is.tellg();
  is.seekg(here);
  const auto left = static_cast<std::uint64_t>(end - here);
  if (item_size != 0 && items > left / item_size) throw RuntimeError("truncated file");
}

std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw RuntimeError("cannot open " + path.string());
  return is;
}

}  // namespace

std::ofstream open_output(const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw RuntimeError("cannot write " + path.string());
  return os;
}

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  std::array<char, 32> buf{};
  const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), res.ptr);
}

void write_waveform(const std::filesystem::path& path, const Waveform& w) {
  auto os = open_output(path);
  write_header(os, {w.sample_rate(), w.start_time(), w.size()});
  for (const auto& v : w.samples()) {
    put(os, v.real());
    put(os, v.imag());
  }
  if (!os) throw RuntimeError("write failed: " + path.string());
}

Waveform read_waveform(const std::filesystem::path& path) {
  auto is = open_input(path);
  const Header h = read_header(is);
  require_bytes(is, h.count, 2 * sizeof(double));
  std::vector<Complex> s(h.count);
  for (auto& v : s) {
    const double re = get<double>(is);
    const double im = get<double>(is);
    v = {re, im};
  }
  return Waveform(h.sample_rate, h.start_time, std::move(s));
}

void write_frequency_response_csv(std::ostream& os, const FrequencyResponse& resp) {
  os << "freq_hz,re,im,mag_db\n";
  for (std::size_t i = 0; i < resp.size(); ++i) {
    const Complex g = resp.gain()[i];
    const double db = 20.0 * std::log10(std::max(std::abs(g), 1e-300));
    os << format_number(resp.frequency(i)) << ',' << format_number(g.real()) << ',' << format_number(g.imag())
       << ',' << format_number(db) << '\n';
  }
}

void write_pulses_csv(std::ostream& os, const PulseTrain& train) {
  os << "period_index,peak_time_s,fwhm_s,peak_amplitude,mapped_freq_hz,boundary_flag\n";
  for (const auto& p : train.pulses) {
    os << p.period_index << ',' << format_number(p.peak_time) << ',' << format_number(p.fwhm) << ','
       << format_number(p.peak_amplitude) << ','
       << (p.mapped_frequency ? format_number(*p.mapped_frequency) : std::string()) << ','
       << (p.boundary_flag ? 1 : 0) << '\n';
  }
}

void write_width_surface_csv(std::ostream& os, const std::vector<WidthRow>& rows) {
  os << "k_hz_per_s,bandwidth_hz,fwhm_time_s,fwhm_freq_hz\n";
  for (const auto& r : rows)
    os << format_number(r.sweep_rate) << ',' << format_number(r.bandwidth) << ',' << format_number(r.fwhm_time)
       << ',' << format_number(r.sweep_rate * r.fwhm_time) << '\n';
}

void write_resolution_csv(std::ostream& os, const std::vector<ResolutionRow>& rows) {
  os << "k_hz_per_s,pump_sweep_hz,min_separation_hz\n";
  for (const auto& r : rows)
    os << format_number(r.sweep_rate) << ',' << format_number(r.pump_sweep) << ','
       << format_number(r.min_separation) << '\n';
}

void write_error_stats_csv(std::ostream& os, const std::vector<ErrorRow>& rows) {
  os << "true_sep_hz,pump_sweep_hz,snr_db,trials,failures,max_abs_error_hz,mean_error_hz,stddev_error_hz\n";
  for (const auto& r : rows)
    os << format_number(r.true_sep) << ',' << format_number(r.pump_sweep) << ',' << format_number(r.snr_db) << ','
       << r.stats.trials << ',' << r.stats.failures << ',' << format_number(r.stats.max_abs_error) << ','
       << format_number(r.stats.mean_error) << ',' << format_number(r.stats.stddev_error) << '\n';
}

void write_spectrogram_csv(std::ostream& os, const Spectrogram& spec) {
  os << "time_s,freq_hz,magnitude\n";
  for (std::size_t r = 0; r < spec.rows(); ++r) {
    const std::string t = format_number(spec.time_axis[r]);
    for (std::size_t c = 0; c < spec.cols(); ++c)
      os << t << ',' << format_number(spec.freq_axis[c]) << ',' << format_number(spec.at(r, c)) << '\n';
  }
}

void write_spectrogram_binary(const std::filesystem::path& path, const Spectrogram& spec) {
  if (spec.rows() == 0) throw ValidationError("spectrogram", "no rows");
  auto os = open_output(path);
  const double row_rate = spec.rows() > 1 ? 1.0 / (spec.time_axis[1] - spec.time_axis[0]) : 0.0;
  write_header(os, {row_rate, spec.time_axis.front(), spec.rows()});
  put<std::uint64_t>(os, spec.cols());
  for (double v : spec.time_axis) put(os, v);
  for (double v : spec.freq_axis) put(os, v);
  for (double v : spec.magnitudes) put(os, v);
  if (!os) throw RuntimeError("write failed: " + path.string());
}

Spectrogram read_spectrogram_binary(const std::filesystem::path& path) {
  auto is = open_input(path);
  const Header h = read_header(is);
  const auto cols = get<std::uint64_t>(is);
  if (cols != 0 && h.count > std::numeric_limits<std::uint64_t>::max() / cols - 2) throw RuntimeError("truncated file");
  require_bytes(is, h.count + cols + h.count * cols, sizeof(double));
  Spectrogram s;
  s.time_axis.resize(h.count);
  s.freq_axis.resize(cols);
  s.magnitudes.resize(h.count * cols);
  for (auto& v : s.time_axis) v = get<double>(is);
  for (auto& v : s.freq_axis) v = get<double>(is);
  for (auto& v : s.magnitudes) v = get<double>(is);
  return s;
}

}  // namespace fttm::io
