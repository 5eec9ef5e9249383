#include "commands.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <numeric>

#include "fttm/analysis.hpp"
#include "fttm/error.hpp"
#include "fttm/io.hpp"
#include "fttm/parallel.hpp"
#include "fttm/stft.hpp"

#ifndef FTTM_VERSION
#define FTTM_VERSION "0.0.0"
#endif

namespace fttm::cli {

namespace fs = std::filesystem;

namespace {

struct RunContext {
  fs::path root;
  fs::path dir;       // where this run's files go
  std::string prefix;  // dir relative to root, "" or "name/"
  RunOutput out;

  std::ofstream open(const std::string& file) {
    out.files.push_back(prefix + file);
    return io::open_output(dir / file);
  }
  fs::path track(const std::string& file) {
    out.files.push_back(prefix + file);
    fs::create_directories(dir);
    return dir / file;
  }
};

json section(const json& doc, const char* key) {
  if (!doc.contains(key)) return json::object();
  if (!doc.at(key).is_object()) throw ValidationError(key, "expected an object");
  return doc.at(key);
}

bool is_sbs(const FilterSpec& f) { return std::holds_alternative<filter::BroadenedSbs>(f); }

FilterSpec with_pump(const FilterSpec& f, double r) {
  auto s = std::get<filter::BroadenedSbs>(f);
  s.pump_sweep_range = r;
  return s;
}

// Filter with its grid parameter replaced: pump sweep for SBS, bandwidth or
// linewidth otherwise.
FilterSpec with_grid_value(const FilterSpec& f, double v) {
  return std::visit(
      [v](auto s) -> FilterSpec {
        using T = decltype(s);
        if constexpr (std::is_same_v<T, filter::IdealBpf>) s.bandwidth = v;
        else if constexpr (std::is_same_v<T, filter::Lorentzian>) s.natural_fwhm = v;
        else s.pump_sweep_range = v;
        return s;
      },
      f);
}

double sample_rate_of(const Scenario& s) {
  return s.sample_rate ? *s.sample_rate : auto_sample_rate(s.sut, s.sweep, s.filter);
}

void common_derived(const Scenario& s, json& d) {
  d["sweep_rate_hz_per_s"] = s.sweep.rate();
  d["sample_rate_hz"] = sample_rate_of(s);
  if (s.fitted_linewidth) d["fitted_natural_fwhm_hz"] = *s.fitted_linewidth;
}

void write_response(RunContext& ctx, const std::string& file, const FilterSpec& f) {
  const double c = center_frequency(f);
  const double half = 4.0 * nominal_width(f);
  const auto resp = frequency_response(f, {c - half, c + half, 2.0 * half / 8000.0});
  auto os = ctx.open(file);
  io::write_frequency_response_csv(os, resp);
}

std::string mhz_tag(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%gMHz", v / 1e6);
  return buf;
}

void cmd_simulate(const Scenario& s, RunContext& ctx) {
  const int n_periods = std::max(1, static_cast<int>(std::floor(s.duration / s.sweep.period() + 1e-9)));
  AcquisitionOptions opts;
  opts.noise = s.noise;
  opts.noise_stage = s.noise_stage;
  opts.lowpass_cutoff = s.lowpass_cutoff;
  opts.threshold = s.threshold;
  opts.sample_rate = s.sample_rate;
  auto acq = acquire(s.sut, s.sweep, s.filter, n_periods, opts);
  PulseTrain train = acq.train;
  if (s.reference_frequency) train.calibration = calibrate_reference(train, *s.reference_frequency);
  train = map_time_to_frequency(train);

  {
    auto os = ctx.open("pulses.csv");
    io::write_pulses_csv(os, train);
  }
  io::write_waveform(ctx.track("envelope.fttm"), acq.envelope);
  write_response(ctx, "response.csv", s.filter);

  auto& d = ctx.out.derived;
  common_derived(s, d);
  d["sample_rate_hz"] = acq.sample_rate;
  d["periods"] = n_periods;
  d["pulse_count"] = train.pulses.size();
  if (!train.pulses.empty()) {
    double sum = 0.0;
    for (const auto& p : train.pulses) sum += p.fwhm;
    const double mean = sum / static_cast<double>(train.pulses.size());
    d["mean_fwhm_s"] = mean;
    d["mean_fwhm_hz"] = mean * s.sweep.rate();
  }
  if (train.calibration) d["calibration_offset_s"] = train.calibration->time_offset;
}

void cmd_sweep_bw(const Scenario& s, RunContext& ctx) {
  const json sec = section(s.document, "sweep_bw");
  const auto rates = sec.contains("sweep_rates") ? numbers_at(sec, "sweep_rates", "sweep_bw")
                                                 : std::vector<double>{s.sweep.rate()};
  const bool sbs = is_sbs(s.filter);
  const bool auto_grid = !sec.contains("values") || (sec["values"].is_string() && sec["values"] == "auto");
  const int points = static_cast<int>(number_or(sec, "points", 13, "sweep_bw"));
  if (auto_grid && points < 1) throw ValidationError("sweep_bw.points", "must be >= 1");

  struct Task {
    double k, value;
    FilterSpec filter;
    double fwhm = 0.0;
  };
  std::vector<Task> tasks;
  for (double k : rates) {
    if (!(k > 0)) throw ValidationError("sweep_bw.sweep_rates", "must be positive");
    std::vector<double> values;
    if (!auto_grid) values = numbers_at(sec, "values", "sweep_bw");
    else if (sbs) values = {0, 30e6, 60e6, 90e6, 120e6, 150e6};
    else if (points == 1) values = {model_optimal_bandwidth(k)};
    else values = log_grid(model_optimal_bandwidth(k) / 10, 10 * model_optimal_bandwidth(k), points);
    for (double v : values) tasks.push_back({k, v, with_grid_value(s.filter, v)});
  }
  for (const auto& t : tasks) validate(t.filter);
  parallel::for_each_index(tasks.size(), [&](std::size_t i) {
    tasks[i].fwhm = simulate_pulse_width(tasks[i].filter, tasks[i].k).fwhm_time;
  });

  std::vector<io::WidthRow> rows;
  for (const auto& t : tasks) rows.push_back({t.k, t.value, t.fwhm});
  {
    auto os = ctx.open("width_surface.csv");
    io::write_width_surface_csv(os, rows);
  }

  auto& d = ctx.out.derived;
  common_derived(s, d);
  json minima = json::array();
  for (double k : rates) {
    const Task* best = nullptr;
    for (const auto& t : tasks)
      if (t.k == k && (!best || t.fwhm < best->fwhm)) best = &t;
    minima.push_back({{"sweep_rate_hz_per_s", k}, {"value_hz", best->value}, {"fwhm_time_s", best->fwhm}});
  }
  d["minima"] = minima;

  if (!sbs && sec.value("optimize", false)) {
    const auto family = std::holds_alternative<filter::IdealBpf>(s.filter) ? FilterFamily::IdealBpf
                                                                           : FilterFamily::Lorentzian;
    json opt = json::array();
    for (double k : rates) {
      const auto o = optimal_bandwidth(k, family);
      opt.push_back({{"sweep_rate_hz_per_s", k}, {"b_star_hz", o.b_star}, {"width_star_s", o.width_star},
                     {"method", o.method}});
    }
    d["optimal_bandwidth"] = opt;
  }

  if (sbs) {
    // Gain-profile characterisation for each pump sweep of the grid.
    std::vector<double> values;
    for (const auto& t : tasks)
      if (t.k == rates.front()) values.push_back(t.value);
    auto os = ctx.open("bandwidth_3db.csv");
    os << "pump_sweep_hz,bandwidth_3db_hz,flat_span_1db_hz,flat_top\n";
    for (double v : values) {
      const FilterSpec f = with_grid_value(s.filter, v);
      const double c = center_frequency(f);
      const double half = 4.0 * nominal_width(f);
      const auto resp = frequency_response(f, {c - half, c + half, 2.0 * half / 8000.0});
      os << io::format_number(v) << ',' << io::format_number(three_db_bandwidth(resp)) << ','
         << io::format_number(flat_span(resp)) << ',' << (is_flat_top(resp) ? 1 : 0) << '\n';
      write_response(ctx, "response_" + mhz_tag(v) + ".csv", f);
    }
  }
}

void cmd_stft(const Scenario& s, RunContext& ctx) {
  const json sec = section(s.document, "stft");
  const double bins = number_or(sec, "freq_bins", 1024, "stft");
  if (bins < static_cast<double>(kMinFreqBins) || bins != std::floor(bins))
    throw ValidationError("stft.freq_bins", "must be an integer >= 16");
  if (s.duration < 2.0 * s.sweep.period() * (1 - 1e-9))
    throw ValidationError("duration", "must cover at least two sweep periods");
  StftOptions opts;
  opts.sample_rate = s.sample_rate;
  opts.lowpass_cutoff = s.lowpass_cutoff;
  opts.noise = s.noise;
  const auto spec = run_stft(s.sut, s.sweep, s.filter, s.duration, static_cast<std::size_t>(bins), opts);
  {
    auto os = ctx.open("spectrogram.csv");
    io::write_spectrogram_csv(os, spec);
  }
  io::write_spectrogram_binary(ctx.track("spectrogram.fttms"), spec);

  auto& d = ctx.out.derived;
  common_derived(s, d);
  d["rows"] = spec.rows();
  d["cols"] = spec.cols();
  d["time_offset_s"] = spec.time_offset;
  const auto track = ridge_track(spec);
  double sum = 0.0;
  std::size_t n = 0, with_ridge = 0;
  for (std::size_t r = 0; r < spec.rows(); ++r) {
    if (row_has_ridge(spec, r)) ++with_ridge;
    if (!track[r]) continue;
    sum += ridge_width(spec, r);
    ++n;
  }
  d["rows_with_ridge"] = with_ridge;
  d["rows_tracked"] = n;
  if (n > 0) d["mean_ridge_width_hz"] = sum / static_cast<double>(n);
  if (n >= 2) {
    const auto fit = fit_ridge_line(spec);
    d["ridge_slope_hz_per_s"] = fit.slope;
    d["ridge_intercept_hz"] = fit.intercept;
  }
}

void cmd_two_tone(const Scenario& s, RunContext& ctx) {
  const json sec = section(s.document, "two_tone");
  const double dip = number_or(sec, "dip_db", kDefaultDipDb, "two_tone");
  if (!(dip > 0)) throw ValidationError("two_tone.dip_db", "must be positive");
  const auto rates = sec.contains("sweep_rates") ? numbers_at(sec, "sweep_rates", "two_tone")
                                                 : std::vector<double>{s.sweep.rate()};
  const bool sbs = is_sbs(s.filter);
  std::vector<double> pumps{sbs ? std::get<filter::BroadenedSbs>(s.filter).pump_sweep_range : 0.0};
  if (sec.contains("pump_sweeps")) {
    if (!sbs) throw ValidationError("two_tone.pump_sweeps", "requires a broadened_sbs filter");
    pumps = numbers_at(sec, "pump_sweeps", "two_tone");
  }
  std::vector<io::ResolutionRow> rows;
  for (double k : rates) {
    if (!(k > 0)) throw ValidationError("two_tone.sweep_rates", "must be positive");
    for (double r : pumps) {
      if (sbs) validate(with_pump(s.filter, r));
      rows.push_back({k, r, 0.0});
    }
  }
  parallel::for_each_index(rows.size(), [&](std::size_t i) {
    const FilterSpec f = sbs ? with_pump(s.filter, rows[i].pump_sweep) : s.filter;
    rows[i].min_separation = two_tone_min_separation(f, rows[i].sweep_rate, dip);
  });
  {
    auto os = ctx.open("resolution.csv");
    io::write_resolution_csv(os, rows);
  }
  auto& d = ctx.out.derived;
  common_derived(s, d);
  d["dip_db"] = dip;
  json table = json::array();
  for (const auto& r : rows)
    table.push_back({{"sweep_rate_hz_per_s", r.sweep_rate}, {"pump_sweep_hz", r.pump_sweep},
                     {"min_separation_hz", r.min_separation}});
  d["min_separations"] = table;
}

void cmd_measure(const Scenario& s, RunContext& ctx) {
  const json sec = section(s.document, "measure");
  const double trials_d = number_or(sec, "trials", 50, "measure");
  if (trials_d < 1 || trials_d != std::floor(trials_d))
    throw ValidationError("measure.trials", "must be an integer >= 1");
  const int trials = static_cast<int>(trials_d);
  const auto seps = numbers_at(sec, "true_separations", "measure");
  const bool sbs = is_sbs(s.filter);
  std::vector<double> pumps{sbs ? std::get<filter::BroadenedSbs>(s.filter).pump_sweep_range : 0.0};
  if (sec.contains("pump_sweeps")) {
    if (!sbs) throw ValidationError("measure.pump_sweeps", "requires a broadened_sbs filter");
    pumps = numbers_at(sec, "pump_sweeps", "measure");
  }
  auto filter_for = [&](double r) { return sbs ? with_pump(s.filter, r) : s.filter; };

  IntervalSetup setup;
  setup.f_start = s.sweep.f_start();
  setup.period = s.sweep.period();
  setup.first_tone = number_or(sec, "first_tone", setup.first_tone, "measure");
  if (s.lowpass_cutoff) setup.lowpass_cutoff = s.lowpass_cutoff;
  setup.noise_stage = s.noise_stage;
  setup.threshold = s.threshold;
  const double k = s.sweep.rate();

  // SNR: a number, "calibrate", or the noise section when absent.
  bool calibrate = false;
  std::optional<double> snr;
  if (sec.contains("snr") && !sec["snr"].is_null()) {
    if (sec["snr"].is_string()) {
      if (sec["snr"] != "calibrate") throw ValidationError("measure.snr", "expected a number or \"calibrate\"");
      calibrate = true;
    } else {
      snr = number_at(sec, "snr", "measure");
    }
  } else if (s.noise.enabled) {
    snr = s.noise.snr_db;
  }
  const double target = number_or(sec, "target_max_error", 40e6, "measure");
  const double calib_pump = number_or(sec, "calibration_pump_sweep", pumps.front(), "measure");

  std::vector<io::ErrorRow> rows;
  json snrs = json::array();
  for (double sep : seps) {
    std::optional<double> row_snr = snr;
    if (calibrate) {
      row_snr = calibrate_snr(sep, filter_for(calib_pump), k, target, trials, s.noise.seed, setup);
      snrs.push_back({{"true_sep_hz", sep}, {"snr_db", *row_snr}});
    }
    for (double r : pumps) {
      NoiseSpec noise{row_snr.has_value(), row_snr.value_or(0.0), s.noise.seed};
      const auto stats = interval_measurement_error(sep, filter_for(r), k, noise, trials, setup);
      rows.push_back({sep, r, row_snr.value_or(std::numeric_limits<double>::quiet_NaN()), stats});
    }
  }
  {
    auto os = ctx.open("error_stats.csv");
    io::write_error_stats_csv(os, rows);
  }
  {
    auto os = ctx.open("interval_errors.csv");
    os << "true_sep_hz,pump_sweep_hz,sample,error_hz\n";
    for (const auto& r : rows)
      for (std::size_t i = 0; i < r.stats.errors.size(); ++i)
        os << io::format_number(r.true_sep) << ',' << io::format_number(r.pump_sweep) << ',' << i << ','
           << io::format_number(r.stats.errors[i]) << '\n';
  }
  auto& d = ctx.out.derived;
  common_derived(s, d);
  if (calibrate) {
    d["calibrated_snr"] = snrs;
    d["calibration_target_max_error_hz"] = target;
  }
  json summary = json::array();
  for (const auto& r : rows)
    summary.push_back({{"true_sep_hz", r.true_sep}, {"pump_sweep_hz", r.pump_sweep},
                       {"max_abs_error_hz", r.stats.max_abs_error}, {"failures", r.stats.failures}});
  d["errors"] = summary;
}

void cmd_plan(const json& doc, RunContext& ctx) {
  const json sec = section(doc, "plan");
  std::vector<double> rates;
  if (sec.contains("sweep_rates")) rates = numbers_at(sec, "sweep_rates", "plan");
  else if (sec.contains("sweep_rate")) rates = {number_at(sec, "sweep_rate", "plan")};
  else if (doc.contains("sweep")) rates = {parse_scenario(doc).sweep.rate()};
  else throw ValidationError("plan.sweep_rate", "missing");
  const auto rule_s = sec.value("rule", std::string("rss"));
  CombineRule rule;
  if (rule_s == "rss") rule = CombineRule::Rss;
  else if (rule_s == "max") rule = CombineRule::Max;
  else throw ValidationError("plan.rule", "expected \"rss\" or \"max\"");

  auto os = ctx.open("plan.csv");
  os << "k_hz_per_s,rule,b_star_hz,sigma1_s,sigma2_s,width_star_s,resolution_star_hz\n";
  json out = json::array();
  for (double k : rates) {
    if (!(k > 0)) throw ValidationError("plan.sweep_rate", "must be positive");
    const double b = model_optimal_bandwidth(k);
    const auto w = predicted_widths(b, k, rule);
    os << io::format_number(k) << ',' << rule_s << ',' << io::format_number(b) << ','
       << io::format_number(w.sigma1) << ',' << io::format_number(w.sigma2) << ','
       << io::format_number(w.combined) << ',' << io::format_number(k * w.combined) << '\n';
    out.push_back({{"sweep_rate_hz_per_s", k}, {"b_star_hz", b}, {"width_star_s", w.combined},
                   {"resolution_star_hz", k * w.combined}});
    std::printf("k = %g Hz/s: B_star = %g Hz, width_star = %g s, resolution_star = %g Hz\n", k, b, w.combined,
                k * w.combined);
  }
  ctx.out.derived["plan"] = out;
}

void dispatch(const std::string& command, const json& run_doc, RunContext& ctx) {
  if (command == "plan") return cmd_plan(run_doc, ctx);
  const Scenario s = parse_scenario(run_doc);
  if (command == "simulate") cmd_simulate(s, ctx);
  else if (command == "sweep-bw") cmd_sweep_bw(s, ctx);
  else if (command == "stft") cmd_stft(s, ctx);
  else if (command == "two-tone") cmd_two_tone(s, ctx);
  else if (command == "measure") cmd_measure(s, ctx);
  else throw ValidationError("command", "unknown command '" + command + "'");
}

}  // namespace

json execute(const std::string& command, const json& doc, const fs::path& out_dir, bool desk_scaled) {
  const auto t0 = std::chrono::steady_clock::now();
  const auto runs = expand_runs(doc);
  const bool multi = doc.contains("runs");

  // Validate every run before any work starts.
  if (command != "plan")
    for (const auto& r : runs) (void)parse_scenario(r);

  json run_entries = json::array();
  std::vector<std::string> all_files;
  for (const auto& r : runs) {
    RunContext ctx;
    ctx.root = out_dir;
    const std::string name = r.value("name", std::string{});
    ctx.prefix = multi ? name + "/" : "";
    ctx.dir = multi ? out_dir / name : out_dir;
    dispatch(command, r, ctx);
    run_entries.push_back({{"name", name}, {"derived", ctx.out.derived}, {"files", ctx.out.files}});
    all_files.insert(all_files.end(), ctx.out.files.begin(), ctx.out.files.end());
    std::fprintf(stderr, "fttm %s: %s done (%zu files)\n", command.c_str(), name.empty() ? "run" : name.c_str(),
                 ctx.out.files.size());
  }
  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  all_files.push_back("manifest.json");
  json manifest = {{"fttm_manifest", 1},
                   {"tool", "fttm"},
                   {"version", FTTM_VERSION},
                   {"command", command},
                   {"desk_scaled", desk_scaled},
                   {"config", doc},
                   {"runs", run_entries},
                   {"derived", run_entries.size() == 1 ? run_entries[0]["derived"] : json::object()},
                   {"outputs", all_files},
                   {"threads", parallel::max_threads()},
                   {"wall_clock_s", wall}};
  auto os = io::open_output(out_dir / "manifest.json");
  os << manifest.dump(2) << '\n';
  return manifest;
}

}  // namespace fttm::cli
