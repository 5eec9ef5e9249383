#include "scenario.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "fttm/analysis.hpp"
#include "fttm/error.hpp"

namespace fttm::cli {

namespace {

std::string join(const std::string& path, const std::string& key) {
  return path.empty() ? key : path + "." + key;
}

std::string index_path(const std::string& path, std::size_t i) {
  return path + "[" + std::to_string(i) + "]";
}

const json& object_at(const json& j, const std::string& key, const std::string& path) {
  const auto p = join(path, key);
  if (!j.is_object() || !j.contains(key)) throw ValidationError(p, "missing");
  const json& v = j.at(key);
  if (!v.is_object()) throw ValidationError(p, "expected an object");
  return v;
}

std::string string_at(const json& j, const std::string& key, const std::string& path) {
  const auto p = join(path, key);
  if (!j.contains(key)) throw ValidationError(p, "missing");
  if (!j.at(key).is_string()) throw ValidationError(p, "expected a string");
  return j.at(key).get<std::string>();
}

double as_number(const json& v, const std::string& path) {
  if (!v.is_number()) throw ValidationError(path, "expected a number");
  const double x = v.get<double>();
  if (!std::isfinite(x)) throw ValidationError(path, "must be finite");
  return x;
}

std::vector<Dwell> parse_dwells(const json& j, const std::string& key, const std::string& path) {
  const auto p = join(path, key);
  if (!j.contains(key) || !j.at(key).is_array()) throw ValidationError(p, "expected an array");
  std::vector<Dwell> out;
  const auto& arr = j.at(key);
  for (std::size_t i = 0; i < arr.size(); ++i) {
    const auto ip = index_path(p, i);
    out.push_back({number_at(arr[i], "frequency", ip), number_at(arr[i], "dwell", ip)});
  }
  if (out.empty()) throw ValidationError(p, "must not be empty");
  return out;
}

SweepConfig parse_sweep(const json& j, const std::string& path) {
  const double f_start = number_at(j, "f_start", path);
  const double f_stop = number_at(j, "f_stop", path);
  const double period = number_at(j, "period", path);
  if (!(period > 0)) throw ValidationError(join(path, "period"), "must be positive");
  if (!(f_stop > f_start)) throw ValidationError(join(path, "f_stop"), "must exceed f_start");
  return SweepConfig(f_start, f_stop, period, optional_number(j, "band_origin", path));
}

// Rewrites the listed number-valued keys of `j` (if present) as value / factor.
void scale_keys(json& j, std::initializer_list<const char*> keys, double factor) {
  if (!j.is_object()) return;
  for (const char* k : keys) {
    if (j.contains(k) && j[k].is_number()) j[k] = j[k].get<double>() / factor;
  }
}

void scale_dwells(json& j, const char* key, double factor) {
  if (!j.is_object() || !j.contains(key) || !j[key].is_array()) return;
  for (auto& d : j[key]) scale_keys(d, {"frequency", "dwell"}, factor);
}

// Applies the desk scaling to a document or to a run patch (same shape).
void desk_scale_in_place(json& doc, double factor) {
  if (!doc.is_object()) return;
  if (doc.contains("sut")) {
    auto& s = doc["sut"];
    if (s.is_object() && s.contains("tones") && s["tones"].is_array()) {
      for (auto& t : s["tones"]) scale_keys(t, {"frequency"}, factor);
    }
    scale_keys(s, {"f0", "f1", "duration"}, factor);
    scale_dwells(s, "steps", factor);
    scale_dwells(s, "hops", factor);
  }
  if (doc.contains("sweep")) scale_keys(doc["sweep"], {"f_start", "f_stop", "period", "band_origin"}, factor);
  if (doc.contains("filter")) scale_keys(doc["filter"], {"center"}, factor);
  if (doc.contains("calibration")) scale_keys(doc["calibration"], {"reference_frequency"}, factor);
  if (doc.contains("measure")) scale_keys(doc["measure"], {"first_tone"}, factor);
  scale_keys(doc, {"duration", "sample_rate"}, factor);
  if (doc.contains("runs") && doc["runs"].is_array()) {
    for (auto& r : doc["runs"]) desk_scale_in_place(r, factor);
  }
}

}  // namespace

double number_at(const json& j, const std::string& key, const std::string& path) {
  const auto p = join(path, key);
  if (!j.is_object() || !j.contains(key)) throw ValidationError(p, "missing");
  return as_number(j.at(key), p);
}

double number_or(const json& j, const std::string& key, double fallback, const std::string& path) {
  if (!j.is_object() || !j.contains(key) || j.at(key).is_null()) return fallback;
  return as_number(j.at(key), join(path, key));
}

std::optional<double> optional_number(const json& j, const std::string& key, const std::string& path) {
  if (!j.is_object() || !j.contains(key) || j.at(key).is_null()) return std::nullopt;
  return as_number(j.at(key), join(path, key));
}

std::vector<double> numbers_at(const json& j, const std::string& key, const std::string& path) {
  const auto p = join(path, key);
  if (!j.is_object() || !j.contains(key)) throw ValidationError(p, "missing");
  const auto& arr = j.at(key);
  if (!arr.is_array()) throw ValidationError(p, "expected an array of numbers");
  std::vector<double> out;
  for (std::size_t i = 0; i < arr.size(); ++i) out.push_back(as_number(arr[i], index_path(p, i)));
  if (out.empty()) throw ValidationError(p, "must not be empty");
  return out;
}

json load_document(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("config", "cannot open " + path.string());
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ValidationError("config", std::string("invalid JSON: ") + e.what());
  }
  if (!doc.is_object()) throw ValidationError("config", "top level must be an object");
  if (doc.contains("fttm_manifest")) {
    if (!doc.contains("config") || !doc["config"].is_object())
      throw ValidationError("config", "manifest has no config snapshot");
    return doc["config"];
  }
  return doc;
}

json desk_scale(const json& doc) {
  json out = doc;
  desk_scale_in_place(out, 10.0);
  return out;
}

std::vector<json> expand_runs(const json& doc) {
  if (!doc.contains("runs")) return {doc};
  const auto& runs = doc.at("runs");
  if (!runs.is_array() || runs.empty()) throw ValidationError("runs", "expected a non-empty array");
  json base = doc;
  base.erase("runs");
  std::vector<json> out;
  for (std::size_t i = 0; i < runs.size(); ++i) {
    const auto p = index_path("runs", i);
    if (!runs[i].is_object()) throw ValidationError(p, "expected an object");
    if (!runs[i].contains("name") || !runs[i]["name"].is_string())
      throw ValidationError(p + ".name", "missing");
    json merged = base;
    merged.merge_patch(runs[i]);
    out.push_back(std::move(merged));
  }
  return out;
}

SutSpec parse_sut(const json& j, const std::string& path) {
  const auto type = string_at(j, "type", path);
  SutSpec spec;
  if (type == "tones") {
    const auto p = join(path, "tones");
    if (!j.contains("tones") || !j.at("tones").is_array()) throw ValidationError(p, "expected an array");
    sut::Tones t;
    const auto& arr = j.at("tones");
    for (std::size_t i = 0; i < arr.size(); ++i) {
      const auto ip = index_path(p, i);
      t.tones.push_back({number_at(arr[i], "frequency", ip), number_or(arr[i], "amplitude", 1.0, ip),
                         number_or(arr[i], "phase", 0.0, ip)});
    }
    if (t.tones.empty()) throw ValidationError(p, "must contain at least one tone");
    spec = t;
  } else if (type == "lfm" || type == "dual_chirp_lfm") {
    const double f0 = number_at(j, "f0", path);
    const double f1 = number_at(j, "f1", path);
    const double d = number_at(j, "duration", path);
    if (type == "lfm") spec = sut::Lfm{f0, f1, d};
    else spec = sut::DualChirpLfm{f0, f1, d};
  } else if (type == "step_frequency") {
    spec = sut::StepFrequency{parse_dwells(j, "steps", path)};
  } else if (type == "frequency_hopping") {
    spec = sut::FrequencyHopping{parse_dwells(j, "hops", path)};
  } else {
    throw ValidationError(join(path, "type"), "unknown SUT type '" + type + "'");
  }
  validate(spec);
  return spec;
}

FilterSpec parse_filter(const json& j, const std::string& path) {
  const auto type = string_at(j, "type", path);
  const double center = number_or(j, "center", 0.0, path);
  FilterSpec spec;
  if (type == "ideal_bpf") {
    spec = filter::IdealBpf{center, number_at(j, "bandwidth", path)};
  } else if (type == "lorentzian") {
    spec = filter::Lorentzian{center, number_at(j, "natural_fwhm", path)};
  } else if (type == "broadened_sbs") {
    const double gain = number_or(j, "peak_gain", kDefaultSbsPeakGain, path);
    double gamma = 0.0;
    const auto gp = join(path, "natural_fwhm");
    if (!j.contains("natural_fwhm")) throw ValidationError(gp, "missing");
    if (j.at("natural_fwhm").is_string()) {
      if (j.at("natural_fwhm").get<std::string>() != "fit")
        throw ValidationError(gp, "expected a number or \"fit\"");
      gamma = fit_natural_linewidth(gain);
    } else {
      gamma = as_number(j.at("natural_fwhm"), gp);
    }
    spec = filter::BroadenedSbs{center, gamma, number_or(j, "pump_sweep_range", 0.0, path), gain};
  } else {
    throw ValidationError(join(path, "type"), "unknown filter type '" + type + "'");
  }
  validate(spec);
  return spec;
}

Scenario parse_scenario(const json& doc) {
  Scenario s{.name = doc.value("name", std::string{}),
             .sut = parse_sut(object_at(doc, "sut", ""), "sut"),
             .sweep = parse_sweep(object_at(doc, "sweep", ""), "sweep"),
             .filter = parse_filter(object_at(doc, "filter", ""), "filter"),
             .noise = {},
             .duration = 0.0,
             .sample_rate = optional_number(doc, "sample_rate", ""),
             .lowpass_cutoff = optional_number(doc, "lowpass_cutoff", ""),
             .threshold = number_or(doc, "threshold", kDefaultThreshold, ""),
             .reference_frequency = std::nullopt,
             .fitted_linewidth = std::nullopt,
             .document = doc};
  const auto& fj = doc.at("filter");
  if (fj.contains("natural_fwhm") && fj.at("natural_fwhm").is_string())
    s.fitted_linewidth = std::get<filter::BroadenedSbs>(s.filter).natural_fwhm;

  s.duration = number_or(doc, "duration", s.sweep.period(), "");
  if (!(s.duration > 0)) throw ValidationError("duration", "must be positive");
  if (s.sample_rate && !(*s.sample_rate > 0)) throw ValidationError("sample_rate", "must be positive");
  if (s.lowpass_cutoff && !(*s.lowpass_cutoff > 0)) throw ValidationError("lowpass_cutoff", "must be positive");
  if (!(s.threshold > 0 && s.threshold < 1)) throw ValidationError("threshold", "must be in (0, 1)");

  if (doc.contains("noise")) {
    const auto& n = object_at(doc, "noise", "");
    s.noise.enabled = n.value("enabled", true);
    if (s.noise.enabled) s.noise.snr_db = number_at(n, "snr_db", "noise");
    const double seed = number_or(n, "seed", 0.0, "noise");
    if (seed < 0 || seed != std::floor(seed)) throw ValidationError("noise.seed", "must be a non-negative integer");
    s.noise.seed = static_cast<std::uint64_t>(seed);
    const auto stage = n.value("stage", std::string("post_filter"));
    if (stage == "post_filter") s.noise_stage = NoiseStage::PostFilter;
    else if (stage == "pre_filter") s.noise_stage = NoiseStage::PreFilter;
    else throw ValidationError("noise.stage", "expected \"post_filter\" or \"pre_filter\"");
  }
  if (doc.contains("calibration"))
    s.reference_frequency = number_at(object_at(doc, "calibration", ""), "reference_frequency", "calibration");
  return s;
}

}  // namespace fttm::cli
