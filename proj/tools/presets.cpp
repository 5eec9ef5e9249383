// Built-in scenarios, one per reproduced figure. All at full scale; the
// --desk-scale flag derives the reduced variants.

#include <map>

#include "fttm/error.hpp"
#include "scenario.hpp"

namespace fttm::cli {

namespace {

json ideal_bpf_pulse(double bandwidth, double f_stop) {
  const double f_start = 4.8e9;
  return {{"command", "simulate"},
          {"sut", {{"type", "tones"}, {"tones", {{{"frequency", 0.5 * (f_start + f_stop)}}}}}},
          {"sweep", {{"f_start", f_start}, {"f_stop", f_stop}, {"period", 1e-6}}},
          {"filter", {{"type", "ideal_bpf"}, {"center", 6e9}, {"bandwidth", bandwidth}}},
          {"duration", 2e-6}};
}

const char* kSbs = R"({"type": "broadened_sbs", "center": 6e9, "natural_fwhm": "fit", "peak_gain": 5})";

json pump_runs(json base_patch_per_run, const std::vector<std::pair<std::string, double>>& runs) {
  json out = json::array();
  for (const auto& [name, r] : runs) {
    json p = base_patch_per_run;
    p["name"] = name;
    p["filter"]["pump_sweep_range"] = r;
    out.push_back(p);
  }
  return out;
}

std::map<std::string, json> build() {
  std::map<std::string, json> p;
  p["fig3a"] = ideal_bpf_pulse(25e6, 14.8e9);
  p["fig3b"] = ideal_bpf_pulse(100e6, 14.8e9);
  p["fig3c"] = ideal_bpf_pulse(400e6, 14.8e9);
  p["fig3d"] = ideal_bpf_pulse(100e6, 5.8e9);
  p["fig3e"] = ideal_bpf_pulse(100e6, 6.8e9);
  p["fig3f"] = ideal_bpf_pulse(100e6, 8.8e9);

  // Gain-profile characterisation: the linear (small-gain) line.
  p["fig5"] = json::parse(R"({
    "command": "sweep-bw",
    "sut": {"type": "tones", "tones": [{"frequency": 6.8e9}]},
    "sweep": {"f_start": 4.8e9, "f_stop": 8.8e9, "period": 1e-6},
    "filter": {"type": "broadened_sbs", "center": 6e9, "natural_fwhm": 20e6, "peak_gain": 0},
    "sweep_bw": {"values": [0, 30e6, 60e6, 90e6, 120e6, 150e6, 180e6, 210e6]}
  })");

  json fig6 = json::parse(R"({
    "command": "simulate",
    "sut": {"type": "tones", "tones": [{"frequency": 6.8e9}]},
    "sweep": {"f_start": 4.8e9, "f_stop": 8.8e9, "period": 1e-6},
    "duration": 2e-6
  })");
  fig6["filter"] = json::parse(kSbs);
  fig6["runs"] = pump_runs(json::object(), {{"a_0MHz", 0}, {"b_30MHz", 30e6}, {"c_60MHz", 60e6},
                                            {"d_90MHz", 90e6}, {"e_120MHz", 120e6}, {"f_150MHz", 150e6}});
  p["fig6"] = fig6;

  json fig7 = json::parse(R"({
    "command": "sweep-bw",
    "sut": {"type": "tones", "tones": [{"frequency": 6.8e9}]},
    "sweep": {"f_start": 4.8e9, "f_stop": 8.8e9, "period": 1e-6},
    "sweep_bw": {"sweep_rates": [1e15, 2e15, 4e15], "values": [0, 30e6, 60e6, 90e6, 120e6, 150e6]}
  })");
  fig7["filter"] = json::parse(kSbs);
  p["fig7"] = fig7;

  json fig8 = json::parse(R"({
    "command": "stft",
    "sut": {"type": "lfm", "f0": 0, "f1": 4e9, "duration": 200e-6},
    "sweep": {"f_start": 4.8e9, "f_stop": 8.8e9, "period": 1e-6, "band_origin": 0},
    "duration": 200e-6,
    "stft": {"freq_bins": 1024}
  })");
  fig8["filter"] = json::parse(kSbs);
  fig8["runs"] = json::array();
  for (const auto& [tag, f_stop] : {std::pair{"k1", 5.8e9}, {"k2", 6.8e9}, {"k4", 8.8e9}}) {
    for (const auto& [ptag, r] : {std::pair{"0MHz", 0.0}, {"30MHz", 30e6}, {"60MHz", 60e6}}) {
      fig8["runs"].push_back({{"name", std::string(tag) + "_" + ptag},
                              {"sweep", {{"f_stop", f_stop}}},
                              {"filter", {{"pump_sweep_range", r}}}});
    }
  }
  p["fig8"] = fig8;

  json fig9 = json::parse(R"({
    "command": "two-tone",
    "sut": {"type": "tones", "tones": [{"frequency": 6.8e9}]},
    "sweep": {"f_start": 4.8e9, "f_stop": 8.8e9, "period": 1e-6},
    "two_tone": {"dip_db": 3, "sweep_rates": [1e15, 2e15, 4e15], "pump_sweeps": [0, 30e6, 60e6]}
  })");
  fig9["filter"] = json::parse(kSbs);
  p["fig9"] = fig9;

  json fig10 = json::parse(R"({
    "command": "stft",
    "sut": {"type": "tones", "tones": [{"frequency": 1e9}]},
    "sweep": {"f_start": 4.8e9, "f_stop": 8.8e9, "period": 1e-6, "band_origin": 0},
    "duration": 200e-6,
    "stft": {"freq_bins": 1024}
  })");
  fig10["filter"] = json::parse(kSbs);
  const json suts = {
      {"dual_chirp", json::parse(R"({"type": "dual_chirp_lfm", "f0": 0, "f1": 4e9, "duration": 200e-6})")},
      {"step", json::parse(R"({"type": "step_frequency", "steps": [
          {"frequency": 0.5e9, "dwell": 50e-6}, {"frequency": 1.5e9, "dwell": 50e-6},
          {"frequency": 2.5e9, "dwell": 50e-6}, {"frequency": 3.5e9, "dwell": 50e-6}]})")},
      {"hop", json::parse(R"({"type": "frequency_hopping", "hops": [
          {"frequency": 2.5e9, "dwell": 25e-6}, {"frequency": 0.5e9, "dwell": 25e-6},
          {"frequency": 3.5e9, "dwell": 25e-6}, {"frequency": 1.5e9, "dwell": 25e-6},
          {"frequency": 3.0e9, "dwell": 25e-6}, {"frequency": 1.0e9, "dwell": 25e-6},
          {"frequency": 2.0e9, "dwell": 25e-6}, {"frequency": 0.8e9, "dwell": 25e-6}]})")}};
  fig10["runs"] = json::array();
  for (const auto& [name, sut] : suts.items()) {
    for (const auto& [ptag, r] : {std::pair{"0MHz", 0.0}, {"30MHz", 30e6}, {"60MHz", 60e6}}) {
      // A patch replaces arrays wholesale, so the SUT object is swapped as a whole.
      fig10["runs"].push_back({{"name", name + "_" + ptag}, {"sut", sut}, {"filter", {{"pump_sweep_range", r}}}});
    }
  }
  p["fig10"] = fig10;

  json fig11 = json::parse(R"({
    "command": "measure",
    "sut": {"type": "tones", "tones": [{"frequency": 6e9}]},
    "sweep": {"f_start": 4.8e9, "f_stop": 8.8e9, "period": 1e-6},
    "lowpass_cutoff": 200e6,
    "noise": {"enabled": true, "snr_db": 30, "seed": 1000},
    "measure": {"trials": 50, "first_tone": 6e9, "true_separations": [500e6, 1e9],
                "pump_sweeps": [0, 90e6], "snr": "calibrate", "target_max_error": 40e6}
  })");
  fig11["filter"] = json::parse(kSbs);
  p["fig11"] = fig11;
  return p;
}

const std::map<std::string, json>& presets() {
  static const auto p = build();
  return p;
}

}  // namespace

std::vector<std::string> preset_names() {
  std::vector<std::string> out;
  for (const auto& [k, v] : presets()) out.push_back(k);
  return out;
}

json preset(const std::string& name) {
  const auto& p = presets();
  const auto it = p.find(name);
  if (it == p.end()) throw ValidationError("preset", "unknown preset '" + name + "'");
  json doc = it->second;
  doc["name"] = name;
  return doc;
}

}  // namespace fttm::cli
