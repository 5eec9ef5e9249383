#pragma once

// Scenario documents for the fttm command-line tool: JSON parsing with
// field-path errors, presets, desk scaling and run expansion.

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "fttm/engine.hpp"
#include "fttm/filters.hpp"
#include "fttm/signal.hpp"

namespace fttm::cli {

using nlohmann::json;

struct Scenario {
  std::string name;  // run name; empty for single-run documents
  SutSpec sut;
  SweepConfig sweep;
  FilterSpec filter;
  NoiseSpec noise;
  NoiseStage noise_stage = NoiseStage::PostFilter;
  double duration;
  std::optional<double> sample_rate;
  std::optional<double> lowpass_cutoff;
  double threshold = kDefaultThreshold;
  std::optional<double> reference_frequency;
  std::optional<double> fitted_linewidth;  // set when natural_fwhm was "fit"
  json document;                           // the run's merged document
};

// Reads a scenario file. A run manifest is accepted too: its embedded config
// is returned.
json load_document(const std::filesystem::path& path);

std::vector<std::string> preset_names();
json preset(const std::string& name);

// Divides absolute frequencies, durations and periods by 10. Sweep rates,
// filter bandwidths, linewidths, pump sweep ranges and tone separations are
// left alone.
json desk_scale(const json& doc);

// One merged document per entry of "runs" (JSON merge patches applied to the
// base document), or the document itself when it has no runs.
std::vector<json> expand_runs(const json& doc);

Scenario parse_scenario(const json& doc);

FilterSpec parse_filter(const json& j, const std::string& path);
SutSpec parse_sut(const json& j, const std::string& path);

// Field access helpers that report dotted paths.
double number_at(const json& j, const std::string& key, const std::string& path);
double number_or(const json& j, const std::string& key, double fallback, const std::string& path);
std::optional<double> optional_number(const json& j, const std::string& key, const std::string& path);
std::vector<double> numbers_at(const json& j, const std::string& key, const std::string& path);

}  // namespace fttm::cli
