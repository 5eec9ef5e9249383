#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "scenario.hpp"

namespace fttm::cli {

inline const std::vector<std::string> kCommands = {"simulate", "sweep-bw", "stft", "two-tone", "measure", "plan"};

struct RunOutput {
  json derived = json::object();
  std::vector<std::string> files;  // relative to the output root
};

// Runs `command` on every run of `doc` and writes outputs plus manifest.json
// under `out_dir`. Returns the manifest.
json execute(const std::string& command, const json& doc, const std::filesystem::path& out_dir,
             bool desk_scaled);

}  // namespace fttm::cli
