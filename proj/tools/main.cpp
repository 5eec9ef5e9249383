// fttm: scenario-driven front end for the FTTM simulator.
//
//   fttm <command> (--config FILE | --preset NAME) [--desk-scale] [--out DIR]
//   fttm presets            list built-in presets
//   fttm preset NAME        print a preset as JSON
//
// Exit status: 0 success, 2 invalid configuration, 3 runtime failure.

#include <cstdio>
#include <iostream>

#include <CLI11.hpp>

#include "commands.hpp"
#include "fttm/error.hpp"
#include "fttm/parallel.hpp"

namespace {

constexpr int kExitValidation = 2;
constexpr int kExitRuntime = 3;

struct Options {
  std::string config;
  std::string preset;
  std::string out;
  bool desk = false;
};

}  // namespace

int main(int argc, char** argv) {
  using namespace fttm;
  CLI::App app{"Frequency-to-time mapping simulator"};
  app.set_version_flag("--version", FTTM_VERSION);
  app.require_subcommand(1);

  Options opt;
  std::vector<std::pair<std::string, CLI::App*>> commands;
  for (const auto& name : cli::kCommands) {
    auto* sub = app.add_subcommand(name, "run the " + name + " experiment");
    auto* cfg = sub->add_option("--config", opt.config, "scenario JSON (or a run manifest)");
    auto* pre = sub->add_option("--preset", opt.preset, "built-in scenario name");
    cfg->excludes(pre);
    sub->add_flag("--desk-scale", opt.desk, "divide absolute frequencies and times by 10");
    sub->add_option("--out", opt.out, "output directory");
    commands.emplace_back(name, sub);
  }
  app.add_subcommand("presets", "list built-in presets");
  std::string preset_name;
  app.add_subcommand("preset", "print a preset as JSON")->add_option("name", preset_name)->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitValidation;
  }

  try {
    parallel::configure_from_env();
    if (app.got_subcommand("presets")) {
      for (const auto& n : cli::preset_names()) std::cout << n << '\n';
      return 0;
    }
    if (app.got_subcommand("preset")) {
      std::cout << cli::preset(preset_name).dump(2) << '\n';
      return 0;
    }
    std::string command;
    for (const auto& [name, sub] : commands)
      if (sub->parsed()) command = name;

    if (opt.config.empty() && opt.preset.empty())
      throw ValidationError("config", "one of --config or --preset is required");
    cli::json doc = opt.preset.empty() ? cli::load_document(opt.config) : cli::preset(opt.preset);
    if (doc.contains("command") && doc["command"].is_string() && doc["command"] != command)
      std::fprintf(stderr, "fttm: note: scenario was written for '%s'\n",
                   doc["command"].get<std::string>().c_str());
    if (opt.desk) doc = cli::desk_scale(doc);

    std::string out = opt.out;
    if (out.empty() && doc.contains("output_dir") && doc["output_dir"].is_string())
      out = doc["output_dir"].get<std::string>();
    if (out.empty()) out = "fttm_out/" + doc.value("name", command);

    const auto manifest = cli::execute(command, doc, out, opt.desk);
    std::printf("%s: wrote %zu files to %s (%.2f s)\n", command.c_str(), manifest["outputs"].size(), out.c_str(),
                manifest["wall_clock_s"].get<double>());
    return 0;
  } catch (const ValidationError& e) {
    std::fprintf(stderr, "fttm: invalid configuration: %s\n", e.what());
    return kExitValidation;
  } catch (const cli::json::exception& e) {
    std::fprintf(stderr, "fttm: invalid configuration: %s\n", e.what());
    return kExitValidation;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "fttm: error: %s\n", e.what());
    return kExitRuntime;
  }
}
