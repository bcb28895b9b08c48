#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "homeo/config.hpp"

namespace homeo {

inline constexpr const char* kVersionTag = "homeo 1.0.0";

/// Snapshot written into every run directory before work starts.
struct RunManifest {
  std::string command;
  ExperimentConfig config;
  std::string version = kVersionTag;
  std::string started;  // UTC, ISO-8601
  std::vector<std::string> outputs;
};

/// UTC timestamp, compact form used in directory names (YYYYmmddTHHMMSSZ).
std::string compact_timestamp();
std::string iso_timestamp();

/// Creates `<out>/<command>_<alpha>_<seed>_<timestamp>`, adding a numeric
/// suffix if the name is already taken.
std::filesystem::path make_run_dir(const std::filesystem::path& out, const std::string& command,
                                   double alpha, std::uint64_t seed);

/// Writes manifest.txt: `#` metadata lines followed by the config as key=value,
/// so parse_config() on the file reproduces the config.
void write_manifest(const std::filesystem::path& dir, const RunManifest& manifest);

}  // namespace homeo
