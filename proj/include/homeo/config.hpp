#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "homeo/geometry.hpp"

namespace homeo {

/// Full hyper-parameter record for one run (and the sweep around it).
struct ExperimentConfig {
  double alpha = 1.0;
  long long episodes = 10000;
  int steps_per_episode = 10;
  double max_step_len = kMaxStepLength;
  double epsilon = 0.5;
  StartStrategy start_strategy = StartStrategy::UniformAnywhere;
  std::uint64_t seed = 1;

  double gamma = 1.0;
  double tau = 0.001;
  int batch_size = 64;
  long long buffer_capacity = 1000000;
  long long warmup_transitions = 1000;
  double lr_forward = 1e-3;
  double lr_extended = 1e-3;
  double lr_critic = 1e-3;
  double lr_actor = 1e-4;

  long long validation_pool = 100000;
  std::uint64_t validation_seed = 2024;

  // Layout overrides.
  double wall1_y = kArenaSize / 3.0;
  double door1_lo = 8.0;
  double door1_hi = 12.0;
  double wall2_y = 2.0 * kArenaSize / 3.0;
  double door2_lo = 28.0;
  double door2_hi = 32.0;

  /// Episodes between intermediate checkpoints; 0 writes only the final set.
  long long checkpoint_interval = 0;
  /// Random baseline: also train k and the actor-critic (behavior unaffected).
  bool baseline_train_all = false;

  std::vector<double> sweep_alphas{0, 1, 2, 3, 4, 5, 6, 7};
  std::vector<std::uint64_t> sweep_seeds{1, 2, 3};
  int sweep_threads = 1;

  double flow_grid_step = 2.0;
  double flow_door_radius = 3.0;

  std::string forward_checkpoint;
  std::string actor_checkpoint;

  RoomLayout layout() const;
  /// Throws ConfigError naming the first offending key.
  void validate() const;

  /// Every key with its value, in a stable order; doubles round-trip exactly.
  std::vector<std::pair<std::string, std::string>> to_key_values() const;

  friend bool operator==(const ExperimentConfig&, const ExperimentConfig&) = default;
};

/// Parses `key=value` lines (`#` comments, blank lines ignored) into a map.
/// Throws ConfigError on malformed lines or duplicate keys.
std::map<std::string, std::string> parse_key_values(const std::string& text);

/// Applies key/value pairs on top of `base`. Unknown keys, unparsable values,
/// and out-of-range values throw ConfigError naming the key.
ExperimentConfig apply_overrides(ExperimentConfig base,
                                 const std::map<std::string, std::string>& values);

/// Defaults, then the optional file, then flag overrides; validated.
ExperimentConfig parse_config(const std::optional<std::filesystem::path>& file,
                              const std::map<std::string, std::string>& flag_overrides = {});

std::string to_config_text(const ExperimentConfig& config);

/// Shortest decimal string that parses back to the same double.
std::string format_double(double v);

}  // namespace homeo
