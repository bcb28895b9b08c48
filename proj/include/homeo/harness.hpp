#pragma once

#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "homeo/config.hpp"
#include "homeo/curiosity.hpp"
#include "homeo/ddpg.hpp"
#include "homeo/replay_buffer.hpp"
#include "homeo/world_models.hpp"

namespace homeo {

struct EpisodeRecord {
  long long episode = 0;
  double mu_ig = 0.0;
  double sigma_ig = 1.0;
  double mean_raw_ig = 0.0;
  // Mean per-step losses over the episode; NaN before training starts.
  double loss_f = 0.0;
  double loss_k = 0.0;
  double loss_critic = 0.0;
  bool top_room = false;
  long long cum_top_room = 0;
  double wall_seconds = 0.0;
};

using MetricsLog = std::vector<EpisodeRecord>;

inline constexpr const char* kMetricsHeader =
    "episode,mu_ig,sigma_ig,mean_raw_ig,loss_f,loss_k,loss_critic,top_room,cum_top_room";

/// Writes one CSV row (no wall-clock, so reruns are byte-identical).
void write_metrics_row(std::ostream& out, const EpisodeRecord& r);

/// Per-episode top-room flag and running total.
class TopRoomCounter {
 public:
  explicit TopRoomCounter(RoomLayout layout) : layout_(std::move(layout)) {}
  /// Counts the episode once if any of its states lies in the Top room.
  bool observe(std::span<const Point> episode_states);
  long long total() const { return total_; }

 private:
  RoomLayout layout_;
  long long total_ = 0;
};

struct TopRoomCount {
  std::vector<bool> flags;
  long long total = 0;
};
TopRoomCount count_top_room(const RoomLayout& layout,
                            std::span<const std::vector<Point>> episode_traces);

struct TrainingOptions {
  /// Forces epsilon = 1 (random baseline).
  bool force_random = false;
  /// Train k and the actor-critic alongside f.
  bool train_policy_and_extended = true;
  /// Streams metrics rows (header first) as episodes complete.
  std::ostream* metrics_out = nullptr;
  /// Directory for the final checkpoint set; empty skips writing.
  std::string checkpoint_dir;
  /// Observer called with each finished episode's states.
  std::function<void(long long, std::span<const Point>)> on_episode;
};

struct TrainingResult {
  ForwardModel forward;
  ExtendedForwardModel extended;
  DdpgAgent agent;
  RewardNormalizer normalizer;
  MetricsLog metrics;
  std::uint64_t transitions_generated = 0;
  std::size_t buffer_size = 0;
};

/// Curiosity-driven training loop: reset, act, step, reward, store, sample,
/// train f / k / actor-critic every step; refresh the normalizer per episode.
class Trainer {
 public:
  Trainer(ExperimentConfig config, TrainingOptions options = {});

  void run_episode();
  void run();
  void save_checkpoints(const std::string& dir) const;

  const ExperimentConfig& config() const { return config_; }
  const ReplayBuffer& buffer() const { return buffer_; }
  const ForwardModel& forward() const { return forward_; }
  const ExtendedForwardModel& extended() const { return extended_; }
  const DdpgAgent& agent() const { return agent_; }
  DdpgAgent& agent() { return agent_; }
  const RewardNormalizer& normalizer() const { return normalizer_; }
  const MetricsLog& metrics() const { return metrics_; }
  long long episodes_done() const { return episode_; }
  std::uint64_t transitions_generated() const { return generated_; }
  /// Last step's per-term errors; exposed for reward tests.
  const IgBreakdown& last_reward() const { return last_reward_; }
  /// Normalized rewards fed to the critic on the last training step.
  const std::vector<double>& last_batch_rewards() const { return last_batch_rewards_; }

  TrainingResult into_result() &&;

 private:
  void train_step(double& loss_f, double& loss_k, double& loss_critic, bool& trained);
  std::vector<double> buffered_raw_ig() const;

  ExperimentConfig config_;
  TrainingOptions options_;
  RoomLayout layout_;
  Alpha alpha_;
  Rng env_rng_;
  Rng explore_rng_;
  Rng replay_rng_;
  ForwardModel forward_;
  ExtendedForwardModel extended_;
  DdpgAgent agent_;
  ReplayBuffer buffer_;
  RewardNormalizer normalizer_;
  TopRoomCounter top_counter_;
  MetricsLog metrics_;
  long long episode_ = 0;
  std::uint64_t generated_ = 0;
  IgBreakdown last_reward_;
  std::vector<double> last_batch_rewards_;
};

TrainingResult run_training(const ExperimentConfig& config, TrainingOptions options = {});

using Predictor = std::function<Point(const Point&, const ActionVec&)>;

/// Per-coordinate MSE (arena units) of `predict` against true transitions on a
/// pool of uniformly drawn states and disc-uniform actions.
double eval_prediction_mse(const RoomLayout& layout, const Predictor& predict,
                           long long pool_size, std::uint64_t seed);
double eval_forward_mse(const ForwardModel& f, const RoomLayout& layout, long long pool_size,
                        std::uint64_t seed);

struct BaselineResult {
  double validation_mse = 0.0;
  long long top_room_total = 0;
  TrainingResult training;
};

/// Same loop as run_training with epsilon forced to 1.
BaselineResult random_baseline(const ExperimentConfig& config, TrainingOptions options = {});

struct FlowRow {
  double x = 0.0;
  double y = 0.0;
  double dx = 0.0;
  double dy = 0.0;
};

/// Policy action at each grid node strictly inside the arena and clear of the
/// walls, rows ordered by y then x.
std::vector<FlowRow> policy_flow_field(const Actor& actor, const RoomLayout& layout,
                                       double grid_step);

struct FlowSummary {
  double door_mean_magnitude = 0.0;
  double arena_mean_magnitude = 0.0;
  std::size_t door_nodes = 0;
  std::size_t arena_nodes = 0;
};
/// Mean action magnitude near door centers (within `radius`) versus everywhere.
FlowSummary summarize_flow_field(std::span<const FlowRow> rows, const RoomLayout& layout,
                                 double radius);

struct SweepRow {
  double alpha = 0.0;
  std::uint64_t seed = 0;
  long long episodes = 0;
  double validation_mse = 0.0;
  long long top_room_total = 0;
  std::string error;  // nonempty when the run failed
};

struct AlphaStats {
  double alpha = 0.0;
  std::size_t runs = 0;
  double mse_mean = 0.0;
  double mse_std = 0.0;
  double top_mean = 0.0;
  double top_std = 0.0;
};

struct SweepSummary {
  std::vector<SweepRow> rows;  // sorted by alpha, then seed
  std::vector<AlphaStats> per_alpha;
};

/// Called for each (alpha, seed) run to pick its output directory; may be empty.
using RunDirFn = std::function<std::string(const ExperimentConfig&)>;

SweepSummary alpha_sweep(const ExperimentConfig& base, std::span<const double> alphas,
                         std::span<const std::uint64_t> seeds, const RunDirFn& run_dir = {});

/// Mean / population std per alpha over successful rows.
std::vector<AlphaStats> summarize_rows(std::span<const SweepRow> rows);

void write_sweep_summary(std::ostream& out, std::span<const SweepRow> rows);
void write_alpha_stats(std::ostream& out, std::span<const AlphaStats> stats);
void write_flow_field(std::ostream& out, std::span<const FlowRow> rows);

}  // namespace homeo
