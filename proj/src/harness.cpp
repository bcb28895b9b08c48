#include "homeo/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <mutex>
#include <ostream>
#include <thread>

#include "homeo/errors.hpp"

namespace homeo {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double mean_or_nan(double sum, int count) { return count > 0 ? sum / count : kNaN; }

}  // namespace

void write_metrics_row(std::ostream& out, const EpisodeRecord& r) {
  out << r.episode << ',' << format_double(r.mu_ig) << ',' << format_double(r.sigma_ig) << ','
      << format_double(r.mean_raw_ig) << ',' << format_double(r.loss_f) << ','
      << format_double(r.loss_k) << ',' << format_double(r.loss_critic) << ','
      << (r.top_room ? 1 : 0) << ',' << r.cum_top_room << '\n';
}

bool TopRoomCounter::observe(std::span<const Point> episode_states) {
  const bool hit = std::any_of(episode_states.begin(), episode_states.end(), [&](const Point& p) {
    return room_of(layout_, p) == RoomId::Top;
  });
  if (hit) ++total_;
  return hit;
}

TopRoomCount count_top_room(const RoomLayout& layout,
                            std::span<const std::vector<Point>> episode_traces) {
  TopRoomCounter counter(layout);
  TopRoomCount out;
  for (const auto& trace : episode_traces) out.flags.push_back(counter.observe(trace));
  out.total = counter.total();
  return out;
}

Trainer::Trainer(ExperimentConfig config, TrainingOptions options)
    : config_(std::move(config)),
      options_(std::move(options)),
      layout_((config_.validate(), config_.layout())),
      alpha_(config_.alpha),
      env_rng_(Rng::stream(config_.seed, "env")),
      explore_rng_(Rng::stream(config_.seed, "explore")),
      replay_rng_(Rng::stream(config_.seed, "replay")),
      agent_(DdpgConfig{}, Actor(), Critic()),
      buffer_(static_cast<std::size_t>(config_.buffer_capacity)),
      top_counter_(layout_) {
  Rng init = Rng::stream(config_.seed, "init");
  forward_ = ForwardModel::create(init, AdamConfig{config_.lr_forward});
  extended_ = ExtendedForwardModel::create(init, AdamConfig{config_.lr_extended});
  Actor actor = Actor::create(init);
  Critic critic = Critic::create(init);
  agent_ = DdpgAgent(DdpgConfig{config_.gamma, config_.tau, AdamConfig{config_.lr_actor},
                                AdamConfig{config_.lr_critic}},
                     std::move(actor), std::move(critic));
  if (options_.metrics_out) *options_.metrics_out << kMetricsHeader << '\n';
}

std::vector<double> Trainer::buffered_raw_ig() const {
  std::vector<double> values;
  values.reserve(buffer_.size());
  buffer_.for_each([&](const Transition& t) { values.push_back(t.raw_ig); });
  return values;
}

void Trainer::train_step(double& loss_f, double& loss_k, double& loss_critic, bool& trained) {
  trained = false;
  const auto batch_size = static_cast<std::size_t>(config_.batch_size);
  if (buffer_.size() < std::max<std::size_t>(batch_size,
                                             static_cast<std::size_t>(config_.warmup_transitions))) {
    return;
  }
  const auto batch = buffer_.sample(batch_size, replay_rng_);

  std::vector<ModelSample> model_batch;
  std::vector<ModelSample> extended_batch;
  std::vector<CriticSample> critic_batch;
  std::vector<Point> states;
  model_batch.reserve(batch.size());
  critic_batch.reserve(batch.size());
  states.reserve(batch.size());
  last_batch_rewards_.clear();
  for (const auto& item : batch) {
    const Transition& t = item.transition;
    ModelSample m{t.s, t.a, item.next_action.value_or(ActionVec{}), t.s_next};
    model_batch.push_back(m);
    if (item.next_action) extended_batch.push_back(m);
    const double reward = normalizer_.normalize(t.raw_ig);
    last_batch_rewards_.push_back(reward);
    critic_batch.push_back({t.s, t.a, reward, t.s_next, t.done});
    states.push_back(t.s);
  }

  loss_f = forward_.train_step(model_batch);
  if (options_.train_policy_and_extended) {
    loss_k = extended_batch.empty() ? kNaN : extended_.train_step(extended_batch);
    loss_critic = agent_.critic_update(critic_batch);
    agent_.actor_update(states);
    agent_.sync_targets();
  } else {
    loss_k = kNaN;
    loss_critic = kNaN;
  }
  trained = true;
}

void Trainer::run_episode() {
  const auto started = std::chrono::steady_clock::now();
  const int steps = config_.steps_per_episode;
  const double epsilon = options_.force_random ? 1.0 : config_.epsilon;

  std::vector<Point> states;
  states.reserve(static_cast<std::size_t>(steps) + 1);
  Point s = reset(layout_, config_.start_strategy, env_rng_);
  states.push_back(s);

  double raw_sum = 0.0;
  double f_sum = 0.0, k_sum = 0.0, c_sum = 0.0;
  int f_n = 0, k_n = 0, c_n = 0;
  for (int t = 0; t < steps; ++t) {
    try {
      const ActResult act = agent_.act(s, epsilon, explore_rng_);
      const StepOutcome out = step(layout_, s, act.action);
      last_reward_ = compute_raw_ig(s, act.action, out.next, agent_.actor(), forward_, extended_,
                                    alpha_);
      raw_sum += last_reward_.raw_ig;
      buffer_.store({s, act.action, out.next, last_reward_.raw_ig, t == steps - 1, episode_, t});
      ++generated_;

      double lf = kNaN, lk = kNaN, lc = kNaN;
      bool trained = false;
      train_step(lf, lk, lc, trained);
      if (trained) {
        f_sum += lf;
        ++f_n;
        if (!std::isnan(lk)) {
          k_sum += lk;
          ++k_n;
        }
        if (!std::isnan(lc)) {
          c_sum += lc;
          ++c_n;
        }
      }
      s = out.next;
      states.push_back(s);
    } catch (const TrainingError& e) {
      throw TrainingError("episode " + std::to_string(episode_) + " step " + std::to_string(t) +
                          " (transition " + std::to_string(generated_) + "): " + e.what());
    }
  }

  const std::vector<double> raw = buffered_raw_ig();
  normalizer_.update(raw);

  EpisodeRecord rec;
  rec.episode = episode_;
  rec.mu_ig = normalizer_.mean();
  rec.sigma_ig = normalizer_.stddev();
  rec.mean_raw_ig = raw_sum / steps;
  rec.loss_f = mean_or_nan(f_sum, f_n);
  rec.loss_k = mean_or_nan(k_sum, k_n);
  rec.loss_critic = mean_or_nan(c_sum, c_n);
  rec.top_room = top_counter_.observe(states);
  rec.cum_top_room = top_counter_.total();
  rec.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  metrics_.push_back(rec);
  if (options_.metrics_out) write_metrics_row(*options_.metrics_out, rec);
  if (options_.on_episode) options_.on_episode(episode_, states);

  ++episode_;
  if (config_.checkpoint_interval > 0 && !options_.checkpoint_dir.empty() &&
      episode_ % config_.checkpoint_interval == 0 && episode_ < config_.episodes) {
    const auto dir = std::filesystem::path(options_.checkpoint_dir) / "checkpoints" /
                     ("episode_" + std::to_string(episode_));
    std::filesystem::create_directories(dir);
    save_checkpoints(dir.string());
  }
}

void Trainer::run() {
  while (episode_ < config_.episodes) run_episode();
  if (options_.metrics_out) options_.metrics_out->flush();
  if (!options_.checkpoint_dir.empty()) save_checkpoints(options_.checkpoint_dir);
}

void Trainer::save_checkpoints(const std::string& dir) const {
  const std::filesystem::path base(dir);
  save_checkpoint((base / "forward.ckpt").string(), forward_.net());
  save_checkpoint((base / "extended.ckpt").string(), extended_.net());
  agent_.save(dir);
}

TrainingResult Trainer::into_result() && {
  TrainingResult r{std::move(forward_), std::move(extended_), std::move(agent_), normalizer_,
                   std::move(metrics_), generated_, buffer_.size()};
  return r;
}

TrainingResult run_training(const ExperimentConfig& config, TrainingOptions options) {
  Trainer trainer(config, std::move(options));
  trainer.run();
  return std::move(trainer).into_result();
}

double eval_prediction_mse(const RoomLayout& layout, const Predictor& predict,
                           long long pool_size, std::uint64_t seed) {
  if (pool_size < 1) throw ContractViolation("eval: pool size must be >= 1");
  Rng rng = Rng::stream(seed, "validation");
  double sum = 0.0;
  for (long long i = 0; i < pool_size; ++i) {
    const Point s = reset(layout, StartStrategy::UniformAnywhere, rng);
    const ActionVec a = random_action(rng);
    const Point truth = step(layout, s, a).next;
    const Point guess = predict(s, a);
    const double ex = guess.x - truth.x;
    const double ey = guess.y - truth.y;
    sum += ex * ex + ey * ey;
  }
  return sum / (2.0 * static_cast<double>(pool_size));
}

double eval_forward_mse(const ForwardModel& f, const RoomLayout& layout, long long pool_size,
                        std::uint64_t seed) {
  return eval_prediction_mse(
      layout, [&f](const Point& s, const ActionVec& a) { return f.predict(s, a); }, pool_size,
      seed);
}

BaselineResult random_baseline(const ExperimentConfig& config, TrainingOptions options) {
  options.force_random = true;
  options.train_policy_and_extended = config.baseline_train_all;
  TrainingResult training = run_training(config, std::move(options));
  BaselineResult out{0.0, 0, std::move(training)};
  out.validation_mse = eval_forward_mse(out.training.forward, config.layout(),
                                        config.validation_pool, config.validation_seed);
  out.top_room_total =
      out.training.metrics.empty() ? 0 : out.training.metrics.back().cum_top_room;
  return out;
}

std::vector<FlowRow> policy_flow_field(const Actor& actor, const RoomLayout& layout,
                                       double grid_step) {
  if (!(grid_step > 0.0)) throw ContractViolation("flow field: grid step must be > 0");
  std::vector<FlowRow> rows;
  const auto n = static_cast<long long>(std::floor(kArenaSize / grid_step));
  for (long long iy = 1; iy <= n; ++iy) {
    const double y = static_cast<double>(iy) * grid_step;
    if (y >= kArenaSize) break;
    for (long long ix = 1; ix <= n; ++ix) {
      const double x = static_cast<double>(ix) * grid_step;
      if (x >= kArenaSize) break;
      const Point p{x, y};
      if (distance_to_walls(layout, p) <= kWallClearance) continue;
      const ActionVec a = actor.policy_action(p);
      rows.push_back({x, y, a.dx, a.dy});
    }
  }
  return rows;
}

FlowSummary summarize_flow_field(std::span<const FlowRow> rows, const RoomLayout& layout,
                                 double radius) {
  std::vector<Point> doors;
  for (const Wall& w : layout.walls) doors.push_back({(w.door_lo + w.door_hi) / 2.0, w.y});
  FlowSummary out;
  double door_sum = 0.0, all_sum = 0.0;
  for (const FlowRow& r : rows) {
    const double mag = std::hypot(r.dx, r.dy);
    all_sum += mag;
    ++out.arena_nodes;
    const bool near = std::any_of(doors.begin(), doors.end(), [&](const Point& d) {
      return distance(d, Point{r.x, r.y}) <= radius;
    });
    if (near) {
      door_sum += mag;
      ++out.door_nodes;
    }
  }
  out.arena_mean_magnitude = out.arena_nodes ? all_sum / out.arena_nodes : kNaN;
  out.door_mean_magnitude = out.door_nodes ? door_sum / out.door_nodes : kNaN;
  return out;
}

std::vector<AlphaStats> summarize_rows(std::span<const SweepRow> rows) {
  std::map<double, std::vector<const SweepRow*>> groups;
  for (const auto& r : rows) {
    if (r.error.empty()) groups[r.alpha].push_back(&r);
  }
  std::vector<AlphaStats> out;
  for (const auto& [alpha, group] : groups) {
    AlphaStats s;
    s.alpha = alpha;
    s.runs = group.size();
    const double n = static_cast<double>(group.size());
    for (const auto* r : group) {
      s.mse_mean += r->validation_mse / n;
      s.top_mean += static_cast<double>(r->top_room_total) / n;
    }
    for (const auto* r : group) {
      s.mse_std += (r->validation_mse - s.mse_mean) * (r->validation_mse - s.mse_mean) / n;
      const double dt = static_cast<double>(r->top_room_total) - s.top_mean;
      s.top_std += dt * dt / n;
    }
    s.mse_std = std::sqrt(s.mse_std);
    s.top_std = std::sqrt(s.top_std);
    out.push_back(s);
  }
  return out;
}

SweepSummary alpha_sweep(const ExperimentConfig& base, std::span<const double> alphas,
                         std::span<const std::uint64_t> seeds, const RunDirFn& run_dir) {
  if (alphas.empty() || seeds.empty()) {
    throw ConfigError("sweep: alpha and seed lists must be nonempty");
  }
  std::vector<ExperimentConfig> jobs;
  for (double a : alphas) {
    for (std::uint64_t s : seeds) {
      ExperimentConfig c = base;
      c.alpha = a;
      c.seed = s;
      jobs.push_back(c);
    }
  }

  std::vector<SweepRow> rows(jobs.size());
  auto run_one = [&](std::size_t i) {
    const ExperimentConfig& c = jobs[i];
    SweepRow& row = rows[i];
    row.alpha = c.alpha;
    row.seed = c.seed;
    row.episodes = c.episodes;
    try {
      TrainingOptions opts;
      std::ofstream metrics;
      if (run_dir) {
        const std::string dir = run_dir(c);
        if (!dir.empty()) {
          metrics.open(std::filesystem::path(dir) / "metrics.csv", std::ios::binary);
          if (!metrics) throw IoError("cannot write metrics in " + dir);
          opts.metrics_out = &metrics;
          opts.checkpoint_dir = dir;
        }
      }
      TrainingResult r = run_training(c, std::move(opts));
      row.validation_mse =
          eval_forward_mse(r.forward, c.layout(), c.validation_pool, c.validation_seed);
      row.top_room_total = r.metrics.empty() ? 0 : r.metrics.back().cum_top_room;
    } catch (const std::exception& e) {
      row.error = e.what();
      row.validation_mse = kNaN;
    }
  };

  const auto workers = std::min<std::size_t>(static_cast<std::size_t>(base.sweep_threads),
                                              jobs.size());
  if (workers <= 1) {
    for (std::size_t i = 0; i < jobs.size(); ++i) run_one(i);
  } else {
    std::mutex m;
    std::size_t next = 0;
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (;;) {
          std::size_t i;
          {
            std::lock_guard lock(m);
            if (next >= jobs.size()) return;
            i = next++;
          }
          run_one(i);
        }
      });
    }
  }

  std::stable_sort(rows.begin(), rows.end(), [](const SweepRow& a, const SweepRow& b) {
    return a.alpha != b.alpha ? a.alpha < b.alpha : a.seed < b.seed;
  });
  SweepSummary out;
  out.rows = std::move(rows);
  out.per_alpha = summarize_rows(out.rows);
  return out;
}

void write_sweep_summary(std::ostream& out, std::span<const SweepRow> rows) {
  out << "alpha,seed,episodes,validation_mse,top_room_total\n";
  for (const auto& r : rows) {
    out << format_double(r.alpha) << ',' << r.seed << ',' << r.episodes << ','
        << format_double(r.validation_mse) << ',' << r.top_room_total << '\n';
  }
}

void write_alpha_stats(std::ostream& out, std::span<const AlphaStats> stats) {
  out << "alpha,runs,mse_mean,mse_std,top_room_mean,top_room_std\n";
  for (const auto& s : stats) {
    out << format_double(s.alpha) << ',' << s.runs << ',' << format_double(s.mse_mean) << ','
        << format_double(s.mse_std) << ',' << format_double(s.top_mean) << ','
        << format_double(s.top_std) << '\n';
  }
}

void write_flow_field(std::ostream& out, std::span<const FlowRow> rows) {
  out << "x,y,dx,dy\n";
  for (const auto& r : rows) {
    out << format_double(r.x) << ',' << format_double(r.y) << ',' << format_double(r.dx) << ','
        << format_double(r.dy) << '\n';
  }
}

}  // namespace homeo
