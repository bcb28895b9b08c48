// Acceptance suite: one PASS/FAIL line per criterion. `--only 1,3` limits the
// run to the listed criteria (criterion 8 reuses the runs of criterion 5).

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <iostream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "homeo/curiosity.hpp"
#include "homeo/harness.hpp"
#include "oracles.hpp"

using namespace homeo;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

// Tolerances and budgets, fixed.
constexpr double kGradTolerance = 1e-4;
constexpr double kFiniteDiffStep = 1e-5;
constexpr int kGradArchitectures = 10;
constexpr int kGeometrySteps = 100000;
constexpr double kExactTolerance = 1e-12;
constexpr double kNormalizationTolerance = 1e-9;
constexpr double kSanityDistance = 5.0;
constexpr int kSanityEpisodes = 3000;
constexpr int kSanityEvalEvery = 250;
constexpr int kSanityEvalEpisodes = 100;
constexpr int kSanitySeedsRequired = 2;
constexpr long long kExperimentEpisodes = 10000;
constexpr long long kValidationPool = 100000;
const std::vector<std::uint64_t> kSeeds{1, 2, 3};

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt(double v, int prec = 4) {
  std::ostringstream ss;
  ss.precision(prec);
  ss << v;
  return ss.str();
}

Eigen::MatrixXd random_matrix(Rng& rng, Eigen::Index rows, Eigen::Index cols, double scale) {
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index c = 0; c < cols; ++c)
    for (Eigen::Index r = 0; r < rows; ++r) m(r, c) = rng.uniform(-scale, scale);
  return m;
}

// 1. Gradient correctness against central finite differences.
Outcome gradient_correctness() {
  const auto t0 = std::chrono::steady_clock::now();
  Rng rng(20240601);
  double worst_params = 0.0, worst_input = 0.0;
  for (int trial = 0; trial < kGradArchitectures; ++trial) {
    std::vector<int> sizes;
    const int depth = 2 + static_cast<int>(rng.below(3));
    for (int i = 0; i <= depth; ++i) sizes.push_back(1 + static_cast<int>(rng.below(12)));
    const Activation hidden = trial % 2 ? Activation::Relu : Activation::Tanh;
    const Activation output = trial % 3 ? Activation::Linear : Activation::Tanh;
    DenseNet net = DenseNet::init(sizes, hidden, output, rng);
    for (auto& l : net.layers()) l.bias = random_matrix(rng, l.bias.size(), 1, 0.1);
    const Eigen::MatrixXd input = random_matrix(rng, net.input_size(), 4, 1.0);
    const Eigen::MatrixXd weights = random_matrix(rng, net.output_size(), 4, 1.0);
    worst_params = std::max(
        worst_params, oracle::max_param_gradient_error(net, input, weights, kFiniteDiffStep));
    worst_input = std::max(
        worst_input, oracle::max_input_gradient_error(net, input, weights, kFiniteDiffStep));
  }
  const double elapsed = seconds_since(t0);
  return {worst_params < kGradTolerance && worst_input < kGradTolerance && elapsed < 60.0,
          "max rel err params=" + fmt(worst_params) + " input=" + fmt(worst_input) +
              " (tol " + fmt(kGradTolerance) + "), " + fmt(elapsed, 3) + "s"};
}

// 2. Geometry soundness over random steps.
Outcome geometry_soundness() {
  const auto t0 = std::chrono::steady_clock::now();
  const RoomLayout layout = RoomLayout::three_rooms();
  Rng rng(77);
  int out_of_bounds = 0, crossings = 0, nondeterministic = 0, too_long = 0;
  for (int i = 0; i < kGeometrySteps; ++i) {
    const Point s = reset(layout, StartStrategy::UniformAnywhere, rng);
    // Mix disc-uniform actions with over-long raw actions pushed through the clamp.
    const ActionVec a = i % 2 ? random_action(rng)
                              : clamp_action(rng.uniform(-30, 30), rng.uniform(-30, 30));
    const StepOutcome o = step(layout, s, a);
    const Point n = o.next;
    if (n.x < 0 || n.x > kArenaSize || n.y < 0 || n.y > kArenaSize) ++out_of_bounds;
    if (oracle::motion_touches_wall(layout, s, n)) ++crossings;
    const auto hit = segment_wall_intersection(layout, s, n);
    if (hit) ++crossings;
    if (!(step(layout, s, a).next == n)) ++nondeterministic;
    if (distance(s, n) > norm(a) + 1e-12) ++too_long;
  }
  const double elapsed = seconds_since(t0);
  const bool ok = !out_of_bounds && !crossings && !nondeterministic && !too_long && elapsed < 60.0;
  return {ok, std::to_string(kGeometrySteps) + " steps: out_of_bounds=" +
                  std::to_string(out_of_bounds) + " crossings=" + std::to_string(crossings) +
                  " nondeterministic=" + std::to_string(nondeterministic) +
                  " over_length=" + std::to_string(too_long) + ", " + fmt(elapsed, 3) + "s"};
}

// 3. Reward arithmetic.
Outcome reward_arithmetic() {
  std::vector<std::string> failures;
  auto expect = [&](const char* what, double got, double want, double tol) {
    if (!(std::abs(got - want) <= tol)) failures.push_back(what);
  };
  expect("alpha=0", ig_alpha(2.0, 0.9, Alpha(0.0)), 2.0, kExactTolerance);
  expect("cancel", ig_alpha(1.5, 1.5, Alpha(1.0)), 0.0, kExactTolerance);
  expect("alpha=7", ig_alpha(3.0, 0.5, Alpha(7.0)), -0.5, kExactTolerance);
  RewardNormalizer n;
  n.update(std::vector<double>{1, 2, 3});
  expect("mu", n.mean(), 2.0, kExactTolerance);
  expect("sigma", n.stddev(), std::sqrt(2.0 / 3.0), kExactTolerance);
  expect("z(3)", n.normalize(3.0), 1.0 / std::sqrt(2.0 / 3.0), kExactTolerance);

  Rng rng(5);
  double worst_mean = 0.0, worst_std = 0.0;
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<double> values(2 + rng.below(2000));
    const double shift = rng.uniform(-100, 100), scale = rng.uniform(1e-3, 50);
    for (double& v : values) v = shift + scale * rng.uniform(-1, 1);
    RewardNormalizer fresh;
    fresh.update(values);
    std::vector<double> z;
    for (double v : values) z.push_back(fresh.normalize(v));
    const auto [mu, sigma] = oracle::population_stats(z);
    worst_mean = std::max(worst_mean, std::abs(mu));
    worst_std = std::max(worst_std, std::abs(sigma - 1.0));
  }
  if (worst_mean >= kNormalizationTolerance) failures.push_back("normalized mean");
  if (worst_std >= kNormalizationTolerance) failures.push_back("normalized std");
  std::string detail = "examples exact to " + fmt(kExactTolerance) + "; normalized |mean|<=" +
                       fmt(worst_mean) + " |std-1|<=" + fmt(worst_std);
  for (const auto& f : failures) detail += " FAILED:" + f;
  return {failures.empty(), detail};
}

// 4. DDPG sanity: goal reaching with an extrinsic reward in an empty arena.
struct SanityRun {
  bool reached = false;
  int episodes_needed = -1;
  double best = 1e9;
};

double evaluate_goal_policy(const DdpgAgent& agent, const RoomLayout& layout, const Point& goal,
                            int steps, std::uint64_t seed) {
  Rng rng = Rng::stream(seed, "sanity-eval");
  double total = 0.0;
  for (int e = 0; e < kSanityEvalEpisodes; ++e) {
    Point s = reset(layout, StartStrategy::UniformAnywhere, rng);
    for (int t = 0; t < steps; ++t) s = step(layout, s, agent.policy_action(s)).next;
    total += distance(s, goal);
  }
  return total / kSanityEvalEpisodes;
}

SanityRun sanity_run(std::uint64_t seed) {
  const ExperimentConfig c;  // defaults: gamma 1, tau 1e-3, batch 64, warmup 1000, eps 0.5
  const RoomLayout layout = RoomLayout::open_arena();
  const Point goal{28.0, 12.0};
  Rng init = Rng::stream(seed, "init"), env = Rng::stream(seed, "env"),
      explore = Rng::stream(seed, "explore"), replay = Rng::stream(seed, "replay");
  DdpgAgent agent(DdpgConfig{c.gamma, c.tau, AdamConfig{c.lr_actor}, AdamConfig{c.lr_critic}},
                  init);
  ReplayBuffer buffer(static_cast<std::size_t>(c.buffer_capacity));
  SanityRun out;
  for (int e = 0; e < kSanityEpisodes; ++e) {
    Point s = reset(layout, StartStrategy::UniformAnywhere, env);
    for (int t = 0; t < c.steps_per_episode; ++t) {
      const ActResult act = agent.act(s, c.epsilon, explore);
      const Point next = step(layout, s, act.action).next;
      const double reward = -distance(next, goal) / kArenaSize;
      buffer.store({s, act.action, next, reward, t == c.steps_per_episode - 1, e, t});
      if (buffer.size() >= static_cast<std::size_t>(c.warmup_transitions)) {
        const auto batch = buffer.sample(static_cast<std::size_t>(c.batch_size), replay);
        std::vector<CriticSample> cs;
        std::vector<Point> states;
        for (const auto& b : batch) {
          const Transition& tr = b.transition;
          cs.push_back({tr.s, tr.a, tr.raw_ig, tr.s_next, tr.done});
          states.push_back(tr.s);
        }
        agent.critic_update(cs);
        agent.actor_update(states);
        agent.sync_targets();
      }
      s = next;
    }
    if ((e + 1) % kSanityEvalEvery == 0) {
      const double d = evaluate_goal_policy(agent, layout, goal, c.steps_per_episode, seed);
      out.best = std::min(out.best, d);
      if (d < kSanityDistance && !out.reached) {
        out.reached = true;
        out.episodes_needed = e + 1;
        break;
      }
    }
  }
  return out;
}

Outcome learner_sanity() {
  const auto t0 = std::chrono::steady_clock::now();
  int successes = 0;
  std::string detail;
  for (std::uint64_t seed : kSeeds) {
    const SanityRun r = sanity_run(seed);
    successes += r.reached;
    detail += "seed " + std::to_string(seed) + ": " +
              (r.reached ? "below " + fmt(kSanityDistance) + " after " +
                               std::to_string(r.episodes_needed) + " episodes"
                         : "best mean final distance " + fmt(r.best)) +
              "; ";
  }
  detail += std::to_string(successes) + "/3 seeds, " + fmt(seconds_since(t0), 3) + "s";
  return {successes >= kSanitySeedsRequired, detail};
}

// 5, 6, 8. Desk-scale experiments.
struct RunRecord {
  long long top_room_total = 0;
  double validation_mse = 0.0;
  std::vector<FlowRow> flow;
};

RunRecord experiment_run(double alpha, std::uint64_t seed, StartStrategy start, bool random,
                         bool keep_flow) {
  ExperimentConfig c;
  c.alpha = alpha;
  c.seed = seed;
  c.episodes = kExperimentEpisodes;
  c.start_strategy = start;
  c.validation_pool = kValidationPool;
  const auto t0 = std::chrono::steady_clock::now();
  RunRecord rec;
  if (random) {
    const BaselineResult b = random_baseline(c);
    rec.top_room_total = b.top_room_total;
    rec.validation_mse = b.validation_mse;
  } else {
    const TrainingResult r = run_training(c);
    rec.top_room_total = r.metrics.back().cum_top_room;
    rec.validation_mse = eval_forward_mse(r.forward, c.layout(), c.validation_pool,
                                          c.validation_seed);
    if (keep_flow) rec.flow = policy_flow_field(r.agent.actor(), c.layout(), c.flow_grid_step);
  }
  std::cerr << "  run " << (random ? "random" : "alpha=" + fmt(alpha)) << " seed=" << seed
            << " start=" << to_string(start) << ": top=" << rec.top_room_total
            << " mse=" << fmt(rec.validation_mse) << " (" << fmt(seconds_since(t0), 4) << "s)\n";
  return rec;
}

double mean_of(const std::vector<double>& xs) {
  double s = 0.0;
  for (double x : xs) s += x;
  return s / static_cast<double>(xs.size());
}

std::string list(const std::vector<double>& xs) {
  std::string out = "[";
  for (std::size_t i = 0; i < xs.size(); ++i) out += (i ? " " : "") + fmt(xs[i]);
  return out + "]";
}

}  // namespace

int main(int argc, char** argv) {
  std::set<int> only;
  for (int i = 1; i < argc; ++i) {
    if (std::string(argv[i]) == "--only" && i + 1 < argc) {
      std::stringstream ss(argv[++i]);
      std::string tok;
      while (std::getline(ss, tok, ',')) only.insert(std::stoi(tok));
    }
  }
  auto wanted = [&](int c) { return only.empty() || only.count(c); };

  std::map<int, Outcome> results;
  auto report = [&](int id, const char* name, const Outcome& o) {
    results[id] = o;
    std::printf("[%s] criterion %d (%s): %s\n", o.pass ? "PASS" : "FAIL", id, name,
                o.detail.c_str());
    std::fflush(stdout);
  };

  if (wanted(1)) report(1, "gradient correctness", gradient_correctness());
  if (wanted(2)) report(2, "geometry soundness", geometry_soundness());
  if (wanted(3)) report(3, "reward arithmetic", reward_arithmetic());
  if (wanted(7)) {
    ExperimentConfig c;
    c.episodes = 300;
    c.alpha = 7.0;
    c.seed = 11;
    std::ostringstream a, b;
    TrainingOptions oa, ob;
    oa.metrics_out = &a;
    ob.metrics_out = &b;
    run_training(c, std::move(oa));
    run_training(c, std::move(ob));
    report(7, "reproducibility",
           {a.str() == b.str() && !a.str().empty(),
            "two 300-episode runs, metrics " + std::to_string(a.str().size()) + " bytes, " +
                (a.str() == b.str() ? "byte-identical" : "DIFFERENT")});
  }
  if (wanted(4)) report(4, "learner sanity", learner_sanity());

  if (wanted(5) || wanted(8)) {
    std::vector<double> top0, top7, top_random;
    std::vector<RunRecord> alpha7_runs;
    for (std::uint64_t seed : kSeeds) {
      top0.push_back(static_cast<double>(
          experiment_run(0.0, seed, StartStrategy::UniformBottomRoom, false, false).top_room_total));
      RunRecord r7 = experiment_run(7.0, seed, StartStrategy::UniformBottomRoom, false, true);
      top7.push_back(static_cast<double>(r7.top_room_total));
      alpha7_runs.push_back(std::move(r7));
      top_random.push_back(static_cast<double>(
          experiment_run(0.0, seed, StartStrategy::UniformBottomRoom, true, false).top_room_total));
    }
    const double m0 = mean_of(top0), m7 = mean_of(top7), mr = mean_of(top_random);
    if (wanted(5)) {
      report(5, "top-room trend",
             {m7 > m0 && m0 > mr && m7 > mr,
              "mean top-room reaches over " + std::to_string(kExperimentEpisodes) +
                  " episodes: alpha=7 " + fmt(m7) + " " + list(top7) + ", alpha=0 " + fmt(m0) +
                  " " + list(top0) + ", random " + fmt(mr) + " " + list(top_random)});
    }
    if (wanted(8)) {
      const RoomLayout layout = RoomLayout::three_rooms();
      const ExperimentConfig defaults;
      std::string detail;
      for (std::size_t i = 0; i < alpha7_runs.size(); ++i) {
        const FlowSummary s =
            summarize_flow_field(alpha7_runs[i].flow, layout, defaults.flow_door_radius);
        detail += "seed " + std::to_string(kSeeds[i]) + ": door-vicinity mean |a|=" +
                  fmt(s.door_mean_magnitude) + " (" + std::to_string(s.door_nodes) +
                  " nodes), arena mean |a|=" + fmt(s.arena_mean_magnitude) + " (" +
                  std::to_string(s.arena_nodes) + " nodes); ";
      }
      report(8, "flow-field report (alpha=7, informational)", {true, detail});
    }
  }

  if (wanted(6)) {
    std::vector<double> mse0, mse7;
    for (std::uint64_t seed : kSeeds) {
      mse0.push_back(
          experiment_run(0.0, seed, StartStrategy::UniformAnywhere, false, false).validation_mse);
      mse7.push_back(
          experiment_run(7.0, seed, StartStrategy::UniformAnywhere, false, false).validation_mse);
    }
    const double m0 = mean_of(mse0), m7 = mean_of(mse7);
    report(6, "forward-model MSE trend",
           {m7 < m0, "mean validation MSE: alpha=7 " + fmt(m7) + " " + list(mse7) + ", alpha=0 " +
                         fmt(m0) + " " + list(mse0)});
  }

  int failed = 0;
  for (const auto& [id, o] : results) failed += !o.pass;
  std::printf("acceptance: %zu criteria run, %d failed\n", results.size(), failed);
  return failed == 0 ? 0 : 1;
}
