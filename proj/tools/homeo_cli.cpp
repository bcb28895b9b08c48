// Command-line driver: train | sweep | eval | baseline | flowfield.

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>

#include "homeo/config.hpp"
#include "homeo/errors.hpp"
#include "homeo/harness.hpp"
#include "homeo/run_io.hpp"

namespace fs = std::filesystem;
using namespace homeo;

namespace {

enum ExitCode : int {
  kOk = 0,
  kUsage = 1,
  kConfig = 2,
  kIo = 3,
  kTraining = 4,
  kInternal = 5,
};

std::ofstream open_out(const fs::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  return out;
}

fs::path start_run(const std::string& command, const ExperimentConfig& config, const fs::path& out,
                   std::vector<std::string> outputs) {
  const fs::path dir = make_run_dir(out, command, config.alpha, config.seed);
  write_manifest(dir, {command, config, kVersionTag, iso_timestamp(), std::move(outputs)});
  return dir;
}

const std::vector<std::string> kCheckpointFiles = {
    "forward.ckpt", "extended.ckpt",     "actor.ckpt",
    "critic.ckpt",  "actor_target.ckpt", "critic_target.ckpt"};

std::vector<std::string> with_checkpoints(std::vector<std::string> files) {
  files.insert(files.end(), kCheckpointFiles.begin(), kCheckpointFiles.end());
  return files;
}

int cmd_train(const ExperimentConfig& config, const fs::path& out) {
  const fs::path dir = start_run("train", config, out, with_checkpoints({"metrics.csv"}));
  auto metrics = open_out(dir / "metrics.csv");
  TrainingOptions opts;
  opts.metrics_out = &metrics;
  opts.checkpoint_dir = dir.string();
  const TrainingResult r = run_training(config, std::move(opts));
  std::cout << "run_dir=" << dir.string() << '\n'
            << "episodes=" << r.metrics.size() << '\n'
            << "top_room_total=" << (r.metrics.empty() ? 0 : r.metrics.back().cum_top_room)
            << '\n';
  return kOk;
}

int cmd_baseline(const ExperimentConfig& config, const fs::path& out) {
  const fs::path dir =
      start_run("baseline", config, out, with_checkpoints({"metrics.csv", "baseline.csv"}));
  auto metrics = open_out(dir / "metrics.csv");
  TrainingOptions opts;
  opts.metrics_out = &metrics;
  opts.checkpoint_dir = dir.string();
  const BaselineResult r = random_baseline(config, std::move(opts));
  auto csv = open_out(dir / "baseline.csv");
  csv << "validation_mse,top_room_total\n"
      << format_double(r.validation_mse) << ',' << r.top_room_total << '\n';
  std::cout << "run_dir=" << dir.string() << '\n'
            << "validation_mse=" << format_double(r.validation_mse) << '\n'
            << "top_room_total=" << r.top_room_total << '\n';
  return kOk;
}

int cmd_sweep(const ExperimentConfig& config, const fs::path& out) {
  const fs::path root = out / ("sweep_" + compact_timestamp());
  fs::create_directories(root);
  write_manifest(root, {"sweep", config, kVersionTag, iso_timestamp(),
                        {"sweep_summary.csv", "sweep_alpha_stats.csv"}});
  const RunDirFn run_dir = [&root](const ExperimentConfig& c) {
    const fs::path dir = make_run_dir(root, "sweep", c.alpha, c.seed);
    write_manifest(dir, {"sweep", c, kVersionTag, iso_timestamp(),
                         with_checkpoints({"metrics.csv"})});
    return dir.string();
  };
  const SweepSummary summary =
      alpha_sweep(config, config.sweep_alphas, config.sweep_seeds, run_dir);
  {
    auto csv = open_out(root / "sweep_summary.csv");
    write_sweep_summary(csv, summary.rows);
  }
  {
    auto csv = open_out(root / "sweep_alpha_stats.csv");
    write_alpha_stats(csv, summary.per_alpha);
  }
  std::cout << "sweep_dir=" << root.string() << '\n';
  write_alpha_stats(std::cout, summary.per_alpha);
  int failures = 0;
  for (const auto& row : summary.rows) {
    if (!row.error.empty()) {
      ++failures;
      std::cerr << "run alpha=" << format_double(row.alpha) << " seed=" << row.seed
                << " failed: " << row.error << '\n';
    }
  }
  return failures == 0 ? kOk : kTraining;
}

int cmd_eval(const ExperimentConfig& config, const fs::path& out) {
  if (config.forward_checkpoint.empty()) {
    throw ConfigError("config key 'forward_checkpoint': required by eval");
  }
  ForwardModel f(load_checkpoint(config.forward_checkpoint), AdamConfig{});
  const double mse =
      eval_forward_mse(f, config.layout(), config.validation_pool, config.validation_seed);
  const fs::path dir = start_run("eval", config, out, {"eval.csv"});
  auto csv = open_out(dir / "eval.csv");
  csv << "validation_mse\n" << format_double(mse) << '\n';
  std::cout << format_double(mse) << '\n';
  return kOk;
}

int cmd_flowfield(const ExperimentConfig& config, const fs::path& out) {
  const bool train_first = config.actor_checkpoint.empty();
  std::vector<std::string> outputs = {"flowfield.csv"};
  if (train_first) outputs = with_checkpoints({"flowfield.csv", "metrics.csv"});
  const fs::path dir = start_run("flowfield", config, out, outputs);

  Actor actor;
  if (train_first) {
    auto metrics = open_out(dir / "metrics.csv");
    TrainingOptions opts;
    opts.metrics_out = &metrics;
    opts.checkpoint_dir = dir.string();
    actor = run_training(config, std::move(opts)).agent.actor();
  } else {
    actor = Actor(load_checkpoint(config.actor_checkpoint));
  }
  const auto rows = policy_flow_field(actor, config.layout(), config.flow_grid_step);
  auto csv = open_out(dir / "flowfield.csv");
  write_flow_field(csv, rows);
  const FlowSummary s = summarize_flow_field(rows, config.layout(), config.flow_door_radius);
  std::cout << "run_dir=" << dir.string() << '\n'
            << "door_mean_magnitude=" << format_double(s.door_mean_magnitude) << " ("
            << s.door_nodes << " nodes)\n"
            << "arena_mean_magnitude=" << format_double(s.arena_mean_magnitude) << " ("
            << s.arena_nodes << " nodes)\n";
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Curiosity with homeostatic regulation: training and experiments"};
  std::string command;
  std::optional<std::string> config_path;
  std::optional<double> alpha;
  std::optional<std::uint64_t> seed;
  std::optional<long long> episodes;
  std::string out = "runs";

  app.add_option("command", command, "train | sweep | eval | baseline | flowfield")
      ->required()
      ->check(CLI::IsMember({"train", "sweep", "eval", "baseline", "flowfield"}));
  app.add_option("--config", config_path, "key=value config file");
  app.add_option("--alpha", alpha, "homeostatic weight (overrides config)");
  app.add_option("--seed", seed, "global seed (overrides config)");
  app.add_option("--episodes", episodes, "episode budget (overrides config)");
  app.add_option("--out", out, "output directory")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    if (rc == 0) return kOk;
    std::cerr << app.help();
    return kUsage;
  }

  try {
    std::map<std::string, std::string> overrides;
    if (alpha) overrides["alpha"] = format_double(*alpha);
    if (seed) overrides["seed"] = std::to_string(*seed);
    if (episodes) overrides["episodes"] = std::to_string(*episodes);
    std::optional<fs::path> file;
    if (config_path) file = fs::path(*config_path);
    const ExperimentConfig config = parse_config(file, overrides);

    if (command == "train") return cmd_train(config, out);
    if (command == "baseline") return cmd_baseline(config, out);
    if (command == "sweep") return cmd_sweep(config, out);
    if (command == "eval") return cmd_eval(config, out);
    return cmd_flowfield(config, out);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfig;
  } catch (const IoError& e) {
    std::cerr << "io error: " << e.what() << '\n';
    return kIo;
  } catch (const fs::filesystem_error& e) {
    std::cerr << "io error: " << e.what() << '\n';
    return kIo;
  } catch (const TrainingError& e) {
    std::cerr << "training error: " << e.what() << '\n';
    return kTraining;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kInternal;
  }
}
