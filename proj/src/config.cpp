#include "homeo/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <sstream>

#include "homeo/errors.hpp"

namespace homeo {

std::string format_double(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

namespace {

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

[[noreturn]] void bad_value(const std::string& key, const std::string& value, const char* what) {
  throw ConfigError("config key '" + key + "': " + what + " (got '" + value + "')");
}

double to_double(const std::string& key, const std::string& value) {
  double v = 0.0;
  auto res = std::from_chars(value.data(), value.data() + value.size(), v);
  if (res.ec != std::errc() || res.ptr != value.data() + value.size()) {
    bad_value(key, value, "expected a number");
  }
  if (!std::isfinite(v)) bad_value(key, value, "expected a finite number");
  return v;
}

template <typename Int>
Int to_int(const std::string& key, const std::string& value) {
  Int v = 0;
  auto res = std::from_chars(value.data(), value.data() + value.size(), v);
  if (res.ec != std::errc() || res.ptr != value.data() + value.size()) {
    bad_value(key, value, "expected an integer");
  }
  return v;
}

bool to_bool(const std::string& key, const std::string& value) {
  if (value == "true" || value == "1") return true;
  if (value == "false" || value == "0") return false;
  bad_value(key, value, "expected true or false");
}

template <typename T, typename Parse>
std::vector<T> to_list(const std::string& key, const std::string& value, Parse parse) {
  std::vector<T> out;
  std::stringstream ss(value);
  std::string part;
  while (std::getline(ss, part, ',')) out.push_back(parse(key, trim(part)));
  if (out.empty()) bad_value(key, value, "expected a nonempty comma-separated list");
  return out;
}

template <typename T, typename Fmt>
std::string join(const std::vector<T>& xs, Fmt fmt) {
  std::string out;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (i) out += ',';
    out += fmt(xs[i]);
  }
  return out;
}

struct KeySpec {
  std::string name;
  std::function<void(ExperimentConfig&, const std::string&, const std::string&)> set;
  std::function<std::string(const ExperimentConfig&)> get;
};

#define HOMEO_DOUBLE_KEY(field)                                                                  \
  KeySpec {                                                                                      \
    #field,                                                                                      \
        [](ExperimentConfig& c, const std::string& k, const std::string& v) {                    \
          c.field = to_double(k, v);                                                             \
        },                                                                                       \
        [](const ExperimentConfig& c) { return format_double(c.field); }                        \
  }

#define HOMEO_INT_KEY(name, field)                                                               \
  KeySpec {                                                                                      \
    name,                                                                                        \
        [](ExperimentConfig& c, const std::string& k, const std::string& v) {                    \
          c.field = to_int<decltype(c.field)>(k, v);                                             \
        },                                                                                       \
        [](const ExperimentConfig& c) { return std::to_string(c.field); }                        \
  }

const std::vector<KeySpec>& key_specs() {
  static const std::vector<KeySpec> specs = {
      HOMEO_DOUBLE_KEY(alpha),
      HOMEO_INT_KEY("episodes", episodes),
      HOMEO_INT_KEY("steps_per_episode", steps_per_episode),
      HOMEO_DOUBLE_KEY(max_step_len),
      HOMEO_DOUBLE_KEY(epsilon),
      {"start_strategy",
       [](ExperimentConfig& c, const std::string& k, const std::string& v) {
         auto s = parse_start_strategy(v);
         if (!s) bad_value(k, v, "expected uniform_anywhere or uniform_bottom_room");
         c.start_strategy = *s;
       },
       [](const ExperimentConfig& c) { return std::string(to_string(c.start_strategy)); }},
      HOMEO_INT_KEY("seed", seed),
      HOMEO_DOUBLE_KEY(gamma),
      HOMEO_DOUBLE_KEY(tau),
      HOMEO_INT_KEY("batch_size", batch_size),
      HOMEO_INT_KEY("buffer_capacity", buffer_capacity),
      HOMEO_INT_KEY("warmup", warmup_transitions),
      HOMEO_DOUBLE_KEY(lr_forward),
      HOMEO_DOUBLE_KEY(lr_extended),
      HOMEO_DOUBLE_KEY(lr_critic),
      HOMEO_DOUBLE_KEY(lr_actor),
      HOMEO_INT_KEY("validation_pool", validation_pool),
      HOMEO_INT_KEY("validation_seed", validation_seed),
      HOMEO_DOUBLE_KEY(wall1_y),
      HOMEO_DOUBLE_KEY(door1_lo),
      HOMEO_DOUBLE_KEY(door1_hi),
      HOMEO_DOUBLE_KEY(wall2_y),
      HOMEO_DOUBLE_KEY(door2_lo),
      HOMEO_DOUBLE_KEY(door2_hi),
      HOMEO_INT_KEY("checkpoint_interval", checkpoint_interval),
      {"baseline_train_all",
       [](ExperimentConfig& c, const std::string& k, const std::string& v) {
         c.baseline_train_all = to_bool(k, v);
       },
       [](const ExperimentConfig& c) { return std::string(c.baseline_train_all ? "true" : "false"); }},
      {"sweep_alphas",
       [](ExperimentConfig& c, const std::string& k, const std::string& v) {
         c.sweep_alphas = to_list<double>(k, v, to_double);
       },
       [](const ExperimentConfig& c) { return join(c.sweep_alphas, format_double); }},
      {"sweep_seeds",
       [](ExperimentConfig& c, const std::string& k, const std::string& v) {
         c.sweep_seeds = to_list<std::uint64_t>(k, v, to_int<std::uint64_t>);
       },
       [](const ExperimentConfig& c) {
         return join(c.sweep_seeds, [](std::uint64_t s) { return std::to_string(s); });
       }},
      HOMEO_INT_KEY("sweep_threads", sweep_threads),
      HOMEO_DOUBLE_KEY(flow_grid_step),
      HOMEO_DOUBLE_KEY(flow_door_radius),
      {"forward_checkpoint",
       [](ExperimentConfig& c, const std::string&, const std::string& v) { c.forward_checkpoint = v; },
       [](const ExperimentConfig& c) { return c.forward_checkpoint; }},
      {"actor_checkpoint",
       [](ExperimentConfig& c, const std::string&, const std::string& v) { c.actor_checkpoint = v; },
       [](const ExperimentConfig& c) { return c.actor_checkpoint; }},
  };
  return specs;
}

#undef HOMEO_DOUBLE_KEY
#undef HOMEO_INT_KEY

void require(bool ok, const char* key, const std::string& what) {
  if (!ok) throw ConfigError(std::string("config key '") + key + "': " + what);
}

}  // namespace

RoomLayout ExperimentConfig::layout() const {
  return RoomLayout::three_rooms(wall1_y, door1_lo, door1_hi, wall2_y, door2_lo, door2_hi);
}

void ExperimentConfig::validate() const {
  require(alpha >= 0.0, "alpha", "must be >= 0");
  require(episodes >= 1, "episodes", "must be >= 1");
  require(steps_per_episode >= 1, "steps_per_episode", "must be >= 1");
  require(max_step_len == kMaxStepLength, "max_step_len",
          "network encodings are built for a step limit of exactly 10");
  require(epsilon >= 0.0 && epsilon <= 1.0, "epsilon", "must lie in [0, 1]");
  require(gamma >= 0.0 && gamma <= 1.0, "gamma", "must lie in [0, 1]");
  require(tau >= 0.0 && tau <= 1.0, "tau", "must lie in [0, 1]");
  require(batch_size >= 1, "batch_size", "must be >= 1");
  require(buffer_capacity >= 1, "buffer_capacity", "must be >= 1");
  require(buffer_capacity >= batch_size, "buffer_capacity", "must be >= batch_size");
  require(warmup_transitions >= 0, "warmup", "must be >= 0");
  require(lr_forward >= 0.0, "lr_forward", "must be >= 0");
  require(lr_extended >= 0.0, "lr_extended", "must be >= 0");
  require(lr_critic >= 0.0, "lr_critic", "must be >= 0");
  require(lr_actor >= 0.0, "lr_actor", "must be >= 0");
  require(validation_pool >= 1, "validation_pool", "must be >= 1");
  require(checkpoint_interval >= 0, "checkpoint_interval", "must be >= 0");
  require(sweep_threads >= 1, "sweep_threads", "must be >= 1");
  require(flow_grid_step > 0.0, "flow_grid_step", "must be > 0");
  require(flow_door_radius > 0.0, "flow_door_radius", "must be > 0");
  for (double a : sweep_alphas) require(a >= 0.0, "sweep_alphas", "entries must be >= 0");
  try {
    layout().validate();
  } catch (const ConfigError& e) {
    throw ConfigError(std::string("config keys 'wall*/door*': ") + e.what());
  }
}

std::vector<std::pair<std::string, std::string>> ExperimentConfig::to_key_values() const {
  std::vector<std::pair<std::string, std::string>> out;
  for (const auto& spec : key_specs()) out.emplace_back(spec.name, spec.get(*this));
  return out;
}

std::map<std::string, std::string> parse_key_values(const std::string& text) {
  std::map<std::string, std::string> out;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("config line " + std::to_string(lineno) + ": expected key=value");
    }
    std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    if (key.empty()) throw ConfigError("config line " + std::to_string(lineno) + ": empty key");
    if (!out.emplace(key, value).second) {
      throw ConfigError("config key '" + key + "': given more than once");
    }
  }
  return out;
}

ExperimentConfig apply_overrides(ExperimentConfig base,
                                 const std::map<std::string, std::string>& values) {
  for (const auto& [key, value] : values) {
    const auto& specs = key_specs();
    auto it = std::find_if(specs.begin(), specs.end(),
                           [&](const KeySpec& s) { return s.name == key; });
    if (it == specs.end()) throw ConfigError("config key '" + key + "': unknown key");
    it->set(base, key, value);
  }
  return base;
}

ExperimentConfig parse_config(const std::optional<std::filesystem::path>& file,
                              const std::map<std::string, std::string>& flag_overrides) {
  ExperimentConfig config;
  if (file) {
    std::ifstream in(*file);
    if (!in) throw IoError("cannot read config file: " + file->string());
    std::stringstream buf;
    buf << in.rdbuf();
    config = apply_overrides(config, parse_key_values(buf.str()));
  }
  config = apply_overrides(config, flag_overrides);
  config.validate();
  return config;
}

std::string to_config_text(const ExperimentConfig& config) {
  std::string out;
  for (const auto& [k, v] : config.to_key_values()) out += k + "=" + v + "\n";
  return out;
}

}  // namespace homeo
