#include "homeo/run_io.hpp"

#include <chrono>
#include <ctime>
#include <fstream>

#include "homeo/errors.hpp"

namespace homeo {

namespace {

std::string utc_format(const char* fmt) {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[64];
  std::strftime(buf, sizeof buf, fmt, &tm);
  return buf;
}

}  // namespace

std::string compact_timestamp() { return utc_format("%Y%m%dT%H%M%SZ"); }
std::string iso_timestamp() { return utc_format("%Y-%m-%dT%H:%M:%SZ"); }

std::filesystem::path make_run_dir(const std::filesystem::path& out, const std::string& command,
                                   double alpha, std::uint64_t seed) {
  const std::string stem =
      command + "_" + format_double(alpha) + "_" + std::to_string(seed) + "_" + compact_timestamp();
  std::error_code ec;
  std::filesystem::create_directories(out, ec);
  if (ec) throw IoError("cannot create output directory " + out.string() + ": " + ec.message());
  std::filesystem::path dir = out / stem;
  for (int suffix = 1; std::filesystem::exists(dir); ++suffix) {
    dir = out / (stem + "_" + std::to_string(suffix));
  }
  std::filesystem::create_directory(dir, ec);
  if (ec) throw IoError("cannot create run directory " + dir.string() + ": " + ec.message());
  return dir;
}

void write_manifest(const std::filesystem::path& dir, const RunManifest& manifest) {
  const auto path = dir / "manifest.txt";
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << "# version: " << manifest.version << '\n'
      << "# command: " << manifest.command << '\n'
      << "# started: " << manifest.started << '\n'
      << "# seed: " << manifest.config.seed << '\n';
  for (const auto& o : manifest.outputs) out << "# output: " << o << '\n';
  out << to_config_text(manifest.config);
  if (!out) throw IoError("failed writing " + path.string());
}

}  // namespace homeo
