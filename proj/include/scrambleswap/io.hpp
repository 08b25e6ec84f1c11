#pragma once

#include "rng.hpp"
#include "version.hpp"

#include <json.hpp>

#include <atomic>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <mutex>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace scrambleswap {

// ---------------------------------------------------------------------------
// CSV with full round-trip precision

/// Shortest representation with 17 significant digits (round-trip exact).
inline std::string format_full(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

inline void write_csv(const std::string& path, const std::vector<std::string>& columns,
                      const std::vector<std::vector<double>>& rows) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("write_csv: cannot open " + path);
  for (size_t c = 0; c < columns.size(); ++c) out << (c ? "," : "") << columns[c];
  out << "\n";
  for (const auto& row : rows) {
    for (size_t c = 0; c < row.size(); ++c) out << (c ? "," : "") << format_full(row[c]);
    out << "\n";
  }
}

// ---------------------------------------------------------------------------
// Run manifest

struct RunManifest {
  std::string command;
  std::map<std::string, std::string> config; ///< resolved flag values, flag name -> value
  std::uint64_t seed = 0;
  std::string code_version = scrambleswap::version;
  std::string started_at, finished_at;
  std::vector<std::string> outputs;
  std::vector<std::string> warnings;
};

inline std::string iso8601_now() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t tt = std::chrono::system_clock::to_time_t(now);
  char buf[32];
  std::tm tm_utc{};
  gmtime_r(&tt, &tm_utc);
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm_utc);
  return buf;
}

/// Atomic write (temp file + rename) of the manifest next to its outputs.
inline void write_manifest(const std::string& path, const RunManifest& m) {
  nlohmann::json j;
  j["command"] = m.command;
  j["config"] = m.config;
  j["seed"] = m.seed;
  j["code_version"] = m.code_version;
  j["started_at"] = m.started_at;
  j["finished_at"] = m.finished_at;
  j["outputs"] = m.outputs;
  j["warnings"] = m.warnings;
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp);
    if (!out) throw std::runtime_error("write_manifest: cannot open " + tmp);
    out << j.dump(2) << "\n";
  }
  std::filesystem::rename(tmp, path);
}

inline RunManifest load_manifest(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("load_manifest: cannot open " + path);
  nlohmann::json j;
  in >> j;
  RunManifest m;
  m.command = j.at("command").get<std::string>();
  m.config = j.at("config").get<std::map<std::string, std::string>>();
  m.seed = j.at("seed").get<std::uint64_t>();
  m.code_version = j.at("code_version").get<std::string>();
  m.started_at = j.value("started_at", "");
  m.finished_at = j.value("finished_at", "");
  m.outputs = j.value("outputs", std::vector<std::string>{});
  m.warnings = j.value("warnings", std::vector<std::string>{});
  return m;
}

/// Output directory out/<command>/<timestamp>-<seed>/ under the output root
/// (env SCRAMBLE_SWAP_OUT overrides the root).
inline std::filesystem::path make_output_dir(const std::string& command, std::uint64_t seed) {
  const char* env = std::getenv("SCRAMBLE_SWAP_OUT");
  std::filesystem::path root = env ? std::filesystem::path(env) : std::filesystem::path("out");
  const auto now = std::chrono::system_clock::now();
  const std::time_t tt = std::chrono::system_clock::to_time_t(now);
  char buf[32];
  std::tm tm_utc{};
  gmtime_r(&tt, &tm_utc);
  std::strftime(buf, sizeof(buf), "%Y%m%dT%H%M%S", &tm_utc);
  std::filesystem::path dir = root / command / (std::string(buf) + "-" + std::to_string(seed));
  // disambiguate repeated runs within one second
  std::filesystem::path candidate = dir;
  for (int k = 1; std::filesystem::exists(candidate); ++k)
    candidate = dir.concat("-" + std::to_string(k));
  std::filesystem::create_directories(candidate);
  return candidate;
}

// ---------------------------------------------------------------------------
// Bounded worker pool over an index range; work items must write to disjoint
// slots so the merged result is order-independent.

inline void parallel_for(std::size_t n, int jobs, const std::function<void(std::size_t)>& fn) {
  if (jobs <= 1 || n <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto worker = [&]() {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= n) return;
      try {
        fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!error) error = std::current_exception();
        return;
      }
    }
  };
  std::vector<std::thread> pool;
  const int n_threads = std::min<std::size_t>(static_cast<std::size_t>(jobs), n);
  pool.reserve(static_cast<size_t>(n_threads));
  for (int k = 0; k < n_threads; ++k) pool.emplace_back(worker);
  for (auto& th : pool) th.join();
  if (error) std::rethrow_exception(error);
}

} // namespace scrambleswap
