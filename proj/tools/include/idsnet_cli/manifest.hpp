#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

namespace idsnet::cli {

// Structured record written next to every run's outputs.
class RunManifest {
 public:
  RunManifest(std::string subcommand, std::vector<std::string> args);

  template <typename V>
  void flag(const std::string& name, const V& value) {
    doc_["flags"][name] = value;
  }
  void seed(std::uint64_t seed) { doc_["seed"] = seed; }
  void input(const std::filesystem::path& path);
  void output(const std::filesystem::path& path);
  void timing(const std::string& name, double seconds) { doc_["timings"][name] = seconds; }
  nlohmann::ordered_json& results() { return doc_["results"]; }

  // Stamps total wall time and writes the manifest atomically.
  void write(const std::filesystem::path& path);

 private:
  nlohmann::ordered_json doc_;
  std::chrono::steady_clock::time_point started_;
};

}  // namespace idsnet::cli
