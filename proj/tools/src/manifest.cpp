#include "idsnet_cli/manifest.hpp"

#include "idsnet/bytes.hpp"
#include "idsnet/digest.hpp"
#include "idsnet/version.hpp"

namespace idsnet::cli {

RunManifest::RunManifest(std::string subcommand, std::vector<std::string> args)
    : started_(std::chrono::steady_clock::now()) {
  doc_["subcommand"] = std::move(subcommand);
  doc_["toolkit_version"] = std::string(kVersion);
  doc_["argv"] = std::move(args);
  doc_["flags"] = nlohmann::ordered_json::object();
  doc_["seed"] = nullptr;
  doc_["inputs"] = nlohmann::ordered_json::array();
  doc_["outputs"] = nlohmann::ordered_json::array();
  doc_["timings"] = nlohmann::ordered_json::object();
  doc_["results"] = nlohmann::ordered_json::object();
}

void RunManifest::input(const std::filesystem::path& path) {
  doc_["inputs"].push_back({{"path", path.string()}, {"sha256", to_hex(sha256_file(path))}});
}

void RunManifest::output(const std::filesystem::path& path) { doc_["outputs"].push_back(path.string()); }

void RunManifest::write(const std::filesystem::path& path) {
  doc_["timings"]["total_seconds"] =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - started_).count();
  write_file_atomic(path, doc_.dump(2) + "\n");
}

}  // namespace idsnet::cli
