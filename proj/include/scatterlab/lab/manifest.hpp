#pragma once

#include <filesystem>
#include <map>
#include <mutex>
#include <stdexcept>
#include <string>

#include "json.hpp"

namespace scatterlab::lab {

class ManifestError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::string sha256_hex(const std::string& bytes);
std::string sha256_file(const std::filesystem::path& path);

inline constexpr const char* kManifestName = "manifest.json";

// Single writer for a run directory: every output goes through `write`, which
// records its digest; `commit` persists the inventory. An existing manifest
// with the same config hash is extended, otherwise a fresh one is started.
class ManifestWriter {
 public:
  ManifestWriter(std::filesystem::path run_dir, std::string config_hash,
                 std::uint64_t seed);

  void write(const std::string& relative, const std::string& content);
  void set_status(const std::string& scenario, const std::string& stage,
                  const std::string& status);
  void commit();

  const std::filesystem::path& run_dir() const { return run_dir_; }

 private:
  std::mutex mutex_;
  std::filesystem::path run_dir_;
  nlohmann::json manifest_;
};

// Loads the manifest and checks every listed file against its digest.
// Throws ManifestError when the manifest is missing, unreadable, or any file
// is missing or altered.
nlohmann::json load_verified_manifest(const std::filesystem::path& run_dir);

}  // namespace scatterlab::lab
