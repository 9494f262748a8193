#include "scatterlab/lab/manifest.hpp"

#include <chrono>
#include <fstream>
#include <iomanip>
#include <sstream>

#include <openssl/evp.h>

namespace scatterlab::lab {

std::string sha256_hex(const std::string& bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
    throw ManifestError("SHA-256 computation failed");
  }
  std::ostringstream out;
  for (unsigned int i = 0; i < len; ++i) {
    out << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(digest[i]);
  }
  return out.str();
}

std::string sha256_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ManifestError("cannot read " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return sha256_hex(buf.str());
}

namespace {

std::string timestamp() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&t, &tm);
  std::ostringstream out;
  out << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return out.str();
}

}  // namespace

ManifestWriter::ManifestWriter(std::filesystem::path run_dir, std::string config_hash,
                               std::uint64_t seed)
    : run_dir_(std::move(run_dir)) {
  std::filesystem::create_directories(run_dir_);
  const auto path = run_dir_ / kManifestName;
  if (std::filesystem::exists(path)) {
    std::ifstream in(path);
    try {
      in >> manifest_;
    } catch (const nlohmann::json::exception&) {
      manifest_ = nlohmann::json();
    }
    if (!manifest_.is_object() || manifest_.value("config_hash", "") != config_hash) {
      manifest_ = nlohmann::json();
    }
  }
  if (manifest_.is_null()) {
    manifest_ = {{"tool", "scatterlab"},
                 {"version", SCATTERLAB_VERSION},
                 {"config_hash", config_hash},
                 {"created", timestamp()},
                 {"scenarios", nlohmann::json::object()},
                 {"files", nlohmann::json::object()}};
  }
  manifest_["seed"] = seed;
}

void ManifestWriter::write(const std::string& relative, const std::string& content) {
  const auto path = run_dir_ / relative;
  std::filesystem::create_directories(path.parent_path());
  {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ManifestError("cannot write " + path.string());
    out << content;
  }
  const auto digest = sha256_hex(content);
  std::lock_guard lock(mutex_);
  manifest_["files"][relative] = {{"sha256", digest}, {"bytes", content.size()}};
}

void ManifestWriter::set_status(const std::string& scenario, const std::string& stage,
                                const std::string& status) {
  std::lock_guard lock(mutex_);
  manifest_["scenarios"][scenario][stage] = status;
}

void ManifestWriter::commit() {
  std::lock_guard lock(mutex_);
  manifest_["updated"] = timestamp();
  const auto path = run_dir_ / kManifestName;
  std::ofstream out(path);
  if (!out) throw ManifestError("cannot write " + path.string());
  out << manifest_.dump(2) << '\n';
}

nlohmann::json load_verified_manifest(const std::filesystem::path& run_dir) {
  const auto path = run_dir / kManifestName;
  if (!std::filesystem::exists(path)) {
    throw ManifestError("no manifest in " + run_dir.string());
  }
  nlohmann::json manifest;
  try {
    std::ifstream in(path);
    in >> manifest;
  } catch (const nlohmann::json::exception& e) {
    throw ManifestError("corrupt manifest: " + std::string(e.what()));
  }
  if (!manifest.is_object() || !manifest.contains("files")) {
    throw ManifestError("corrupt manifest: no file inventory");
  }
  for (const auto& [relative, entry] : manifest["files"].items()) {
    const auto file = run_dir / relative;
    if (!std::filesystem::exists(file)) {
      throw ManifestError("listed file is missing: " + relative);
    }
    if (sha256_file(file) != entry.value("sha256", "")) {
      throw ManifestError("digest mismatch for " + relative);
    }
  }
  return manifest;
}

}  // namespace scatterlab::lab
