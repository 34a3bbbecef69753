#pragma once

#include <openssl/evp.h>

#include <fftw3.h>

#include <chrono>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <memory>
#include <string>
#include <vector>

#include "glperiod/error.hpp"
#include "glperiod/harness/report_io.hpp"
#include "glperiod/snapshot.hpp"

namespace glperiod::harness {

inline constexpr const char* kVersion = "1.0.0";

namespace fs = std::filesystem;

inline std::string sha256_hex(const void* data, std::size_t size) {
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), EVP_MD_CTX_free);
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1 ||
      EVP_DigestUpdate(ctx.get(), data, size) != 1 || EVP_DigestFinal_ex(ctx.get(), digest, &len) != 1)
    throw IoError("SHA-256 computation failed");
  static const char* hex = "0123456789abcdef";
  std::string out;
  out.reserve(2 * len);
  for (unsigned i = 0; i < len; ++i) {
    out.push_back(hex[digest[i] >> 4]);
    out.push_back(hex[digest[i] & 15]);
  }
  return out;
}

inline std::vector<unsigned char> read_bytes(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline std::string sha256_file(const fs::path& path) {
  const auto bytes = read_bytes(path);
  return sha256_hex(bytes.data(), bytes.size());
}

/// Writes to a sibling temp file, then renames over `path`.
inline void write_atomic(const fs::path& path, const void* data, std::size_t size) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open " + tmp.string() + " for writing");
    out.write(static_cast<const char*>(data), static_cast<std::streamsize>(size));
    if (!out) throw IoError("short write to " + tmp.string());
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) throw IoError("cannot rename " + tmp.string() + " to " + path.string() + ": " + ec.message());
}

inline std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

/// Collects artifacts of one run directory and writes manifest.json last.
///
/// Artifact entries carry the path relative to the run directory, the
/// SHA-256 of the bytes written, and whether the content is a pure function
/// of config and seed.
class RunRecorder {
 public:
  RunRecorder(fs::path dir, std::string command, const RunConfig& config)
      : dir_(std::move(dir)), command_(std::move(command)), started_(utc_timestamp()) {
    fs::create_directories(dir_);
    manifest_["tool"] = "glperiod";
    manifest_["command"] = command_;
    manifest_["config"] = to_json(config);
    manifest_["versions"]["glperiod"] = kVersion;
    manifest_["versions"]["fftw"] = std::string(fftw_version);
#ifdef __VERSION__
    manifest_["versions"]["compiler"] = __VERSION__;
#else
    manifest_["versions"]["compiler"] = "unknown";
#endif
    manifest_["artifacts"] = json::array();
    manifest_["headline"] = json::object();
  }

  const fs::path& dir() const { return dir_; }

  void add_text(const std::string& rel, const std::string& text, bool deterministic = true) {
    write_atomic(dir_ / rel, text.data(), text.size());
    index(rel, sha256_hex(text.data(), text.size()), deterministic);
  }

  void add_json(const std::string& rel, const json& j) { add_text(rel, j.dump(2) + "\n"); }

  void add_snapshot(const std::string& rel, const SpectralField& f) {
    const auto bytes = encode_snapshot(f);
    write_atomic(dir_ / rel, bytes.data(), bytes.size());
    index(rel, sha256_hex(bytes.data(), bytes.size()), true);
  }

  json& headline() { return manifest_["headline"]; }
  json& manifest() { return manifest_; }

  /// Writes manifest.json (not itself indexed).
  fs::path finish(const std::string& status, int exit_code) {
    manifest_["status"] = status;
    manifest_["exit_code"] = exit_code;
    manifest_["timestamps"] = {{"started", started_}, {"finished", utc_timestamp()}};
    const std::string text = manifest_.dump(2) + "\n";
    const fs::path path = dir_ / "manifest.json";
    write_atomic(path, text.data(), text.size());
    return path;
  }

 private:
  void index(const std::string& rel, const std::string& hash, bool deterministic) {
    manifest_["artifacts"].push_back({{"path", rel}, {"sha256", hash}, {"deterministic", deterministic}});
  }

  fs::path dir_;
  std::string command_;
  std::string started_;
  json manifest_;
};

inline json load_manifest(const fs::path& path) {
  const auto bytes = read_bytes(path);
  try {
    return json::parse(bytes.begin(), bytes.end());
  } catch (const json::exception& e) {
    throw IoError("malformed manifest " + path.string() + ": " + e.what());
  }
}

/// Re-hashes every indexed artifact next to the manifest. Returns one message
/// per missing or mismatching file (empty when the run directory is intact).
inline std::vector<std::string> verify_manifest(const fs::path& manifest_path) {
  const json m = load_manifest(manifest_path);
  const fs::path dir = manifest_path.parent_path();
  std::vector<std::string> problems;
  if (!m.contains("artifacts")) return {"manifest has no artifact index"};
  for (const auto& a : m["artifacts"]) {
    const fs::path p = dir / a.at("path").get<std::string>();
    if (!fs::exists(p)) {
      problems.push_back("missing " + p.string());
      continue;
    }
    if (sha256_file(p) != a.at("sha256").get<std::string>()) problems.push_back("hash mismatch " + p.string());
  }
  return problems;
}

}  // namespace glperiod::harness
