#pragma once

#include <openssl/evp.h>

#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <optional>
#include <string>

#include "wulffkit/error.hpp"
#include "wulffkit/io/output.hpp"
#include "wulffkit/version.hpp"

namespace wulffkit::io {

inline std::string sha256_hex(const std::string& data) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_MD_CTX* ctx = EVP_MD_CTX_new();
  if (!ctx || EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr) != 1 ||
      EVP_DigestUpdate(ctx, data.data(), data.size()) != 1 || EVP_DigestFinal_ex(ctx, digest, &len) != 1) {
    EVP_MD_CTX_free(ctx);
    fail(ErrorCode::invalid_argument, "SHA-256 digest failed");
  }
  EVP_MD_CTX_free(ctx);
  static const char* hex = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) out += hex[digest[i] >> 4], out += hex[digest[i] & 15];
  return out;
}

/// Content-addressed store of computed profiles, keyed by (scene, seed, version).
class RunCache {
 public:
  explicit RunCache(std::filesystem::path dir) : dir_(std::move(dir)) {}

  /// WULFFKIT_CACHE_DIR, else $XDG_CACHE_HOME/wulffkit, else ~/.cache/wulffkit.
  static std::filesystem::path default_dir() {
    if (const char* d = std::getenv("WULFFKIT_CACHE_DIR"); d && *d) return d;
    if (const char* x = std::getenv("XDG_CACHE_HOME"); x && *x) return std::filesystem::path(x) / "wulffkit";
    if (const char* h = std::getenv("HOME"); h && *h) return std::filesystem::path(h) / ".cache" / "wulffkit";
    return std::filesystem::temp_directory_path() / "wulffkit-cache";
  }

  static std::string key(const json& scene, std::uint64_t seed) {
    return sha256_hex(scene.dump() + "\n" + std::to_string(seed) + "\n" + kVersion);
  }

  const std::filesystem::path& dir() const { return dir_; }
  std::filesystem::path path(const std::string& key) const { return dir_ / (key + ".json"); }

  std::optional<json> load(const std::string& key) const {
    const auto p = path(key);
    if (!std::filesystem::exists(p)) return std::nullopt;
    try {
      json j = json::parse(read_file(p));
      if (j.value("version", "") != kVersion) return std::nullopt;
      return j;
    } catch (const std::exception&) {
      return std::nullopt;  // unreadable entries are recomputed
    }
  }

  void store(const std::string& key, const json& value) const {
    std::filesystem::create_directories(dir_);
    const auto tmp = dir_ / (key + ".tmp");
    write_file(tmp, value.dump());
    std::filesystem::rename(tmp, path(key));
  }

 private:
  std::filesystem::path dir_;
};

}  // namespace wulffkit::io
