// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The MorpheusNet Authors

#pragma once

#include <openssl/evp.h>

#include <algorithm>
#include <chrono>
#include <ctime>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "morpheus/util/binary.hpp"

namespace morpheus::cli {

/// Hex SHA-1 of "blob <size>\0<bytes>", the object id git assigns to a file.
inline std::string git_blob_sha1(std::span<const std::uint8_t> bytes) {
  const std::string header = "blob " + std::to_string(bytes.size()) + '\0';
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), EVP_MD_CTX_free);
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha1(), nullptr) != 1 ||
      EVP_DigestUpdate(ctx.get(), header.data(), header.size()) != 1 ||
      EVP_DigestUpdate(ctx.get(), bytes.data(), bytes.size()) != 1 || EVP_DigestFinal_ex(ctx.get(), md, &len) != 1)
    throw Error("sha1 digest failed");
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out += kHex[md[i] >> 4];
    out += kHex[md[i] & 15];
  }
  return out;
}

inline std::string utc_now() {
  const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

inline constexpr const char* kDirManifest = "manifest.json";

/// Where the manifest of an artifact lives: inside a directory, or beside a
/// file as "<file>.manifest.json".
inline std::filesystem::path manifest_path(const std::filesystem::path& artifact) {
  if (std::filesystem::is_directory(artifact)) return artifact / kDirManifest;
  return artifact.string() + ".manifest.json";
}

/// Reproducibility record written beside every artifact.
struct RunManifest {
  std::string command;
  std::string config;
  std::optional<std::uint64_t> seed;
  std::vector<std::string> inputs;
  std::vector<std::string> outputs;
  std::string started_utc = utc_now();
  nlohmann::ordered_json details = nlohmann::ordered_json::object();

  /// Files are hashed individually; directories contribute every regular
  /// file in name order except their own manifest.
  static nlohmann::ordered_json hash_entries(const std::vector<std::string>& paths) {
    namespace fs = std::filesystem;
    auto arr = nlohmann::ordered_json::array();
    for (const auto& p : paths) {
      std::vector<fs::path> files;
      if (fs::is_directory(p)) {
        for (const auto& e : fs::directory_iterator(p))
          if (e.is_regular_file() && e.path().filename() != kDirManifest) files.push_back(e.path());
        std::sort(files.begin(), files.end());
      } else {
        files.emplace_back(p);
      }
      for (const auto& f : files) arr.push_back({{"path", f.string()}, {"sha1", git_blob_sha1(read_file(f.string()))}});
    }
    return arr;
  }

  nlohmann::ordered_json to_json() const {
    nlohmann::ordered_json j;
    j["command"] = command;
    j["config"] = config.empty() ? nlohmann::ordered_json(nullptr) : nlohmann::ordered_json(config);
    j["seed"] = seed ? nlohmann::ordered_json(*seed) : nlohmann::ordered_json(nullptr);
    j["inputs"] = hash_entries(inputs);
    j["outputs"] = hash_entries(outputs);
    j["started_utc"] = started_utc;
    j["finished_utc"] = utc_now();
    j["details"] = details;
    return j;
  }

  /// Writes the manifest of `outputs.front()`.
  void write() const {
    if (outputs.empty()) throw ValueError("manifest: no output artifact");
    write_text_file(manifest_path(outputs.front()).string(), to_json().dump(2) + "\n");
  }
};

}  // namespace morpheus::cli
