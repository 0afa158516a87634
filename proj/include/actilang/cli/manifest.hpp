// Copyright 2026 The actilang Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

namespace actilang::cli {

inline constexpr const char* kManifestName = "manifest.json";

std::string tool_version();

std::string sha256_hex(std::string_view data);
std::string sha256_file(const std::filesystem::path& path);

// Relative path (generic form) -> sha256 of every regular file under dir,
// excluding the manifest itself.
std::map<std::string, std::string> hash_tree(const std::filesystem::path& dir);

struct RunManifest {
  std::string stage;
  std::string version;
  std::string started_at;   // UTC, ISO 8601
  std::string finished_at;
  nlohmann::json config = nlohmann::json::object();  // full resolved config
  nlohmann::json seeds = nlohmann::json::object();   // name -> derived seed
  std::map<std::string, std::string> inputs;          // upstream stage -> its content hash
  std::map<std::string, std::string> artifacts;       // file -> sha256
  nlohmann::json provenance = nlohmann::json::object();  // external paths; not hashed

  // sha256 over everything except timestamps and provenance.
  std::string content_hash() const;

  nlohmann::json to_json() const;
  static RunManifest from_json(const nlohmann::json& j);
};

RunManifest read_manifest(const std::filesystem::path& dir);
void write_manifest(const std::filesystem::path& dir, const RunManifest& m);

// Throws ValidationError if the manifest was written by an incompatible tool
// version, or an artifact is missing or no longer matches its hash.
void verify_manifest(const std::filesystem::path& dir, const RunManifest& m);

std::string utc_timestamp();

}  // namespace actilang::cli
