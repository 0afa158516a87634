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

#include "actilang/cli/manifest.hpp"

#include <openssl/evp.h>

#include <array>
#include <chrono>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <memory>

#include "actilang/errors.hpp"

namespace actilang::cli {

namespace fs = std::filesystem;

std::string tool_version() { return ACTILANG_VERSION; }

namespace {

class Sha256 {
 public:
  Sha256() : ctx_(EVP_MD_CTX_new(), &EVP_MD_CTX_free) {
    if (!ctx_ || EVP_DigestInit_ex(ctx_.get(), EVP_sha256(), nullptr) != 1) {
      throw std::runtime_error("sha256 initialisation failed");
    }
  }
  void update(const void* data, std::size_t n) { EVP_DigestUpdate(ctx_.get(), data, n); }
  std::string hex() {
    std::array<unsigned char, EVP_MAX_MD_SIZE> md{};
    unsigned int len = 0;
    EVP_DigestFinal_ex(ctx_.get(), md.data(), &len);
    std::string out;
    char buf[3];
    for (unsigned int i = 0; i < len; ++i) {
      std::snprintf(buf, sizeof(buf), "%02x", md[i]);
      out += buf;
    }
    return out;
  }

 private:
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx_;
};

std::string major_minor(const std::string& v) { return v.substr(0, v.rfind('.')); }

}  // namespace

std::string sha256_hex(std::string_view data) {
  Sha256 h;
  h.update(data.data(), data.size());
  return h.hex();
}

std::string sha256_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot read " + path.string());
  Sha256 h;
  std::array<char, 1 << 16> buf;
  while (in) {
    in.read(buf.data(), buf.size());
    h.update(buf.data(), static_cast<std::size_t>(in.gcount()));
  }
  return h.hex();
}

std::map<std::string, std::string> hash_tree(const fs::path& dir) {
  std::map<std::string, std::string> out;
  for (const auto& e : fs::recursive_directory_iterator(dir)) {
    if (!e.is_regular_file()) continue;
    const std::string rel = fs::relative(e.path(), dir).generic_string();
    if (rel == kManifestName) continue;
    out[rel] = sha256_file(e.path());
  }
  return out;
}

std::string RunManifest::content_hash() const {
  const nlohmann::json j = {{"stage", stage}, {"version", version}, {"config", config},
                            {"seeds", seeds}, {"inputs", inputs},   {"artifacts", artifacts}};
  return sha256_hex(j.dump());
}

nlohmann::json RunManifest::to_json() const {
  return {{"stage", stage},
          {"tool", "actilang"},
          {"version", version},
          {"started_at", started_at},
          {"finished_at", finished_at},
          {"config", config},
          {"seeds", seeds},
          {"inputs", inputs},
          {"artifacts", artifacts},
          {"provenance", provenance},
          {"content_hash", content_hash()}};
}

RunManifest RunManifest::from_json(const nlohmann::json& j) {
  RunManifest m;
  m.stage = j.at("stage").get<std::string>();
  m.version = j.at("version").get<std::string>();
  m.started_at = j.value("started_at", "");
  m.finished_at = j.value("finished_at", "");
  m.config = j.at("config");
  m.seeds = j.at("seeds");
  m.inputs = j.at("inputs").get<std::map<std::string, std::string>>();
  m.artifacts = j.at("artifacts").get<std::map<std::string, std::string>>();
  m.provenance = j.value("provenance", nlohmann::json::object());
  if (j.contains("content_hash") && j.at("content_hash").get<std::string>() != m.content_hash()) {
    throw ValidationError("manifest content hash mismatch for stage '" + m.stage + "'");
  }
  return m;
}

RunManifest read_manifest(const fs::path& dir) {
  std::ifstream in(dir / kManifestName);
  if (!in) throw ValidationError("missing " + (dir / kManifestName).string());
  try {
    return RunManifest::from_json(nlohmann::json::parse(in));
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError((dir / kManifestName).string() + ": " + e.what());
  }
}

void write_manifest(const fs::path& dir, const RunManifest& m) {
  std::ofstream out(dir / kManifestName);
  out << m.to_json().dump(2) << '\n';
  if (!out) throw ValidationError("cannot write " + (dir / kManifestName).string());
}

void verify_manifest(const fs::path& dir, const RunManifest& m) {
  if (major_minor(m.version) != major_minor(tool_version())) {
    throw ValidationError("stage '" + m.stage + "' was produced by version " + m.version + ", this tool is " +
                          tool_version() + "; rerun it");
  }
  for (const auto& [file, hash] : m.artifacts) {
    const fs::path p = dir / file;
    if (!fs::exists(p)) throw ValidationError("stage '" + m.stage + "': artifact " + file + " is missing");
    if (sha256_file(p) != hash) {
      throw ValidationError("stage '" + m.stage + "': artifact " + file + " does not match its manifest hash");
    }
  }
}

std::string utc_timestamp() {
  const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace actilang::cli
