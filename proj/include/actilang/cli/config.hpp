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

// Key-value pipeline configuration. Every default lives in config_keys().

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace actilang::cli {

struct ConfigKey {
  std::string name;
  std::string default_value;
  std::string help;
};

const std::vector<ConfigKey>& config_keys();

class Config {
 public:
  // All keys at their defaults.
  Config();

  // Throws ValidationError for an unknown key.
  void set(const std::string& key, const std::string& value);
  const std::string& get(const std::string& key) const;

  std::string str(const std::string& key) const { return get(key); }
  long long integer(const std::string& key) const;
  std::size_t count(const std::string& key) const;  // integer >= 0
  double real(const std::string& key) const;
  std::uint64_t u64(const std::string& key) const;
  std::vector<double> reals(const std::string& key) const;  // comma separated
  std::vector<int> integers(const std::string& key) const;

  // `key = value` lines; '#' starts a comment. Errors carry the line number.
  void load(std::istream& in);
  void load(const std::filesystem::path& path);
  // Config snapshot of a run manifest.
  void load_snapshot(const nlohmann::json& snapshot);

  nlohmann::json to_json() const;
  void write(std::ostream& out) const;

 private:
  std::map<std::string, std::string> values_;
};

}  // namespace actilang::cli
