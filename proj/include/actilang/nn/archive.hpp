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
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "actilang/nn/optim.hpp"
#include "actilang/nn/tape.hpp"

namespace actilang::nn {

// Weight archive: a JSON config header plus (name, shape, frozen, data) per
// parameter, stored as little-endian binary. serialize(deserialize(b)) == b.
//
//   magic "ACTLWGT1" | u32 version | u64 header_len | header (compact JSON)
//   u64 n_entries | per entry: u32 name_len | name | u8 frozen | u32 rank |
//   u64 dims[rank] | f64 data[prod(dims)]
struct ArchiveEntry {
  std::string name;
  Shape shape;
  bool frozen = false;
  std::vector<Real> data;
};

struct Archive {
  nlohmann::json header = nlohmann::json::object();
  std::vector<ArchiveEntry> entries;

  const ArchiveEntry* find(const std::string& name) const;
};

inline constexpr std::uint32_t kArchiveVersion = 1;

std::string serialize_archive(const Archive& archive);
Archive deserialize_archive(const std::string& bytes);

void save_archive(const std::filesystem::path& path, const Archive& archive);
Archive load_archive(const std::filesystem::path& path);

Archive make_archive(const ParameterList& params, nlohmann::json header);

// Copies archive data into params by name. Every parameter must be present
// with a matching shape; the frozen flag is taken from the archive.
void restore_parameters(const Archive& archive, const ParameterList& params);

// Optimizer moments are stored as entries "<prefix>m/<name>" and
// "<prefix>v/<name>"; the step counter and hyperparameters go in the header.
void append_optimizer_state(Archive& archive, const ParameterList& params, const OptimizerState& state);
OptimizerState read_optimizer_state(const Archive& archive, const ParameterList& params);

}  // namespace actilang::nn
