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

#include "actilang/nn/archive.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>

#include "actilang/errors.hpp"

namespace actilang::nn {
namespace {

static_assert(std::endian::native == std::endian::little, "archive I/O assumes a little-endian host");

constexpr char kMagic[8] = {'A', 'C', 'T', 'L', 'W', 'G', 'T', '1'};

template <typename T>
void put(std::string& out, T v) {
  char buf[sizeof(T)];
  std::memcpy(buf, &v, sizeof(T));
  out.append(buf, sizeof(T));
}

class Reader {
 public:
  explicit Reader(const std::string& bytes) : bytes_(bytes) {}

  template <typename T>
  T get() {
    need(sizeof(T));
    T v;
    std::memcpy(&v, bytes_.data() + pos_, sizeof(T));
    pos_ += sizeof(T);
    return v;
  }

  std::string get_string(std::size_t n) {
    need(n);
    std::string s = bytes_.substr(pos_, n);
    pos_ += n;
    return s;
  }

  bool done() const { return pos_ == bytes_.size(); }

 private:
  void need(std::size_t n) const {
    if (pos_ + n > bytes_.size()) throw ValidationError("weight archive truncated");
  }
  const std::string& bytes_;
  std::size_t pos_ = 0;
};

}  // namespace

const ArchiveEntry* Archive::find(const std::string& name) const {
  for (const ArchiveEntry& e : entries) {
    if (e.name == name) return &e;
  }
  return nullptr;
}

std::string serialize_archive(const Archive& archive) {
  std::string out(kMagic, sizeof(kMagic));
  put<std::uint32_t>(out, kArchiveVersion);
  const std::string header = archive.header.dump();
  put<std::uint64_t>(out, header.size());
  out += header;
  put<std::uint64_t>(out, archive.entries.size());
  for (const ArchiveEntry& e : archive.entries) {
    if (shape_numel(e.shape) != e.data.size()) {
      throw ShapeError("archive entry '" + e.name + "' has data/shape mismatch");
    }
    put<std::uint32_t>(out, static_cast<std::uint32_t>(e.name.size()));
    out += e.name;
    put<std::uint8_t>(out, e.frozen ? 1 : 0);
    put<std::uint32_t>(out, static_cast<std::uint32_t>(e.shape.size()));
    for (std::size_t d : e.shape) put<std::uint64_t>(out, d);
    const std::size_t n = e.data.size() * sizeof(Real);
    const std::size_t at = out.size();
    out.resize(at + n);
    std::memcpy(out.data() + at, e.data.data(), n);
  }
  return out;
}

Archive deserialize_archive(const std::string& bytes) {
  Reader r(bytes);
  if (r.get_string(sizeof(kMagic)) != std::string(kMagic, sizeof(kMagic))) {
    throw ValidationError("not a weight archive (bad magic)");
  }
  const auto version = r.get<std::uint32_t>();
  if (version != kArchiveVersion) {
    throw ValidationError("unsupported weight archive version " + std::to_string(version));
  }
  Archive a;
  const auto header_len = r.get<std::uint64_t>();
  a.header = nlohmann::json::parse(r.get_string(header_len));
  const auto n = r.get<std::uint64_t>();
  for (std::uint64_t i = 0; i < n; ++i) {
    ArchiveEntry e;
    e.name = r.get_string(r.get<std::uint32_t>());
    e.frozen = r.get<std::uint8_t>() != 0;
    const auto rank = r.get<std::uint32_t>();
    for (std::uint32_t d = 0; d < rank; ++d) e.shape.push_back(r.get<std::uint64_t>());
    e.data.resize(shape_numel(e.shape));
    const std::string raw = r.get_string(e.data.size() * sizeof(Real));
    std::memcpy(e.data.data(), raw.data(), raw.size());
    a.entries.push_back(std::move(e));
  }
  if (!r.done()) throw ValidationError("trailing bytes after weight archive");
  return a;
}

void save_archive(const std::filesystem::path& path, const Archive& archive) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ValidationError("cannot write weight archive " + path.string());
  const std::string bytes = serialize_archive(archive);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

Archive load_archive(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot read weight archive " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return deserialize_archive(ss.str());
}

Archive make_archive(const ParameterList& params, nlohmann::json header) {
  Archive a;
  a.header = std::move(header);
  for (const Parameter* p : params) {
    a.entries.push_back({p->name, p->value.shape(), p->frozen, p->value.vec()});
  }
  return a;
}

void restore_parameters(const Archive& archive, const ParameterList& params) {
  for (Parameter* p : params) {
    const ArchiveEntry* e = archive.find(p->name);
    if (e == nullptr) throw ValidationError("weight archive lacks parameter '" + p->name + "'");
    if (e->shape != p->value.shape()) {
      throw ShapeError("parameter '" + p->name + "': archive shape " + shape_str(e->shape) +
                       " does not match model shape " + shape_str(p->value.shape()));
    }
    p->value = Tensor(e->shape, e->data);
    p->frozen = e->frozen;
    p->grad = Tensor::zeros_like(p->value);
    p->has_grad = false;
  }
}

void append_optimizer_state(Archive& archive, const ParameterList& params, const OptimizerState& state) {
  for (std::size_t i = 0; i < params.size(); ++i) {
    archive.entries.push_back({"opt.m/" + params[i]->name, state.first_moment[i].shape(), false,
                               state.first_moment[i].vec()});
    archive.entries.push_back({"opt.v/" + params[i]->name, state.second_moment[i].shape(), false,
                               state.second_moment[i].vec()});
  }
  archive.header["optimizer"] = {{"step", state.step},
                                 {"lr", state.config.lr},
                                 {"beta1", state.config.beta1},
                                 {"beta2", state.config.beta2},
                                 {"eps", state.config.eps}};
}

OptimizerState read_optimizer_state(const Archive& archive, const ParameterList& params) {
  if (!archive.header.contains("optimizer")) throw ValidationError("archive has no optimizer state");
  const auto& h = archive.header["optimizer"];
  OptimizerState s;
  s.step = h.at("step").get<std::int64_t>();
  s.config.lr = h.at("lr").get<Real>();
  s.config.beta1 = h.at("beta1").get<Real>();
  s.config.beta2 = h.at("beta2").get<Real>();
  s.config.eps = h.at("eps").get<Real>();
  for (const Parameter* p : params) {
    const ArchiveEntry* m = archive.find("opt.m/" + p->name);
    const ArchiveEntry* v = archive.find("opt.v/" + p->name);
    if (m == nullptr || v == nullptr) {
      throw ValidationError("archive lacks optimizer moments for '" + p->name + "'");
    }
    s.first_moment.emplace_back(m->shape, m->data);
    s.second_moment.emplace_back(v->shape, v->data);
  }
  return s;
}

}  // namespace actilang::nn
