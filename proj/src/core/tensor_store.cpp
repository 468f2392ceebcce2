// Copyright 2026 The Crowdmimic Authors
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

#include "crowdmimic/core/tensor_store.hpp"

#include <cstdint>
#include <cstring>
#include <fstream>

#include "crowdmimic/core/error.hpp"

namespace crowdmimic {
namespace {

constexpr char kMagic[4] = {'C', 'M', 'C', 'K'};
constexpr std::uint32_t kFormatVersion = 1;

void write_u32(std::ostream& out, std::uint32_t v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(v));
}

std::uint32_t read_u32(std::istream& in, const std::string& path) {
  std::uint32_t v = 0;
  in.read(reinterpret_cast<char*>(&v), sizeof(v));
  if (!in) throw IoError("truncated checkpoint: " + path);
  return v;
}

}  // namespace

void TensorStore::put(const std::string& name, const MatXd& m) {
  if (index_.count(name))
    throw ConfigError("duplicate tensor name in checkpoint: " + name);
  index_[name] = items_.size();
  items_.emplace_back(name, m);
}

void TensorStore::put_scalar(const std::string& name, double v) {
  MatXd m(1, 1);
  m(0, 0) = v;
  put(name, m);
}

const MatXd& TensorStore::get(const std::string& name) const {
  auto it = index_.find(name);
  if (it == index_.end())
    throw ConfigError("checkpoint is missing tensor: " + name);
  return items_[it->second].second;
}

double TensorStore::scalar(const std::string& name) const {
  const MatXd& m = get(name);
  if (m.rows() != 1 || m.cols() != 1)
    throw ConfigError("checkpoint tensor is not a scalar: " + name);
  return m(0, 0);
}

bool TensorStore::has(const std::string& name) const {
  return index_.count(name) > 0;
}

std::vector<std::string> TensorStore::names() const {
  std::vector<std::string> out;
  out.reserve(items_.size());
  for (const auto& [n, m] : items_) out.push_back(n);
  return out;
}

void TensorStore::save(const std::string& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write checkpoint: " + path);
  out.write(kMagic, 4);
  write_u32(out, kFormatVersion);
  write_u32(out, static_cast<std::uint32_t>(items_.size()));
  for (const auto& [name, m] : items_) {
    write_u32(out, static_cast<std::uint32_t>(name.size()));
    out.write(name.data(), static_cast<std::streamsize>(name.size()));
    write_u32(out, static_cast<std::uint32_t>(m.rows()));
    write_u32(out, static_cast<std::uint32_t>(m.cols()));
    out.write(reinterpret_cast<const char*>(m.data()),
              static_cast<std::streamsize>(sizeof(double) * m.size()));
  }
  if (!out) throw IoError("failed writing checkpoint: " + path);
}

TensorStore TensorStore::load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open checkpoint: " + path);
  char magic[4];
  in.read(magic, 4);
  if (!in || std::memcmp(magic, kMagic, 4) != 0)
    throw IoError("not a checkpoint file: " + path);
  std::uint32_t version = read_u32(in, path);
  if (version != kFormatVersion)
    throw IoError("unsupported checkpoint format version in " + path);
  std::uint32_t count = read_u32(in, path);
  TensorStore store;
  for (std::uint32_t i = 0; i < count; ++i) {
    std::uint32_t name_len = read_u32(in, path);
    std::string name(name_len, '\0');
    in.read(name.data(), name_len);
    std::uint32_t rows = read_u32(in, path);
    std::uint32_t cols = read_u32(in, path);
    MatXd m(rows, cols);
    in.read(reinterpret_cast<char*>(m.data()),
            static_cast<std::streamsize>(sizeof(double) * m.size()));
    if (!in) throw IoError("truncated checkpoint: " + path);
    store.put(name, m);
  }
  return store;
}

}  // namespace crowdmimic
