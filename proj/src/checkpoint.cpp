// Copyright 2026 The MTNet Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
#include "mtnet/checkpoint.hpp"

#include <cstring>
#include <fstream>
#include <map>
#include <stdexcept>
#include <vector>

#include <nlohmann/json.hpp>

namespace mtnet {

namespace {

constexpr char kMagic[8] = {'M', 'T', 'C', 'K', '0', '0', '0', '1'};

struct DirectoryEntry {
  int n, c, h, w;
  uint64_t offset;  // bytes into the payload
};

struct FileHeader {
  nlohmann::json config;
  std::map<std::string, DirectoryEntry> tensors;
  uint64_t payload_start = 0;
};

FileHeader read_header(std::ifstream& f, const std::string& path) {
  char magic[8];
  f.read(magic, 8);
  if (!f || std::memcmp(magic, kMagic, 8) != 0)
    throw std::runtime_error("'" + path + "' is not a checkpoint file");
  uint64_t header_len = 0;
  f.read(reinterpret_cast<char*>(&header_len), sizeof(header_len));
  if (!f) throw std::runtime_error("truncated checkpoint header in " + path);
  std::string header_bytes(header_len, '\0');
  f.read(header_bytes.data(), (std::streamsize)header_len);
  if (!f) throw std::runtime_error("truncated checkpoint header in " + path);

  FileHeader h;
  nlohmann::json j = nlohmann::json::parse(header_bytes);
  h.config = j.at("config");
  for (const auto& t : j.at("tensors")) {
    const auto& s = t.at("shape");
    h.tensors[t.at("name").get<std::string>()] = {
        s.at(0).get<int>(), s.at(1).get<int>(), s.at(2).get<int>(),
        s.at(3).get<int>(), t.at("offset").get<uint64_t>()};
  }
  h.payload_start = 16 + header_len;
  return h;
}

std::string shape_str(int n, int c, int hh, int ww) {
  return "(" + std::to_string(n) + "," + std::to_string(c) + "," +
         std::to_string(hh) + "," + std::to_string(ww) + ")";
}

}  // namespace

void save_checkpoint(const std::string& path, const Config& cfg,
                     const nn::StateList& state) {
  nlohmann::json tensors = nlohmann::json::array();
  uint64_t offset = 0;
  for (const auto& entry : state) {
    const Tensor& t = *entry.t;
    tensors.push_back({{"name", entry.name},
                       {"shape", {t.n, t.c, t.h, t.w}},
                       {"offset", offset}});
    offset += (uint64_t)t.size() * sizeof(float);
  }
  nlohmann::json header = {{"config", config_to_json(cfg)},
                           {"tensors", tensors}};
  const std::string header_bytes = header.dump();

  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write checkpoint file " + path);
  f.write(kMagic, 8);
  const uint64_t header_len = header_bytes.size();
  f.write(reinterpret_cast<const char*>(&header_len), sizeof(header_len));
  f.write(header_bytes.data(), (std::streamsize)header_bytes.size());
  for (const auto& entry : state) {
    const Tensor& t = *entry.t;
    f.write(reinterpret_cast<const char*>(t.ptr()),
            (std::streamsize)(t.size() * sizeof(float)));
  }
  if (!f) throw std::runtime_error("write failed for checkpoint " + path);
}

Config read_checkpoint_config(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot read checkpoint file " + path);
  return config_from_json(read_header(f, path).config);
}

void load_checkpoint(const std::string& path, nn::StateList& state,
                     Config* cfg_out) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot read checkpoint file " + path);
  const FileHeader h = read_header(f, path);
  if (cfg_out) *cfg_out = config_from_json(h.config);

  if (h.tensors.size() != state.size()) {
    std::map<std::string, int> name_count;
    for (const auto& e : state) name_count[e.name] = 1;
    for (const auto& [name, _] : h.tensors)
      if (!name_count.count(name))
        throw std::runtime_error("checkpoint " + path +
                                 " has unexpected tensor '" + name + "'");
  }
  for (auto& entry : state) {
    const auto it = h.tensors.find(entry.name);
    if (it == h.tensors.end())
      throw std::runtime_error("checkpoint " + path + " is missing tensor '" +
                               entry.name + "'");
    Tensor& t = *entry.t;
    const DirectoryEntry& d = it->second;
    if (d.n != t.n || d.c != t.c || d.h != t.h || d.w != t.w)
      throw std::runtime_error(
          "shape mismatch for tensor '" + entry.name + "': checkpoint has " +
          shape_str(d.n, d.c, d.h, d.w) + ", model expects " +
          shape_str(t.n, t.c, t.h, t.w));
    f.seekg((std::streamoff)(h.payload_start + d.offset));
    f.read(reinterpret_cast<char*>(t.ptr()),
           (std::streamsize)(t.size() * sizeof(float)));
    if (!f)
      throw std::runtime_error("truncated payload for tensor '" + entry.name +
                               "' in " + path);
  }
}

void load_pretrained_backbone(const std::string& path, Model& model) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot read checkpoint file " + path);
  const FileHeader h = read_header(f, path);
  const Config ck = config_from_json(h.config);

  const ModelConfig& a = ck.model;
  const ModelConfig& b = model.cfg;
  std::string diff;
  auto check = [&](const std::string& field, int va, int vb) {
    if (va != vb)
      diff += (diff.empty() ? "" : ", ") + field + " " + std::to_string(va) +
              " vs " + std::to_string(vb);
  };
  check("in_channels", a.in_channels, b.in_channels);
  check("depth", a.depth, b.depth);
  check("base_width", a.base_width, b.base_width);
  check("feature_channels", a.feature_channels, b.feature_channels);
  if (a.upsample != b.upsample)
    diff += (diff.empty() ? "" : ", ") + std::string("upsample ") +
            (a.upsample == UpsampleKind::kInterp ? "interp" : "deconv") +
            " vs " +
            (b.upsample == UpsampleKind::kInterp ? "interp" : "deconv");
  if (!diff.empty())
    throw std::runtime_error(
        "pretrained backbone config does not match (checkpoint vs model): " +
        diff);

  nn::StateList state;
  model.collect_state(state);
  for (auto& entry : state) {
    if (entry.name.rfind("backbone.", 0) != 0) continue;
    const auto it = h.tensors.find(entry.name);
    if (it == h.tensors.end())
      throw std::runtime_error("checkpoint " + path + " is missing tensor '" +
                               entry.name + "'");
    Tensor& t = *entry.t;
    const DirectoryEntry& d = it->second;
    if (d.n != t.n || d.c != t.c || d.h != t.h || d.w != t.w)
      throw std::runtime_error(
          "shape mismatch for tensor '" + entry.name + "': checkpoint has " +
          shape_str(d.n, d.c, d.h, d.w) + ", model expects " +
          shape_str(t.n, t.c, t.h, t.w));
    f.seekg((std::streamoff)(h.payload_start + d.offset));
    f.read(reinterpret_cast<char*>(t.ptr()),
           (std::streamsize)(t.size() * sizeof(float)));
    if (!f)
      throw std::runtime_error("truncated payload for tensor '" + entry.name +
                               "' in " + path);
  }
}

}  // namespace mtnet
