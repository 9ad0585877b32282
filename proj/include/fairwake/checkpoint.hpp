// fairwake/checkpoint.hpp

// Copyright 2026  The Fairwake Authors

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

// Versioned binary checkpoint container: "FWCK" magic, format version, a JSON
// header carrying the architecture and the training seed, then the named
// parameter tensors in the fixed tensor order as little-endian doubles.
// Writes are atomic (write to a temp file, then rename) and byte-stable for
// equal inputs.

#pragma once

#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "fairwake/common.hpp"
#include "fairwake/gru.hpp"

namespace fairwake {

inline constexpr char kCheckpointMagic[4] = {'F', 'W', 'C', 'K'};
inline constexpr std::uint32_t kCheckpointVersion = 1;

struct Checkpoint {
  ModelParams params;
  std::uint64_t seed = 0;
};

namespace detail {

inline void append_u32le(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

inline void append_u64le(std::string& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

}  // namespace detail

inline void save_checkpoint(const std::filesystem::path& path,
                            const ModelParams& params, std::uint64_t seed) {
  nlohmann::json header;
  header["format"] = "fairwake-checkpoint";
  header["version"] = kCheckpointVersion;
  header["input_size"] = params.config.input_size;
  header["hidden_size"] = params.config.hidden_size;
  header["n_classes"] = params.config.n_classes;
  header["seed"] = seed;
  {
    nlohmann::json order = nlohmann::json::array();
    for (const auto& t : ModelParams::tensor_refs(params)) order.push_back(t.name);
    header["tensors"] = order;
  }
  const std::string header_text = header.dump();

  std::string blob;
  blob.append(kCheckpointMagic, 4);
  detail::append_u32le(blob, kCheckpointVersion);
  detail::append_u32le(blob, static_cast<std::uint32_t>(header_text.size()));
  blob.append(header_text);
  for (const auto& t : ModelParams::tensor_refs(params)) {
    detail::append_u64le(blob, static_cast<std::uint64_t>(t.size));
    blob.append(reinterpret_cast<const char*>(t.data),
                static_cast<std::size_t>(t.size) * sizeof(double));
  }

  const std::filesystem::path tmp = path.string() + ".tmp";
  {
    std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
    if (!os) throw DataError("cannot write checkpoint: " + tmp.string());
    os.write(blob.data(), static_cast<std::streamsize>(blob.size()));
    if (!os) throw DataError("short write to checkpoint: " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

inline Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open checkpoint: " + path.string());
  std::string blob((std::istreambuf_iterator<char>(in)),
                   std::istreambuf_iterator<char>());
  if (blob.size() < 12 || std::memcmp(blob.data(), kCheckpointMagic, 4) != 0)
    throw ConfigError("not a fairwake checkpoint: " + path.string());

  std::size_t pos = 4;
  auto read_u32 = [&]() {
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i)
      v |= static_cast<std::uint32_t>(static_cast<unsigned char>(blob[pos++])) << (8 * i);
    return v;
  };
  auto read_u64 = [&]() {
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i)
      v |= static_cast<std::uint64_t>(static_cast<unsigned char>(blob[pos++])) << (8 * i);
    return v;
  };

  const std::uint32_t version = read_u32();
  if (version != kCheckpointVersion)
    throw ConfigError("unsupported checkpoint version " + std::to_string(version));
  const std::uint32_t header_len = read_u32();
  if (pos + header_len > blob.size())
    throw ConfigError("truncated checkpoint header: " + path.string());
  const nlohmann::json header =
      nlohmann::json::parse(blob.substr(pos, header_len), nullptr, false);
  if (header.is_discarded())
    throw ConfigError("corrupt checkpoint header: " + path.string());
  pos += header_len;

  ModelConfig cfg;
  cfg.input_size = header.at("input_size").get<int>();
  cfg.hidden_size = header.at("hidden_size").get<int>();
  cfg.n_classes = header.at("n_classes").get<int>();

  Checkpoint ckpt;
  ckpt.seed = header.at("seed").get<std::uint64_t>();
  ckpt.params = ModelParams::zeros(cfg);
  for (auto& t : ModelParams::tensor_refs(ckpt.params)) {
    if (pos + 8 > blob.size())
      throw ConfigError("truncated checkpoint tensors: " + path.string());
    const std::uint64_t n = read_u64();
    if (n != static_cast<std::uint64_t>(t.size))
      throw ConfigError(std::string("checkpoint tensor size mismatch on ") + t.name);
    const std::size_t bytes = static_cast<std::size_t>(n) * sizeof(double);
    if (pos + bytes > blob.size())
      throw ConfigError("truncated checkpoint tensors: " + path.string());
    std::memcpy(t.data, blob.data() + pos, bytes);
    pos += bytes;
  }
  return ckpt;
}

/// FNV-1a 64 over the file bytes; used by determinism checks.
inline std::string file_digest_hex(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open for digest: " + path.string());
  std::uint64_t h = 1469598103934665603ULL;
  char c;
  while (in.get(c)) {
    h ^= static_cast<unsigned char>(c);
    h *= 1099511628211ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return std::string(buf);
}

}  // namespace fairwake
