// fairwake/wav.hpp

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

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "fairwake/common.hpp"

namespace fairwake {

/// Mono PCM audio. Samples are normalized to [-1, 1) on read (int16 / 32768),
/// so a read/write round trip is sample-exact.
struct Waveform {
  std::vector<double> samples;
  int sample_rate = 16000;

  double duration_seconds() const {
    return sample_rate > 0
               ? static_cast<double>(samples.size()) / sample_rate
               : 0.0;
  }
};

namespace detail {

inline std::uint32_t read_u32le(const unsigned char* p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) |
         (static_cast<std::uint32_t>(p[3]) << 24);
}

inline std::uint16_t read_u16le(const unsigned char* p) {
  return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
}

inline void put_u32le(std::string& out, std::uint32_t v) {
  out.push_back(static_cast<char>(v & 0xff));
  out.push_back(static_cast<char>((v >> 8) & 0xff));
  out.push_back(static_cast<char>((v >> 16) & 0xff));
  out.push_back(static_cast<char>((v >> 24) & 0xff));
}

inline void put_u16le(std::string& out, std::uint16_t v) {
  out.push_back(static_cast<char>(v & 0xff));
  out.push_back(static_cast<char>((v >> 8) & 0xff));
}

}  // namespace detail

/// Reads a 16-bit signed PCM mono WAV file. Anything else (float WAV,
/// multi-channel, missing chunks) is rejected with DataError.
inline Waveform read_wav(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open WAV file: " + path.string());
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)),
                                   std::istreambuf_iterator<char>());
  if (bytes.size() < 12 || std::memcmp(bytes.data(), "RIFF", 4) != 0 ||
      std::memcmp(bytes.data() + 8, "WAVE", 4) != 0)
    throw DataError("not a RIFF/WAVE file: " + path.string());

  bool have_fmt = false;
  std::uint16_t format = 0;
  std::uint16_t channels = 0;
  std::uint32_t sample_rate = 0;
  std::uint16_t bits = 0;
  const unsigned char* data = nullptr;
  std::uint32_t data_len = 0;

  std::size_t pos = 12;
  while (pos + 8 <= bytes.size()) {
    const unsigned char* hdr = bytes.data() + pos;
    const std::uint32_t chunk_len = detail::read_u32le(hdr + 4);
    const std::size_t body = pos + 8;
    if (body + chunk_len > bytes.size())
      throw DataError("truncated WAV chunk in " + path.string());
    if (std::memcmp(hdr, "fmt ", 4) == 0) {
      if (chunk_len < 16) throw DataError("bad fmt chunk in " + path.string());
      const unsigned char* f = bytes.data() + body;
      format = detail::read_u16le(f);
      channels = detail::read_u16le(f + 2);
      sample_rate = detail::read_u32le(f + 4);
      bits = detail::read_u16le(f + 14);
      have_fmt = true;
    } else if (std::memcmp(hdr, "data", 4) == 0) {
      data = bytes.data() + body;
      data_len = chunk_len;
    }
    pos = body + chunk_len + (chunk_len & 1u);  // chunks are word-aligned
  }
  if (!have_fmt || data == nullptr)
    throw DataError("missing fmt/data chunk in " + path.string());
  if (format != 1 || bits != 16)
    throw DataError("unsupported WAV encoding (want 16-bit PCM): " + path.string());
  if (channels != 1)
    throw DataError("unsupported channel count (want mono): " + path.string());

  Waveform w;
  w.sample_rate = static_cast<int>(sample_rate);
  const std::size_t n = data_len / 2;
  w.samples.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto v = static_cast<std::int16_t>(
        static_cast<std::uint16_t>(data[2 * i] | (data[2 * i + 1] << 8)));
    w.samples[i] = static_cast<double>(v) / 32768.0;
  }
  return w;
}

/// Writes 16-bit PCM mono. Samples are clamped to [-1, 1] and quantized with
/// the same 32768 scale used on read.
inline void write_wav(const std::filesystem::path& path, const Waveform& w) {
  if (w.sample_rate <= 0) throw ConfigError("write_wav: sample_rate must be > 0");
  const std::uint32_t n = static_cast<std::uint32_t>(w.samples.size());
  const std::uint32_t data_len = n * 2;
  std::string out;
  out.reserve(44 + data_len);
  out.append("RIFF");
  detail::put_u32le(out, 36 + data_len);
  out.append("WAVE");
  out.append("fmt ");
  detail::put_u32le(out, 16);
  detail::put_u16le(out, 1);  // PCM
  detail::put_u16le(out, 1);  // mono
  detail::put_u32le(out, static_cast<std::uint32_t>(w.sample_rate));
  detail::put_u32le(out, static_cast<std::uint32_t>(w.sample_rate) * 2);
  detail::put_u16le(out, 2);   // block align
  detail::put_u16le(out, 16);  // bits
  out.append("data");
  detail::put_u32le(out, data_len);
  for (std::uint32_t i = 0; i < n; ++i) {
    const double x = std::clamp(w.samples[i], -1.0, 1.0);
    const auto q = static_cast<long>(std::lround(x * 32768.0));
    const auto v = static_cast<std::int16_t>(std::clamp(q, -32768L, 32767L));
    detail::put_u16le(out, static_cast<std::uint16_t>(v));
  }
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw DataError("cannot write WAV file: " + path.string());
  os.write(out.data(), static_cast<std::streamsize>(out.size()));
  if (!os) throw DataError("short write to WAV file: " + path.string());
}

}  // namespace fairwake
