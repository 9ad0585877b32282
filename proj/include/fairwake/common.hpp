// fairwake/common.hpp

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

#include <cstdio>
#include <cstdlib>
#include <stdexcept>
#include <string>

namespace fairwake {

/// Invalid or infeasible configuration (bad frame config, infeasible band
/// layout, unknown checkpoint format, ...). CLI maps this to exit code 1.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Bad or inconsistent data (manifest parse failures, missing teacher
/// entries, unjoinable predictions, ...). CLI maps this to exit code 2.
struct DataError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Shape mismatch between tensors, features, or model/checkpoint.
struct DimensionError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

namespace log {

enum class Level { kDebug = 0, kInfo = 1, kWarn = 2, kError = 3, kSilent = 4 };

/// Threshold parsed once from FAIRWAKE_LOG (debug|info|warn|error|silent).
inline Level threshold() {
  static const Level level = [] {
    const char* env = std::getenv("FAIRWAKE_LOG");
    if (env == nullptr) return Level::kWarn;
    const std::string v(env);
    if (v == "debug") return Level::kDebug;
    if (v == "info") return Level::kInfo;
    if (v == "warn") return Level::kWarn;
    if (v == "error") return Level::kError;
    if (v == "silent") return Level::kSilent;
    return Level::kWarn;
  }();
  return level;
}

inline void write(Level level, const std::string& msg) {
  if (level < threshold()) return;
  const char* tag = "info";
  switch (level) {
    case Level::kDebug: tag = "debug"; break;
    case Level::kInfo: tag = "info"; break;
    case Level::kWarn: tag = "warn"; break;
    case Level::kError: tag = "error"; break;
    case Level::kSilent: return;
  }
  std::fprintf(stderr, "[fairwake %s] %s\n", tag, msg.c_str());
}

inline void debug(const std::string& msg) { write(Level::kDebug, msg); }
inline void info(const std::string& msg) { write(Level::kInfo, msg); }
inline void warn(const std::string& msg) { write(Level::kWarn, msg); }
inline void error(const std::string& msg) { write(Level::kError, msg); }

}  // namespace log
}  // namespace fairwake
