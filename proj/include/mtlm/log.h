// include/mtlm/log.h

// Copyright 2026  MTLM toolkit authors

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

#ifndef MTLM_LOG_H_
#define MTLM_LOG_H_

#include <cstdio>
#include <cstdlib>
#include <cstring>

namespace mtlm {

enum class LogLevel { kError = 0, kInfo = 1, kDebug = 2 };

// Level comes from the MTLM_LOG environment variable: error|info|debug.
inline LogLevel log_level() {
  static LogLevel level = [] {
    const char* env = std::getenv("MTLM_LOG");
    if (env == nullptr) return LogLevel::kInfo;
    if (std::strcmp(env, "error") == 0) return LogLevel::kError;
    if (std::strcmp(env, "debug") == 0) return LogLevel::kDebug;
    return LogLevel::kInfo;
  }();
  return level;
}

#define MTLM_LOG_AT(lvl, tag, ...)                        \
  do {                                                    \
    if (::mtlm::log_level() >= (lvl)) {                   \
      std::fprintf(stderr, "[mtlm %s] ", tag);            \
      std::fprintf(stderr, __VA_ARGS__);                  \
      std::fprintf(stderr, "\n");                         \
    }                                                     \
  } while (0)

#define MTLM_ERROR(...) MTLM_LOG_AT(::mtlm::LogLevel::kError, "error", __VA_ARGS__)
#define MTLM_INFO(...) MTLM_LOG_AT(::mtlm::LogLevel::kInfo, "info", __VA_ARGS__)
#define MTLM_DEBUG(...) MTLM_LOG_AT(::mtlm::LogLevel::kDebug, "debug", __VA_ARGS__)

}  // namespace mtlm

#endif  // MTLM_LOG_H_
