// Shared error types, exit codes and logging.
#pragma once

#include <cstdio>
#include <cstdlib>
#include <stdexcept>
#include <string>

namespace advisory {

// Exit codes used by the CLI (see README).
enum ExitCode : int {
  kExitOk = 0,
  kExitConfigError = 2,
  kExitMissingArtifact = 3,
  kExitNumericFailure = 4,
};

// Bad configuration, malformed input, shape mismatch.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// A required file (checkpoint, dataset, config) is absent.
struct MissingArtifactError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Non-finite values where finite ones are required.
struct NumericError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Training diverged (NaN gradient/loss); message names the parameter.
struct TrainingError : NumericError {
  using NumericError::NumericError;
};

namespace log {

enum class Level { kDebug = 0, kInfo = 1, kWarn = 2, kError = 3, kQuiet = 4 };

// Verbosity comes from the ADVISORY_LOG environment variable
// (debug|info|warn|error|quiet), default info.
inline Level threshold() {
  static Level lvl = [] {
    const char* env = std::getenv("ADVISORY_LOG");
    if (env == nullptr) return Level::kInfo;
    const std::string v(env);
    if (v == "debug") return Level::kDebug;
    if (v == "warn") return Level::kWarn;
    if (v == "error") return Level::kError;
    if (v == "quiet") return Level::kQuiet;
    return Level::kInfo;
  }();
  return lvl;
}

inline void emit(Level lvl, const char* tag, const std::string& msg) {
  if (lvl < threshold()) return;
  std::fprintf(stderr, "[%s] %s\n", tag, msg.c_str());
}

inline void debug(const std::string& msg) { emit(Level::kDebug, "debug", msg); }
inline void info(const std::string& msg) { emit(Level::kInfo, "info", msg); }
inline void warn(const std::string& msg) { emit(Level::kWarn, "warn", msg); }
inline void error(const std::string& msg) { emit(Level::kError, "error", msg); }

}  // namespace log
}  // namespace advisory
