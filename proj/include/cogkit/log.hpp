#pragma once

#include <string>

namespace cogkit {

enum class LogLevel { debug = 0, info = 1, warn = 2, error = 3, off = 4 };

/// Minimum level actually emitted. Controlled by the COGKIT_LOG environment
/// variable (debug|info|warn|error|off); defaults to warn.
LogLevel log_threshold();

/// Writes one line-delimited JSON record {"level":...,"msg":...} to stderr.
void log_message(LogLevel level, const std::string& msg);

inline void log_debug(const std::string& msg) { log_message(LogLevel::debug, msg); }
inline void log_info(const std::string& msg) { log_message(LogLevel::info, msg); }
inline void log_warn(const std::string& msg) { log_message(LogLevel::warn, msg); }
inline void log_error(const std::string& msg) { log_message(LogLevel::error, msg); }

}  // namespace cogkit
