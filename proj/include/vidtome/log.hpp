#pragma once

#include <string>

namespace vidtome {

enum class LogLevel {
    Error = 0,
    Info = 1,
    Debug = 2,
};

// Threshold parsed once from VIDTOME_LOG ("error", "info", "debug");
// anything else, including unset, means errors only.
LogLevel log_level();

// Writes "[level] message" to stderr when `level` passes the threshold.
void log_line(LogLevel level, const std::string& message);

} // namespace vidtome
