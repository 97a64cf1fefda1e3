#include "vidtome/log.hpp"

#include <cstdio>
#include <cstdlib>

namespace vidtome {

LogLevel log_level() {
    static const LogLevel level = [] {
        const char* env = std::getenv("VIDTOME_LOG");
        if (env == nullptr) {
            return LogLevel::Error;
        }
        const std::string v(env);
        if (v == "debug") {
            return LogLevel::Debug;
        }
        if (v == "info") {
            return LogLevel::Info;
        }
        return LogLevel::Error;
    }();
    return level;
}

void log_line(LogLevel level, const std::string& message) {
    if (static_cast<int>(level) > static_cast<int>(log_level())) {
        return;
    }
    const char* tag = level == LogLevel::Debug ? "debug" : (level == LogLevel::Info ? "info" : "error");
    std::fprintf(stderr, "[%s] %s\n", tag, message.c_str());
}

} // namespace vidtome
