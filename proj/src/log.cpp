#include "cogkit/log.hpp"

#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <mutex>

namespace cogkit {

namespace {

LogLevel parse_level(const char* s) {
    if (!s) return LogLevel::warn;
    if (std::strcmp(s, "debug") == 0) return LogLevel::debug;
    if (std::strcmp(s, "info") == 0) return LogLevel::info;
    if (std::strcmp(s, "warn") == 0) return LogLevel::warn;
    if (std::strcmp(s, "error") == 0) return LogLevel::error;
    if (std::strcmp(s, "off") == 0) return LogLevel::off;
    return LogLevel::warn;
}

const char* level_name(LogLevel l) {
    switch (l) {
        case LogLevel::debug: return "debug";
        case LogLevel::info: return "info";
        case LogLevel::warn: return "warn";
        case LogLevel::error: return "error";
        default: return "off";
    }
}

std::string json_escape(const std::string& s) {
    std::string out;
    out.reserve(s.size() + 8);
    for (char c : s) {
        switch (c) {
            case '"': out += "\\\""; break;
            case '\\': out += "\\\\"; break;
            case '\n': out += "\\n"; break;
            case '\r': out += "\\r"; break;
            case '\t': out += "\\t"; break;
            default:
                if (static_cast<unsigned char>(c) < 0x20) {
                    char buf[8];
                    std::snprintf(buf, sizeof(buf), "\\u%04x", c);
                    out += buf;
                } else {
                    out += c;
                }
        }
    }
    return out;
}

std::mutex g_log_mutex;

}  // namespace

LogLevel log_threshold() {
    static LogLevel level = parse_level(std::getenv("COGKIT_LOG"));
    return level;
}

void log_message(LogLevel level, const std::string& msg) {
    if (level < log_threshold()) return;
    std::lock_guard<std::mutex> lock(g_log_mutex);
    std::fprintf(stderr, "{\"level\":\"%s\",\"msg\":\"%s\"}\n", level_name(level),
                 json_escape(msg).c_str());
}

}  // namespace cogkit
