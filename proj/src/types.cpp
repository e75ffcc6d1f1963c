#include "odcsim/types.hpp"

#include <atomic>
#include <cstdio>
#include <cstdlib>
#include <cstring>

namespace odcsim {

namespace {
std::atomic<LogLevel> g_level{LogLevel::Warn};
}

LogLevel log_level() { return g_level.load(std::memory_order_relaxed); }

void set_log_level(LogLevel level) { g_level.store(level, std::memory_order_relaxed); }

void set_log_level_from_env() {
    const char* v = std::getenv("ODC_SIM_LOG");
    if (v == nullptr) return;
    if (std::strcmp(v, "quiet") == 0 || std::strcmp(v, "0") == 0) set_log_level(LogLevel::Quiet);
    else if (std::strcmp(v, "warn") == 0 || std::strcmp(v, "1") == 0) set_log_level(LogLevel::Warn);
    else if (std::strcmp(v, "info") == 0 || std::strcmp(v, "2") == 0) set_log_level(LogLevel::Info);
    else if (std::strcmp(v, "debug") == 0 || std::strcmp(v, "3") == 0) set_log_level(LogLevel::Debug);
}

void log_warn(const std::string& msg) {
    if (log_level() >= LogLevel::Warn) std::fprintf(stderr, "[warn] %s\n", msg.c_str());
}

void log_info(const std::string& msg) {
    if (log_level() >= LogLevel::Info) std::fprintf(stderr, "[info] %s\n", msg.c_str());
}

void log_debug(const std::string& msg) {
    if (log_level() >= LogLevel::Debug) std::fprintf(stderr, "[debug] %s\n", msg.c_str());
}

}  // namespace odcsim
