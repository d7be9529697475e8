#include "fedsim/log.hpp"

#include <atomic>
#include <stdexcept>

namespace fedsim {

namespace {
std::atomic<int> g_threshold{static_cast<int>(LogLevel::kWarn)};

const char* level_tag(LogLevel level) {
  switch (level) {
    case LogLevel::kError: return "error";
    case LogLevel::kWarn: return "warn";
    case LogLevel::kInfo: return "info";
    case LogLevel::kDebug: return "debug";
  }
  return "?";
}
}  // namespace

LogLevel log_threshold() { return static_cast<LogLevel>(g_threshold.load()); }

void set_log_threshold(LogLevel level) { g_threshold.store(static_cast<int>(level)); }

LogLevel log_level_from_name(const std::string& name) {
  if (name == "error") return LogLevel::kError;
  if (name == "warn") return LogLevel::kWarn;
  if (name == "info") return LogLevel::kInfo;
  if (name == "debug") return LogLevel::kDebug;
  throw std::invalid_argument("unknown log level '" + name + "'");
}

void log_message(LogLevel level, const std::string& message) {
  if (static_cast<int>(level) > g_threshold.load()) return;
  std::fprintf(stderr, "[%s] %s\n", level_tag(level), message.c_str());
}

}  // namespace fedsim
