#include "n3pom/log.hpp"

#include <atomic>
#include <cstdlib>
#include <string_view>

namespace n3pom {

namespace {

LogLevel from_env() {
  const char* env = std::getenv("N3POM_LOG");
  if (env == nullptr) return LogLevel::quiet;
  const std::string_view v(env);
  if (v == "debug" || v == "2") return LogLevel::debug;
  if (v == "info" || v == "1") return LogLevel::info;
  return LogLevel::quiet;
}

std::atomic<int>& level_slot() {
  static std::atomic<int> slot{static_cast<int>(from_env())};
  return slot;
}

}  // namespace

LogLevel log_level() { return static_cast<LogLevel>(level_slot().load(std::memory_order_relaxed)); }

void set_log_level(LogLevel level) { level_slot().store(static_cast<int>(level), std::memory_order_relaxed); }

}  // namespace n3pom
