#ifndef N3POM_LOG_HPP
#define N3POM_LOG_HPP

#include <iostream>
#include <sstream>

namespace n3pom {

enum class LogLevel { quiet = 0, info = 1, debug = 2 };

/// Level from the N3POM_LOG environment variable (quiet|info|debug or 0-2);
/// defaults to quiet.
LogLevel log_level();
void set_log_level(LogLevel level);

/// Buffers one line and writes it to stderr on destruction if enabled.
class LogLine {
 public:
  explicit LogLine(bool enabled) : enabled_(enabled) {}
  LogLine(const LogLine&) = delete;
  LogLine& operator=(const LogLine&) = delete;
  ~LogLine() {
    if (enabled_) std::cerr << buf_.str() << '\n';
  }

  template <class T>
  LogLine& operator<<(const T& v) {
    if (enabled_) buf_ << v;
    return *this;
  }

 private:
  bool enabled_;
  std::ostringstream buf_;
};

inline LogLine log_info() { return LogLine(log_level() >= LogLevel::info); }
inline LogLine log_debug() { return LogLine(log_level() >= LogLevel::debug); }

}  // namespace n3pom

#endif  // N3POM_LOG_HPP
