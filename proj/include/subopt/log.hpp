#pragma once

#include <iostream>
#include <mutex>
#include <sstream>

namespace subopt::log {

enum class Level { Error = 0, Warn = 1, Info = 2, Debug = 3 };

/// Threshold read once from SUBOPT_LOG (error, warn, info, debug); defaults to warn.
Level threshold();

namespace detail {
std::mutex& sink_mutex();
}

template <typename... Args>
void write(Level level, const char* tag, const Args&... args) {
  if (static_cast<int>(level) > static_cast<int>(threshold())) return;
  std::ostringstream os;
  os << "[subopt " << tag << "] ";
  (os << ... << args);
  os << '\n';
  std::lock_guard lock(detail::sink_mutex());
  std::cerr << os.str();
}

template <typename... Args> void error(const Args&... args) { write(Level::Error, "error", args...); }
template <typename... Args> void warn(const Args&... args) { write(Level::Warn, "warn", args...); }
template <typename... Args> void info(const Args&... args) { write(Level::Info, "info", args...); }
template <typename... Args> void debug(const Args&... args) { write(Level::Debug, "debug", args...); }

}  // namespace subopt::log
