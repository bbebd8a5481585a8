#include "subopt/log.hpp"

#include <cstdlib>
#include <string_view>

namespace subopt::log {

Level threshold() {
  static const Level level = [] {
    const char* env = std::getenv("SUBOPT_LOG");
    const std::string_view value = env ? env : "";
    if (value == "error") return Level::Error;
    if (value == "info") return Level::Info;
    if (value == "debug") return Level::Debug;
    return Level::Warn;
  }();
  return level;
}

std::mutex& detail::sink_mutex() {
  static std::mutex m;
  return m;
}

}  // namespace subopt::log
