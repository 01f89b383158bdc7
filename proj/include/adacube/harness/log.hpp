#pragma once

#include <cstdio>
#include <cstdlib>
#include <string>
#include <string_view>

namespace adacube::log {

enum class Level { Off = 0, Info = 1, Debug = 2 };

/// Verbosity from ADACUBE_LOG (off|info|debug); default off.
inline Level level() {
  static const Level lvl = [] {
    const char* v = std::getenv("ADACUBE_LOG");
    if (!v) return Level::Off;
    const std::string_view s(v);
    if (s == "debug") return Level::Debug;
    if (s == "info") return Level::Info;
    return Level::Off;
  }();
  return lvl;
}

inline void write(Level at, const std::string& msg) {
  if (static_cast<int>(level()) < static_cast<int>(at)) return;
  std::fprintf(stderr, "[adacube %s] %s\n", at == Level::Debug ? "debug" : "info", msg.c_str());
}

inline void info(const std::string& msg) { write(Level::Info, msg); }
inline void debug(const std::string& msg) { write(Level::Debug, msg); }

}  // namespace adacube::log
