// Minimal notice sink. Library code reports recoverable oddities (dropped
// columns, clamped values, undefined correlations) here instead of failing.
#pragma once

#include <atomic>
#include <iostream>
#include <string_view>

namespace phishvqc::log {

enum class Level { Quiet = 0, Notice = 1, Debug = 2 };

inline std::atomic<Level>& level_ref() {
  static std::atomic<Level> level{Level::Notice};
  return level;
}

inline void set_level(Level level) { level_ref().store(level); }
inline Level level() { return level_ref().load(); }

inline void notice(std::string_view msg) {
  if (level() >= Level::Notice) std::clog << "[phishvqc] " << msg << '\n';
}

inline void debug(std::string_view msg) {
  if (level() >= Level::Debug) std::clog << "[phishvqc:debug] " << msg << '\n';
}

}  // namespace phishvqc::log
