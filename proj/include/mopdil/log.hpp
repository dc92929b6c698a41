#pragma once

// Diagnostics on stderr, gated by MOPDIL_LOG={error|info|debug} (default error).

#include <string_view>

namespace mopdil::log {

enum class Level { Error = 0, Info = 1, Debug = 2 };

Level threshold();
void write(Level level, std::string_view message);

inline void error(std::string_view m) { write(Level::Error, m); }
inline void info(std::string_view m) { write(Level::Info, m); }
inline void debug(std::string_view m) { write(Level::Debug, m); }

}  // namespace mopdil::log
