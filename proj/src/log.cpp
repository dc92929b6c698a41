#include "mopdil/log.hpp"

#include <cstdlib>
#include <iostream>
#include <string>

namespace mopdil::log {

Level threshold() {
    const char* env = std::getenv("MOPDIL_LOG");
    if (env == nullptr) return Level::Error;
    const std::string_view v(env);
    if (v == "debug") return Level::Debug;
    if (v == "info") return Level::Info;
    return Level::Error;
}

void write(Level level, std::string_view message) {
    if (static_cast<int>(level) > static_cast<int>(threshold())) return;
    static constexpr std::string_view tags[] = {"error", "info", "debug"};
    std::cerr << "[mopdil " << tags[static_cast<int>(level)] << "] " << message << '\n';
}

}  // namespace mopdil::log
