#include "fishdet/log.hpp"

#include <cstdlib>
#include <string>

#include <spdlog/spdlog.h>

namespace fishdet {

void set_log_level(std::string_view level) {
    const auto parsed = spdlog::level::from_str(std::string(level));
    // from_str maps unknown names to off; only accept it when asked for
    if (parsed == spdlog::level::off && level != "off") return;
    spdlog::set_level(parsed);
}

void init_logging_from_env() {
    if (const char* env = std::getenv("FISHDET_LOG_LEVEL")) set_log_level(env);
}

}  // namespace fishdet
