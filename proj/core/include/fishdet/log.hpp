#pragma once

#include <string_view>

namespace fishdet {

/// Sets the global log level from a name ("trace" .. "off"). Unknown names are ignored.
void set_log_level(std::string_view level);

/// Reads FISHDET_LOG_LEVEL; used by the CLI at startup.
void init_logging_from_env();

}  // namespace fishdet
