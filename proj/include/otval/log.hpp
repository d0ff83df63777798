#pragma once

#include <string_view>

namespace otval {

/// Routes spdlog's default logger to stderr. The level comes from `level`
/// when non-empty, else from OTVAL_LOG_LEVEL, else "warn". Safe to call more
/// than once; throws InputError on an unknown level name.
void configure_logging(std::string_view level = {});

}  // namespace otval
