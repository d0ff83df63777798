#include "otval/log.hpp"

#include "otval/error.hpp"

#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include <cstdlib>
#include <string>

namespace otval {

void configure_logging(std::string_view level) {
  std::string name(level);
  if (name.empty()) {
    const char* env = std::getenv("OTVAL_LOG_LEVEL");
    name = env != nullptr ? env : "warn";
  }
  const auto parsed = spdlog::level::from_str(name);
  if (parsed == spdlog::level::off && name != "off") {
    throw InputError("unknown log level '" + name + "'");
  }
  auto logger = spdlog::get("otval");
  if (logger == nullptr) logger = spdlog::stderr_color_mt("otval");
  spdlog::set_default_logger(logger);
  spdlog::set_level(parsed);
  spdlog::set_pattern("[%H:%M:%S.%e] [%l] %v");
}

}  // namespace otval
