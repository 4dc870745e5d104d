#pragma once

// JSON helpers shared by the config and scenario loaders.

#include <string>

#include "json.hpp"
#include "parcell/config.hpp"
#include "parcell/errors.hpp"

namespace parcell::detail {

using Json = nlohmann::json;

[[noreturn]] inline void config_fail(const std::string& source, const std::string& msg) {
  throw Error(ErrorCode::ConfigError, source + ": " + msg);
}

Json parse_json(std::string_view text, const std::string& source);
double require_number(const Json& obj, const char* key, const std::string& where);
double number_or(const Json& obj, const char* key, double fallback, const std::string& where);
std::vector<double> number_array(const Json& v, const std::string& where);
PackConfig pack_from_json(const Json& j, const std::string& source);

}  // namespace parcell::detail
