#pragma once

// A small TOML reader covering what run configs use: [table] and [a.b]
// headers, key = value pairs with bare or quoted keys, dotted keys, basic
// strings, integers, floats, booleans, arrays (possibly spanning lines) and
// inline tables. Dates, literal strings and arrays of tables are rejected.

#include <string_view>

#include <nlohmann/json.hpp>

namespace kaplan::toml_lite {

/// Throws Error(ConfigInvalid) with the offending line number.
[[nodiscard]] nlohmann::json parse(std::string_view text);

}  // namespace kaplan::toml_lite
