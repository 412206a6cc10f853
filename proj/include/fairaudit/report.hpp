#pragma once

#include <string>

#include <json.hpp>

namespace fairaudit {

using ordered_json = nlohmann::ordered_json;

/// All reported reals are rounded to 6 decimals; non-finite values become
/// JSON null. Keeps report bytes stable across runs.
ordered_json json_real(double v);

/// Standard envelope: tool block, config echo, then the payload keys in
/// insertion order. Serialization is key-order preserving.
ordered_json make_envelope(const ordered_json& config);

void write_json_report(const std::string& path, const ordered_json& doc);

}  // namespace fairaudit
