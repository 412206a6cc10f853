#pragma once

namespace fairaudit {

inline constexpr const char* kToolName = "fairaudit";
inline constexpr const char* kToolVersion = "0.1.0";

}  // namespace fairaudit
