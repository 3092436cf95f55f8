#pragma once

#include <string_view>

namespace ccfp {

inline constexpr std::string_view tool_name = "ccfp";
inline constexpr std::string_view tool_version = "1.0.0";

}  // namespace ccfp
