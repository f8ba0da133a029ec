#pragma once

#include <string_view>

namespace mvsim {

inline constexpr std::string_view kVersion = "mvsim 0.1.0";

}  // namespace mvsim
