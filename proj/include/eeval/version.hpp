#pragma once

namespace eeval {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace eeval
