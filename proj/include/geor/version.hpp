#pragma once

namespace geor {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace geor
