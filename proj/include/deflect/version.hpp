#pragma once

namespace deflect {

inline constexpr const char* kVersion = "1.0.0";

}  // namespace deflect
