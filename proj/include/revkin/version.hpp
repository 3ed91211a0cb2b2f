#pragma once

namespace revkin {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace revkin
