#pragma once

namespace toa {

inline constexpr const char* version = "0.1.0";

}  // namespace toa
