#pragma once

namespace swingpde {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace swingpde
