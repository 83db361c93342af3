#pragma once

namespace fieldnav {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace fieldnav
