#pragma once

namespace bobw {
inline constexpr const char* kVersion = "0.1.0";
}
