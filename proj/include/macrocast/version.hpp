#pragma once

namespace macrocast {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace macrocast
