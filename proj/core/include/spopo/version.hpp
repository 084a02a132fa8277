#pragma once

namespace spopo {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace spopo
