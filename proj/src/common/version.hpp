#pragma once

namespace wsground {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace wsground
