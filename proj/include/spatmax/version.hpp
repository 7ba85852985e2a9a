#pragma once

namespace spatmax {

inline constexpr const char* kToolName = "spatmax";
inline constexpr const char* kToolVersion = "0.1.0";

}  // namespace spatmax
