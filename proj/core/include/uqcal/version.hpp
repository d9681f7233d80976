#pragma once

namespace uqcal {

inline constexpr const char* kToolName = "uqcal";
inline constexpr const char* kVersion = "0.1.0";

}  // namespace uqcal
