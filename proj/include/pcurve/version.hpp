#pragma once

namespace pcurve {

inline constexpr const char* kVersion = "0.3.0";

} // namespace pcurve
