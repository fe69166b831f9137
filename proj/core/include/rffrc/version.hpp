#pragma once

namespace rffrc {

/// Library version string (major.minor.patch).
inline constexpr const char* kVersion = "0.1.0";

/// On-disk model container format revision; see forecaster.hpp.
inline constexpr unsigned kModelFormatVersion = 1;

}  // namespace rffrc
