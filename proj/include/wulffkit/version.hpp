#pragma once

namespace wulffkit {

/// Embedded in every artifact header and in cache keys.
inline constexpr const char* kVersion = "0.1.0";

}  // namespace wulffkit
