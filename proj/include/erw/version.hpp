#pragma once

namespace erw {

inline constexpr const char* kToolkitVersion = "1.0.0";
inline constexpr int kSchemaVersion = 1;

}  // namespace erw
