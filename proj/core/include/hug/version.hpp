#pragma once

namespace hug {

inline constexpr const char* kLibraryVersion = "0.1.0";
inline constexpr int kStateSchemaVersion = 1;

}  // namespace hug
