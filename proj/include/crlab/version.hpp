#pragma once

namespace crlab {

inline constexpr const char* kLibraryVersion = "0.1.0";

}  // namespace crlab
