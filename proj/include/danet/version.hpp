#pragma once

namespace danet {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace danet
