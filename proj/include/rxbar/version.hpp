#pragma once

namespace rxbar {

inline constexpr const char* kVersion = "0.1.0";

} // namespace rxbar
