#pragma once

namespace entropy_cpd {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace entropy_cpd
