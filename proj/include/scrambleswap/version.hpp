#pragma once

namespace scrambleswap {

inline constexpr const char* version = "0.1.0";

} // namespace scrambleswap
