#pragma once

#include <cstdint>

namespace tracemax {

using RouterId = std::uint32_t;

// Physical port index on a router, 1-based.
using PortIndex = std::uint32_t;

// Port label written into the option field. Valid values are 1..255;
// 0 is reserved so zero-fill can never be read back as a mark.
using TracemaxId = std::uint16_t;

inline constexpr TracemaxId kMaxTracemaxId = 255;

}  // namespace tracemax
