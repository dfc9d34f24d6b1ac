#pragma once

namespace risklt {

inline constexpr const char* kVersion = "0.1.0";

}
