#pragma once

// Reference tables shared by the unit and acceptance suites.

#include <array>

namespace rrdps::fixtures {

// Three consecutive L = 5 packets (time slots 0..14). Phase row: 1 = pi.
inline constexpr std::array<int, 15> example_phases = {1, 0, 1, 1, 0, 0, 1, 0, 0, 0, 1, 0, 1, 1, 0};

// Printed interference bit per time slot for delays T, 2T, 3T, 4T.
inline constexpr std::array<std::array<int, 15>, 4> example_interference = {{
    {0, 1, 1, 0, 1, 0, 1, 1, 0, 0, 1, 1, 1, 0, 1},
    {1, 1, 0, 1, 1, 1, 1, 0, 1, 0, 1, 0, 0, 1, 1},
    {1, 0, 0, 0, 0, 1, 0, 0, 0, 1, 1, 0, 1, 0, 0},
    {0, 0, 1, 0, 1, 0, 0, 1, 0, 0, 0, 0, 1, 1, 1},
}};

// Routing probability table for L = 5 in eighths: row = delay M, column =
// pulse 1..5.
inline constexpr std::array<std::array<int, 5>, 4> routing_eighths = {{
    {1, 2, 2, 2, 1},
    {1, 1, 2, 1, 1},
    {1, 1, 0, 1, 1},
    {1, 0, 0, 0, 1},
}};

// Maximum tolerable system error rate per packet length.
struct TolerableError {
    int L;
    double e_sys_max;
};
inline constexpr std::array<TolerableError, 5> tolerable_esys = {{
    {5, 0.023},
    {16, 0.133},
    {32, 0.186},
    {64, 0.221},
    {128, 0.244},
}};

} // namespace rrdps::fixtures
