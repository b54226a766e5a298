#pragma once

#include "radioslam/types.hpp"

#include <cstdint>
#include <vector>

namespace radioslam {

/// Constant turn-rate motion with known speed and turn rate.
struct MotionConfig {
    double speed = 22.22;          // m/s
    double turn_rate = kPi / 10;   // rad/s
    double period = 0.5;           // s
    Mat4 process_noise = Vec4(0.2 * 0.2, 0.2 * 0.2, 0.001 * 0.001, 0.2 * 0.2).asDiagonal();

    void validate() const;
};

/// Noiseless one-step transition. Bias is unchanged and the heading is
/// wrapped to (-pi, pi].
UEState propagate(const UEState& ue, const MotionConfig& cfg);

/// d propagate / d state, ordered (x, y, heading, bias).
Mat4 transition_jacobian(const UEState& ue, const MotionConfig& cfg);

/// States s_1..s_steps obtained by iterating `propagate` from `init`, with
/// additive N(0, Q) process noise when `noise` is set.
std::vector<UEState> simulate_trajectory(const UEState& init, const MotionConfig& cfg, int steps,
                                         bool noise, std::uint64_t seed);

}  // namespace radioslam
