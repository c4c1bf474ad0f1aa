#pragma once

#include <vector>

#include "mfc/controller.hpp"

namespace mfc {

enum class ReferenceKind { hold, smoothed_step_sequence, sinusoid_mix };

// Ramp from the previous level to target over [start, start + duration].
struct StepSegment {
    double start = 0.0;
    double target = 0.0;
    double duration = 1.0;
};

struct SinusoidComponent {
    double amplitude = 0.0;
    double frequency = 0.0;  // Hz
    double phase = 0.0;      // rad
};

/**
 * Reference trajectory. The step part starts at `base` and follows the
 * segments with a cubic smoothstep h(s) = 3s^2 - 2s^3 per transition, so
 * y* is C^1. A sinusoid_mix adds its sinusoids on top of the steps.
 */
struct ReferenceSpec {
    ReferenceKind kind = ReferenceKind::hold;
    double base = 0.0;
    std::vector<StepSegment> segments;
    std::vector<SinusoidComponent> sinusoids;

    void validate() const;
    double range_estimate(double t0, double t1, double dt) const;
};

Setpoint eval_reference(const ReferenceSpec& spec, double t);

// Max over the grid t0, t0+dt, ... <= t1 of |central difference of y* - ydot*|.
double derivative_consistency_check(const ReferenceSpec& spec, double t0, double t1, double dt);

}  // namespace mfc
