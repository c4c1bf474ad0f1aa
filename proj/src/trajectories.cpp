#include "mfc/trajectories.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace mfc {

void ReferenceSpec::validate() const {
    if (!std::isfinite(base)) {
        throw ConfigError("reference: base must be finite");
    }
    if (kind == ReferenceKind::hold && (!segments.empty() || !sinusoids.empty())) {
        throw ConfigError("reference: hold takes no segments or sinusoids");
    }
    if (kind == ReferenceKind::smoothed_step_sequence && !sinusoids.empty()) {
        throw ConfigError("reference: smoothed_step_sequence takes no sinusoids");
    }
    double free_from = 0.0;
    for (const StepSegment& s : segments) {
        if (!std::isfinite(s.start) || !std::isfinite(s.target) || !std::isfinite(s.duration)) {
            throw ConfigError("reference: segment fields must be finite");
        }
        if (!(s.duration > 0.0)) {
            throw ConfigError("reference: transition duration must be > 0");
        }
        if (s.start < free_from) {
            throw ConfigError("reference: segments must be ordered and non-overlapping");
        }
        free_from = s.start + s.duration;
    }
    for (const SinusoidComponent& c : sinusoids) {
        if (!std::isfinite(c.amplitude) || !std::isfinite(c.frequency) || !std::isfinite(c.phase)) {
            throw ConfigError("reference: sinusoid fields must be finite");
        }
    }
}

double ReferenceSpec::range_estimate(double t0, double t1, double dt) const {
    double lo = eval_reference(*this, t0).y_star;
    double hi = lo;
    for (double t = t0; t <= t1; t += dt) {
        const double y = eval_reference(*this, t).y_star;
        lo = std::min(lo, y);
        hi = std::max(hi, y);
    }
    return hi - lo;
}

Setpoint eval_reference(const ReferenceSpec& spec, double t) {
    if (!(t >= 0.0)) {
        throw ConfigError("eval_reference: t must be >= 0");
    }
    Setpoint sp{spec.base, 0.0};
    double level = spec.base;
    for (const StepSegment& s : spec.segments) {
        if (t < s.start) {
            break;
        }
        const double x = (t - s.start) / s.duration;
        if (x >= 1.0) {
            level = s.target;
            sp = Setpoint{level, 0.0};
            continue;
        }
        const double delta = s.target - level;
        sp.y_star = level + delta * x * x * (3.0 - 2.0 * x);
        sp.y_star_dot = delta * 6.0 * x * (1.0 - x) / s.duration;
        break;
    }
    for (const SinusoidComponent& c : spec.sinusoids) {
        const double w = 2.0 * std::numbers::pi * c.frequency;
        sp.y_star += c.amplitude * std::sin(w * t + c.phase);
        sp.y_star_dot += c.amplitude * w * std::cos(w * t + c.phase);
    }
    return sp;
}

double derivative_consistency_check(const ReferenceSpec& spec, double t0, double t1, double dt) {
    if (!(t1 > t0) || !(dt > 0.0) || t0 < 0.0) {
        throw ConfigError("derivative_consistency_check: need 0 <= t0 < t1 and dt > 0");
    }
    const auto y = [&](double t) { return eval_reference(spec, t).y_star; };
    const auto steps = static_cast<long>(std::floor((t1 - t0) / dt + 1e-9));
    double worst = 0.0;
    for (long k = 0; k <= steps; ++k) {
        const double t = t0 + static_cast<double>(k) * dt;
        const double fd = t - dt >= 0.0 ? (y(t + dt) - y(t - dt)) / (2.0 * dt)
                                        : (-3.0 * y(t) + 4.0 * y(t + dt) - y(t + 2.0 * dt)) / (2.0 * dt);
        worst = std::max(worst, std::abs(fd - eval_reference(spec, t).y_star_dot));
    }
    return worst;
}

}  // namespace mfc
