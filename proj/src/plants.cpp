#include "mfc/plants.hpp"

#include <cmath>
#include <numbers>
#include <string>

namespace mfc {

LtiState step_lti(const LtiState& state, const LtiParams& p, double u, double dt) {
    if (!(dt > 0.0)) {
        throw ConfigError("step_lti: dt must be > 0");
    }
    const double drive = p.b * u + p.d;
    LtiState next;
    next.t = state.t + dt;
    if (p.a == 0.0) {
        next.y = state.y + drive * dt;
    } else {
        const double growth = std::expm1(p.a * dt);
        next.y = state.y + growth * state.y + drive * growth / p.a;
    }
    if (!std::isfinite(next.y)) {
        throw NumericError("step_lti: non-finite output");
    }
    return next;
}

double UltraLocalPlantParams::disturbance(double t) const {
    return offset + amplitude * std::sin(2.0 * std::numbers::pi * frequency * t + phase);
}

UltraLocalPlantState step_ultra_local(const UltraLocalPlantState& state, const UltraLocalPlantParams& p, double u,
                                      double dt) {
    if (!(dt > 0.0)) {
        throw ConfigError("step_ultra_local: dt must be > 0");
    }
    constexpr int panels = 8;
    const double h = dt / panels;
    double sum = p.disturbance(state.t) + p.disturbance(state.t + dt);
    for (int i = 1; i < panels; ++i) {
        sum += (i % 2 == 1 ? 4.0 : 2.0) * p.disturbance(state.t + i * h);
    }
    UltraLocalPlantState next;
    next.t = state.t + dt;
    next.y = state.y + h / 3.0 * sum + p.gain * u * dt;
    if (!std::isfinite(next.y) || std::abs(next.y) > kDivergenceBound) {
        throw DivergenceError("ultra-local plant diverged at t=" + std::to_string(next.t));
    }
    return next;
}

void NoiseSpec::validate() const {
    if (!std::isfinite(amplitude) || amplitude < 0.0) {
        throw ConfigError("noise: amplitude must be finite and >= 0");
    }
    if (kind == NoiseKind::sinusoid && !(frequency > 0.0)) {
        throw ConfigError("noise: sinusoid frequency must be > 0");
    }
}

NoiseSource::NoiseSource(const NoiseSpec& spec) : spec_(spec), rng_(spec.seed) { spec_.validate(); }

double NoiseSource::sample(double t) {
    switch (spec_.kind) {
        case NoiseKind::none:
            return 0.0;
        case NoiseKind::sinusoid:
            return spec_.amplitude * std::sin(2.0 * std::numbers::pi * spec_.frequency * t);
        case NoiseKind::uniform: {
            // 53 random bits -> [0, 1), then affine map onto [-A, A).
            const double unit = static_cast<double>(rng_() >> 11) * 0x1.0p-53;
            return spec_.amplitude * (2.0 * unit - 1.0);
        }
    }
    return 0.0;
}

double inject_noise(double y, NoiseSource& source, double t) { return y + source.sample(t); }

void HalfQuadrotorParams::validate() const {
    if (!(inertia_azimuth > 0.0) || !(inertia_pitch > 0.0)) {
        throw ConfigError("half-quadrotor: inertias must be > 0");
    }
    if (friction_azimuth < 0.0 || friction_pitch < 0.0) {
        throw ConfigError("half-quadrotor: frictions must be >= 0");
    }
    if (deadzone_voltage < 0.0 || !(max_voltage > 0.0)) {
        throw ConfigError("half-quadrotor: need deadzone >= 0 and max_voltage > 0");
    }
    const double fields[] = {thrust_azimuth, thrust_pitch, cross_azimuth, cross_pitch, gravity_torque,
                             gyro_coupling, added_mass_torque};
    for (double f : fields) {
        if (!std::isfinite(f)) {
            throw ConfigError("half-quadrotor: parameters must be finite");
        }
    }
}

namespace {

double deadzone(double v, double band) { return std::copysign(std::max(std::abs(v) - band, 0.0), v); }

}  // namespace

std::array<double, 4> half_quadrotor_rhs(const std::array<double, 4>& x, const HalfQuadrotorParams& p,
                                         const Volts& v) {
    const double w = x[0];
    const double theta = x[1];
    const double theta_dot = x[2];
    const double a1 = deadzone(v[0], p.deadzone_voltage);
    const double a2 = deadzone(v[1], p.deadzone_voltage);

    const double w_dot = (p.thrust_azimuth * a1 + p.cross_azimuth * a2 - p.friction_azimuth * w -
                          p.gyro_coupling * theta_dot) /
                         p.inertia_azimuth;
    const double theta_ddot = (p.thrust_pitch * a2 + p.cross_pitch * a1 - p.friction_pitch * theta_dot -
                               p.gravity_torque * std::sin(theta) - p.added_mass_torque * std::cos(theta) +
                               p.gyro_coupling * w) /
                              p.inertia_pitch;
    return {w_dot, theta_dot, theta_ddot, w};
}

HalfQuadrotorState rk4_half_quadrotor(const HalfQuadrotorState& state, const HalfQuadrotorParams& p, const Volts& v,
                                      double dt) {
    if (!(dt > 0.0)) {
        throw ConfigError("half-quadrotor: dt must be > 0");
    }
    for (double vi : v) {
        if (!std::isfinite(vi) || std::abs(vi) > p.max_voltage) {
            throw ConfigError("half-quadrotor: supply voltage outside [-max_voltage, max_voltage]");
        }
    }
    using Vec = std::array<double, 4>;
    const auto axpy = [](const Vec& x, double h, const Vec& k) {
        return Vec{x[0] + h * k[0], x[1] + h * k[1], x[2] + h * k[2], x[3] + h * k[3]};
    };
    const Vec x = state.as_array();
    const Vec k1 = half_quadrotor_rhs(x, p, v);
    const Vec k2 = half_quadrotor_rhs(axpy(x, 0.5 * dt, k1), p, v);
    const Vec k3 = half_quadrotor_rhs(axpy(x, 0.5 * dt, k2), p, v);
    const Vec k4 = half_quadrotor_rhs(axpy(x, dt, k3), p, v);

    Vec next{};
    for (std::size_t i = 0; i < 4; ++i) {
        next[i] = x[i] + dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        if (!std::isfinite(next[i]) || std::abs(next[i]) > kDivergenceBound) {
            throw DivergenceError("half-quadrotor diverged at t=" + std::to_string(state.t + dt));
        }
    }
    return HalfQuadrotorState{next[0], next[1], next[2], next[3], state.t + dt};
}

Outputs measure_half_quadrotor(const HalfQuadrotorState& state, std::array<NoiseSource, 2>& noise) {
    return {inject_noise(state.azimuth_rate, noise[0], state.t), inject_noise(state.pitch, noise[1], state.t)};
}

std::pair<HalfQuadrotorState, Outputs> step_half_quadrotor(const HalfQuadrotorState& state,
                                                           const HalfQuadrotorParams& p, const Volts& v,
                                                           std::array<NoiseSource, 2>& noise, double dt) {
    HalfQuadrotorState next = rk4_half_quadrotor(state, p, v, dt);
    return {next, measure_half_quadrotor(next, noise)};
}

HalfQuadrotorParams apply_added_mass(const HalfQuadrotorParams& p, double mass, double arm) {
    if (!std::isfinite(mass) || mass < 0.0) {
        throw ConfigError("apply_added_mass: mass must be finite and >= 0");
    }
    if (!std::isfinite(arm)) {
        throw ConfigError("apply_added_mass: arm must be finite");
    }
    HalfQuadrotorParams out = p;
    out.added_mass_torque += mass * kGravity * arm;
    out.inertia_pitch += mass * arm * arm;
    return out;
}

}  // namespace mfc
