#pragma once

#include <array>
#include <cstdint>
#include <random>
#include <utility>

#include "mfc/errors.hpp"

namespace mfc {

// ---------------------------------------------------------------------------
// First-order LTI test plant  ydot = a y + b u + d
// ---------------------------------------------------------------------------

struct LtiParams {
    double a = 0.0;  // 1/s
    double b = 1.0;  // output units/s per input unit
    double d = 0.0;  // output units/s
};

struct LtiState {
    double y = 0.0;
    double t = 0.0;
};

// Exact zero-order-hold discretization.
LtiState step_lti(const LtiState& state, const LtiParams& p, double u, double dt);

// ---------------------------------------------------------------------------
// Synthetic ultra-local plant  ydot = F(t) + gain u
// with F(t) = offset + amplitude sin(2 pi frequency t + phase).
// ---------------------------------------------------------------------------

struct UltraLocalPlantParams {
    double gain = 1.0;
    double offset = 0.0;
    double amplitude = 0.0;
    double frequency = 0.0;  // Hz
    double phase = 0.0;      // rad

    double disturbance(double t) const;
};

struct UltraLocalPlantState {
    double y = 0.0;
    double t = 0.0;
};

// F integrated with composite Simpson on 8 panels, u held constant.
UltraLocalPlantState step_ultra_local(const UltraLocalPlantState& state, const UltraLocalPlantParams& p, double u,
                                      double dt);

// ---------------------------------------------------------------------------
// Measurement noise
// ---------------------------------------------------------------------------

enum class NoiseKind { none, sinusoid, uniform };

struct NoiseSpec {
    NoiseKind kind = NoiseKind::none;
    double amplitude = 0.0;
    double frequency = 0.0;  // Hz, sinusoid only
    std::uint64_t seed = 0;  // uniform only

    void validate() const;
};

/**
 * Stateful noise generator. Sinusoid and none are pure functions of t; the
 * uniform kind draws from a seeded mt19937_64 so a fixed seed reproduces
 * the same sequence on every platform.
 */
class NoiseSource {
public:
    NoiseSource() = default;
    explicit NoiseSource(const NoiseSpec& spec);

    double sample(double t);
    const NoiseSpec& spec() const { return spec_; }

private:
    NoiseSpec spec_;
    std::mt19937_64 rng_;
};

double inject_noise(double y, NoiseSource& source, double t);

// ---------------------------------------------------------------------------
// Surrogate 2-DOF half-quadrotor
// ---------------------------------------------------------------------------

/**
 * Azimuth rate w and pitch angle theta driven by two rotors:
 *
 *   I_az wdot       = k11 a1 + k12 a2 - c_az w - g theta_dot
 *   I_p theta_ddot  = k22 a2 + k21 a1 - c_p theta_dot - m_g sin(theta)
 *                     - tau_mass cos(theta) + g w
 *
 * where a_i = deadzone(v_i) is the motor drive left after the stiction band.
 */
struct HalfQuadrotorParams {
    double inertia_azimuth = 0.02;       // kg m^2
    double inertia_pitch = 0.0005;       // kg m^2
    double thrust_azimuth = 2.0e-5;      // k11, N m/V
    double thrust_pitch = 0.1;           // k22, N m/V
    double cross_azimuth = 3.0e-6;       // k12, rotor 2 onto azimuth, N m/V
    double cross_pitch = 0.001;          // k21, rotor 1 onto pitch, N m/V
    double friction_azimuth = 2.0e-4;    // N m s/rad
    double friction_pitch = 0.1;         // N m s/rad
    double gravity_torque = 0.002;       // N m
    double gyro_coupling = 2.0e-6;       // N m s/rad
    double added_mass_torque = 0.0;      // N m
    double deadzone_voltage = 10.0;      // V
    double max_voltage = 24.0;           // V

    void validate() const;
};

struct HalfQuadrotorState {
    double azimuth_rate = 0.0;  // rad/s
    double pitch = 0.0;         // rad
    double pitch_rate = 0.0;    // rad/s
    double azimuth = 0.0;       // rad, logged only
    double t = 0.0;

    std::array<double, 4> as_array() const { return {azimuth_rate, pitch, pitch_rate, azimuth}; }
};

using Volts = std::array<double, 2>;
using Outputs = std::array<double, 2>;

// Time derivative of the state vector (w, theta, theta_dot, psi).
std::array<double, 4> half_quadrotor_rhs(const std::array<double, 4>& x, const HalfQuadrotorParams& p,
                                         const Volts& v);

// One classical RK4 step; throws DivergenceError when any |x| exceeds 1e6.
HalfQuadrotorState rk4_half_quadrotor(const HalfQuadrotorState& state, const HalfQuadrotorParams& p, const Volts& v,
                                      double dt);

// Noisy (azimuth rate, pitch) measurement of a state.
Outputs measure_half_quadrotor(const HalfQuadrotorState& state, std::array<NoiseSource, 2>& noise);

std::pair<HalfQuadrotorState, Outputs> step_half_quadrotor(const HalfQuadrotorState& state,
                                                           const HalfQuadrotorParams& p, const Volts& v,
                                                           std::array<NoiseSource, 2>& noise, double dt);

// Mass hung at the given lever arm: constant torque m g r and extra inertia m r^2.
HalfQuadrotorParams apply_added_mass(const HalfQuadrotorParams& p, double mass, double arm = 0.2);

inline constexpr double kGravity = 9.81;
inline constexpr double kDivergenceBound = 1e6;

}  // namespace mfc
