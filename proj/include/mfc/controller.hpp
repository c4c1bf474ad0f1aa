#pragma once

#include <optional>
#include <span>
#include <vector>

#include "mfc/estimator.hpp"

namespace mfc {

struct Setpoint {
    double y_star = 0.0;
    double y_star_dot = 0.0;
};

enum class EstimatorKind { integral, closed_loop };

/**
 * Loop state of one intelligent-proportional channel.
 *
 * Per control tick the caller runs observe() with the fresh measurement,
 * computes u with ip_control(), then commit()s u. The sample pushed by
 * observe() pairs y(t_k) with the input held over (t_{k-1}, t_k], which
 * is the input committed on the previous tick (0 on the first tick).
 *
 * Both estimators are maintained. The integral one is the default loop
 * estimate; the closed-loop formula is available as a monitor, or as the
 * loop estimate once its window covers a full horizon when
 * EstimatorKind::closed_loop is selected.
 */
class IpChannel {
public:
    IpChannel(UltraLocalConfig cfg, double kp, EstimatorKind kind, double dt_nominal);

    void observe(double t, double y);
    void commit(const Setpoint& sp, double y, double u);
    double step(double t, const Setpoint& sp, double y);
    void reset();

    const UltraLocalConfig& config() const { return cfg_; }
    double kp() const { return kp_; }
    EstimatorKind estimator_kind() const { return kind_; }
    const SampleWindow& window() const { return window_; }
    const ClosedLoopWindow& closed_loop_window() const { return cl_window_; }
    const FEstimate& last_f_est() const { return f_est_; }
    const std::optional<FEstimate>& integral_f_est() const { return f_integral_; }
    const std::optional<FEstimate>& closed_loop_f_est() const { return f_closed_loop_; }
    double held_input() const { return held_u_; }

private:
    UltraLocalConfig cfg_;
    double kp_;
    EstimatorKind kind_;
    SampleWindow window_;
    ClosedLoopWindow cl_window_;
    FEstimate f_est_;
    std::optional<FEstimate> f_integral_;
    std::optional<FEstimate> f_closed_loop_;
    double held_u_ = 0.0;
    double last_t_ = 0.0;
};

/**
 * iP law u = -(F_est - ydot* + kp e) / alpha with e = y - y*. Closing it on
 * ydot = F + alpha u gives edot + kp e = F - F_est.
 */
double ip_control(const IpChannel& channel, const Setpoint& sp, double y);

// Per-channel iP on an m-output plant; couplings are left inside each F_i.
std::vector<double> mimo_step(std::span<IpChannel> channels, std::span<const Setpoint> setpoints,
                              std::span<const double> outputs, double t);

// Maps controller output to motor volts: v = sign(u) offset + u, clamped.
struct ActuatorMap {
    double offset = 10.0;
    double saturation = 24.0;

    void validate() const;
};

double actuator_map(double u, const ActuatorMap& map);

struct PidGains {
    double kp = 0.0;
    double ki = 0.0;
    double kd = 0.0;
    double derivative_filter = 0.0;  // first-order filter time constant, s; 0 disables
    double integrator_limit = 1e9;   // |integrator| clamp

    void validate() const;
};

struct PidState {
    double integrator = 0.0;
    double derivative = 0.0;
    double previous_y = 0.0;
    bool primed = false;
};

// Positional PID on e = y* - y, derivative taken on the measurement.
double pid_control(PidState& state, const PidGains& gains, const Setpoint& sp, double y, double dt);

}  // namespace mfc
