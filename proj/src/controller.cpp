#include "mfc/controller.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace mfc {

namespace {

void require_finite(double v, const char* what) {
    if (!std::isfinite(v)) {
        throw NumericError(std::string("controller: non-finite ") + what);
    }
}

}  // namespace

IpChannel::IpChannel(UltraLocalConfig cfg, double kp, EstimatorKind kind, double dt_nominal)
    : cfg_(cfg),
      kp_(kp),
      kind_(kind),
      window_(cfg.tau(), dt_nominal),
      cl_window_(cfg.tau(), dt_nominal) {
    if (!std::isfinite(kp_) || !(kp_ > 0.0)) {
        throw ConfigError("iP channel: kp must be finite and > 0");
    }
}

void IpChannel::observe(double t, double y) {
    require_finite(y, "measurement");
    window_.push(Sample{t, held_u_, y});
    last_t_ = t;

    if (window_.size() < 2) {
        f_integral_.reset();
    } else {
        f_integral_ = estimate_f_integral(window_, cfg_);
    }
    if (cl_window_.size() < 2) {
        f_closed_loop_.reset();
    } else {
        f_closed_loop_ = estimate_f_closed_loop(cl_window_, cfg_, kp_);
    }

    const bool cl_ready = f_closed_loop_ && cl_window_.span() >= cfg_.tau() - cl_window_.eviction_slack();
    if (kind_ == EstimatorKind::closed_loop && cl_ready) {
        f_est_ = *f_closed_loop_;
    } else if (f_integral_) {
        f_est_ = *f_integral_;
    } else {
        f_est_ = FEstimate{0.0, t, 0.0};
    }
}

void IpChannel::commit(const Setpoint& sp, double y, double u) {
    require_finite(u, "control input");
    held_u_ = u;
    cl_window_.push(ClosedLoopSample{last_t_, sp.y_star_dot, u, y - sp.y_star});
}

double IpChannel::step(double t, const Setpoint& sp, double y) {
    observe(t, y);
    const double u = ip_control(*this, sp, y);
    commit(sp, y, u);
    return u;
}

void IpChannel::reset() {
    window_.clear();
    cl_window_.clear();
    f_est_ = FEstimate{};
    f_integral_.reset();
    f_closed_loop_.reset();
    held_u_ = 0.0;
    last_t_ = 0.0;
}

double ip_control(const IpChannel& channel, const Setpoint& sp, double y) {
    require_finite(y, "measurement");
    require_finite(sp.y_star, "reference");
    require_finite(sp.y_star_dot, "reference derivative");
    const double f_est = channel.last_f_est().value;
    require_finite(f_est, "F estimate");
    const double e = y - sp.y_star;
    return -(f_est - sp.y_star_dot + channel.kp() * e) / channel.config().alpha();
}

std::vector<double> mimo_step(std::span<IpChannel> channels, std::span<const Setpoint> setpoints,
                              std::span<const double> outputs, double t) {
    if (channels.empty()) {
        throw ConfigError("mimo_step: need at least one channel");
    }
    if (setpoints.size() != channels.size() || outputs.size() != channels.size()) {
        throw ConfigError("mimo_step: channel, setpoint and output counts differ");
    }
    std::vector<double> u(channels.size());
    for (std::size_t i = 0; i < channels.size(); ++i) {
        u[i] = channels[i].step(t, setpoints[i], outputs[i]);
    }
    return u;
}

void ActuatorMap::validate() const {
    if (!std::isfinite(offset) || !std::isfinite(saturation) || offset < 0.0 || !(offset < saturation)) {
        throw ConfigError("actuator map: need 0 <= offset < saturation");
    }
}

double actuator_map(double u, const ActuatorMap& map) {
    require_finite(u, "control input");
    if (u == 0.0) {
        return 0.0;
    }
    const double v = std::copysign(map.offset, u) + u;
    return std::clamp(v, -map.saturation, map.saturation);
}

void PidGains::validate() const {
    if (!std::isfinite(kp) || !std::isfinite(ki) || !std::isfinite(kd) || !std::isfinite(derivative_filter) ||
        !std::isfinite(integrator_limit)) {
        throw ConfigError("pid gains: all fields must be finite");
    }
    if (!(integrator_limit > 0.0)) {
        throw ConfigError("pid gains: integrator_limit must be > 0");
    }
    if (derivative_filter < 0.0) {
        throw ConfigError("pid gains: derivative_filter must be >= 0");
    }
}

double pid_control(PidState& state, const PidGains& gains, const Setpoint& sp, double y, double dt) {
    if (!(dt > 0.0)) {
        throw ConfigError("pid_control: dt must be > 0");
    }
    require_finite(y, "measurement");
    require_finite(sp.y_star, "reference");

    const double e = sp.y_star - y;
    state.integrator = std::clamp(state.integrator + gains.ki * e * dt, -gains.integrator_limit,
                                  gains.integrator_limit);

    const double raw_derivative = state.primed ? -(y - state.previous_y) / dt : 0.0;
    const double blend = dt / (gains.derivative_filter + dt);
    state.derivative += blend * (raw_derivative - state.derivative);
    state.previous_y = y;
    state.primed = true;

    return gains.kp * e + state.integrator + gains.kd * state.derivative;
}

}  // namespace mfc
