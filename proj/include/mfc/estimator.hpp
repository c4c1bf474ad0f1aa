#pragma once

#include <cmath>
#include <cstddef>
#include <deque>
#include <span>
#include <string>

#include "mfc/errors.hpp"

namespace mfc {

// One timestamped input/output pair of the ultra-local model ydot = F + alpha*u.
struct Sample {
    double t = 0.0;  // s
    double u = 0.0;  // controller output
    double y = 0.0;  // plant units
};

// Integrand data for the closed-loop estimator.
struct ClosedLoopSample {
    double t = 0.0;
    double y_star_dot = 0.0;
    double u = 0.0;
    double e = 0.0;
};

// Parameters of the first-order ultra-local model.
class UltraLocalConfig {
public:
    UltraLocalConfig(double alpha, double tau);

    double alpha() const { return alpha_; }
    double tau() const { return tau_; }
    int order() const { return 1; }

private:
    double alpha_;
    double tau_;
};

struct FEstimate {
    double value = 0.0;        // output units per second
    double t = 0.0;            // time the estimate applies to
    double window_span = 0.0;  // data span actually integrated
};

/**
 * Time-ordered buffer holding the most recent capacity_duration seconds of
 * samples. Pushing a sample evicts every sample older than
 * newest.t - capacity_duration (with a relative slack of 1e-9 so that
 * grid times such as k*dt are not evicted by rounding).
 */
template <typename S>
class SlidingWindow {
public:
    using container_type = std::deque<S>;
    using const_iterator = typename container_type::const_iterator;

    SlidingWindow(double capacity_duration, double dt_nominal)
        : capacity_(capacity_duration), dt_nominal_(dt_nominal) {
        if (!(capacity_ > 0.0) || !std::isfinite(capacity_)) {
            throw ConfigError("sliding window: capacity_duration must be finite and > 0");
        }
        if (!(dt_nominal_ > 0.0) || !std::isfinite(dt_nominal_)) {
            throw ConfigError("sliding window: dt_nominal must be finite and > 0");
        }
    }

    void push(const S& s) {
        if (!std::isfinite(s.t) || s.t < 0.0) {
            throw NumericError("sliding window: sample time must be finite and non-negative");
        }
        if (!samples_.empty() && !(s.t > samples_.back().t)) {
            throw OutOfOrderError("sliding window: sample at t=" + std::to_string(s.t) +
                                  " is not after newest t=" + std::to_string(samples_.back().t));
        }
        samples_.push_back(s);
        const double cutoff = s.t - capacity_ - eviction_slack();
        while (samples_.front().t < cutoff) {
            samples_.pop_front();
        }
    }

    void clear() { samples_.clear(); }

    bool empty() const { return samples_.empty(); }
    std::size_t size() const { return samples_.size(); }
    const S& oldest() const { return samples_.front(); }
    const S& newest() const { return samples_.back(); }
    const S& operator[](std::size_t i) const { return samples_[i]; }
    const_iterator begin() const { return samples_.begin(); }
    const_iterator end() const { return samples_.end(); }

    double span() const { return samples_.size() < 2 ? 0.0 : samples_.back().t - samples_.front().t; }
    double capacity_duration() const { return capacity_; }
    double dt_nominal() const { return dt_nominal_; }
    double eviction_slack() const { return 1e-9 * capacity_; }

private:
    double capacity_;
    double dt_nominal_;
    container_type samples_;
};

using SampleWindow = SlidingWindow<Sample>;
using ClosedLoopWindow = SlidingWindow<ClosedLoopSample>;

/**
 * Algebraic estimate of F from the last T = min(tau, span) seconds of data:
 *
 *   F_est = -(6/T^3) * integral_0^T [(T - 2s) y(s) + alpha s (T - s) u(s)] ds
 *
 * with s measured from the start of the integration range. The samples are
 * joined by straight lines (trapezoidal reconstruction) and each linear
 * piece is integrated exactly against the polynomial kernel, so the result
 * is exact whenever y and u are affine between samples and second-order
 * accurate in the sample spacing otherwise. Irregular spacing is allowed.
 */
FEstimate estimate_f_integral(const SampleWindow& window, const UltraLocalConfig& cfg);

// Same functional evaluated on raw arrays; t must be strictly increasing.
double integral_estimate(std::span<const double> t, std::span<const double> u,
                         std::span<const double> y, double alpha);

/**
 * Closed-loop estimate: trapezoidal mean of (ydot* - alpha u - kp e) over
 * the last T = min(tau, span) seconds. Only meaningful while the loop is
 * closed with the iP law.
 */
FEstimate estimate_f_closed_loop(const ClosedLoopWindow& window, const UltraLocalConfig& cfg, double kp);

/**
 * Picks alpha so that median|alpha u| matches median|dy/dt| (forward
 * differences), with the sign of the correlation between u and dy/dt.
 * Throws ConfigError when u is identically zero or y carries no slope
 * information.
 */
double suggest_alpha(std::span<const double> u_history, std::span<const double> y_history, double dt);

}  // namespace mfc
