#include "mfc/estimator.hpp"

#include <algorithm>
#include <vector>

namespace mfc {

UltraLocalConfig::UltraLocalConfig(double alpha, double tau) : alpha_(alpha), tau_(tau) {
    if (!std::isfinite(alpha_) || alpha_ == 0.0) {
        throw ConfigError("ultra-local model: alpha must be finite and non-zero");
    }
    if (!std::isfinite(tau_) || !(tau_ > 0.0)) {
        throw ConfigError("ultra-local model: tau must be finite and > 0");
    }
}

namespace {

// Index of the first sample inside [newest - tau, newest].
template <typename Window>
std::size_t horizon_start(const Window& window, double tau) {
    const double cutoff = window.newest().t - tau - 1e-9 * tau;
    std::size_t i = 0;
    while (window[i].t < cutoff) {
        ++i;
    }
    // Keep at least two samples so a very short tau still yields an estimate.
    return std::min(i, window.size() - 2);
}

void require_finite(double v, const char* what) {
    if (!std::isfinite(v)) {
        throw NumericError(std::string("estimator: non-finite ") + what + " in window");
    }
}

// Exact integral over [a, b] of kernel(s) * (linear interpolant of values).
// The integrand is a cubic at most, for which Simpson's rule is exact.
template <typename Kernel>
double segment_moment(Kernel kernel, double a, double b, double va, double vb) {
    const double m = 0.5 * (a + b);
    return (b - a) / 6.0 * (kernel(a) * va + 4.0 * kernel(m) * 0.5 * (va + vb) + kernel(b) * vb);
}

}  // namespace

double integral_estimate(std::span<const double> t, std::span<const double> u, std::span<const double> y,
                         double alpha) {
    if (t.size() != u.size() || t.size() != y.size()) {
        throw ConfigError("integral_estimate: t, u, y lengths differ");
    }
    if (t.size() < 2) {
        throw InsufficientDataError("integral_estimate: need at least 2 samples");
    }
    for (std::size_t i = 0; i < t.size(); ++i) {
        require_finite(t[i], "time");
        require_finite(u[i], "input");
        require_finite(y[i], "output");
        if (i > 0 && !(t[i] > t[i - 1])) {
            throw OutOfOrderError("integral_estimate: times not strictly increasing");
        }
    }

    const double t0 = t.front();
    const double horizon = t.back() - t0;
    const auto y_kernel = [horizon](double s) { return horizon - 2.0 * s; };
    const auto u_kernel = [horizon](double s) { return s * (horizon - s); };

    double y_part = 0.0;
    double u_part = 0.0;
    for (std::size_t i = 0; i + 1 < t.size(); ++i) {
        const double a = t[i] - t0;
        const double b = t[i + 1] - t0;
        y_part += segment_moment(y_kernel, a, b, y[i], y[i + 1]);
        u_part += segment_moment(u_kernel, a, b, u[i], u[i + 1]);
    }
    return -6.0 / (horizon * horizon * horizon) * (y_part + alpha * u_part);
}

FEstimate estimate_f_integral(const SampleWindow& window, const UltraLocalConfig& cfg) {
    if (window.size() < 2) {
        throw InsufficientDataError("estimate_f_integral: window holds fewer than 2 samples");
    }
    const std::size_t first = horizon_start(window, cfg.tau());
    const std::size_t n = window.size() - first;
    std::vector<double> t(n), u(n), y(n);
    for (std::size_t i = 0; i < n; ++i) {
        const Sample& s = window[first + i];
        t[i] = s.t;
        u[i] = s.u;
        y[i] = s.y;
    }
    FEstimate out;
    out.value = integral_estimate(t, u, y, cfg.alpha());
    out.t = window.newest().t;
    out.window_span = t.back() - t.front();
    return out;
}

FEstimate estimate_f_closed_loop(const ClosedLoopWindow& window, const UltraLocalConfig& cfg, double kp) {
    if (window.size() < 2) {
        throw InsufficientDataError("estimate_f_closed_loop: window holds fewer than 2 samples");
    }
    require_finite(kp, "gain");
    const std::size_t first = horizon_start(window, cfg.tau());
    const auto integrand = [&](const ClosedLoopSample& s) {
        require_finite(s.y_star_dot, "reference derivative");
        require_finite(s.u, "input");
        require_finite(s.e, "tracking error");
        return s.y_star_dot - cfg.alpha() * s.u - kp * s.e;
    };

    double area = 0.0;
    double prev = integrand(window[first]);
    for (std::size_t i = first + 1; i < window.size(); ++i) {
        const double cur = integrand(window[i]);
        area += 0.5 * (prev + cur) * (window[i].t - window[i - 1].t);
        prev = cur;
    }
    FEstimate out;
    out.window_span = window.newest().t - window[first].t;
    out.value = area / out.window_span;
    out.t = window.newest().t;
    return out;
}

namespace {

double robust_scale(std::vector<double> values) {
    for (double& v : values) {
        v = std::abs(v);
    }
    auto mid = values.begin() + static_cast<std::ptrdiff_t>(values.size() / 2);
    std::nth_element(values.begin(), mid, values.end());
    double median = *mid;
    if (values.size() % 2 == 0) {
        median = 0.5 * (median + *std::max_element(values.begin(), mid));
    }
    if (median > 0.0) {
        return median;
    }
    // Sparse signals (mostly zero) fall back to the mean magnitude.
    double sum = 0.0;
    for (double v : values) {
        sum += v;
    }
    return sum / static_cast<double>(values.size());
}

}  // namespace

double suggest_alpha(std::span<const double> u_history, std::span<const double> y_history, double dt) {
    if (u_history.size() != y_history.size()) {
        throw ConfigError("suggest_alpha: u and y histories differ in length");
    }
    if (u_history.size() < 2) {
        throw ConfigError("suggest_alpha: need at least 2 samples to differentiate y");
    }
    if (!(dt > 0.0) || !std::isfinite(dt)) {
        throw ConfigError("suggest_alpha: dt must be finite and > 0");
    }

    const std::size_t n = u_history.size() - 1;
    std::vector<double> u(n), ydot(n);
    double correlation = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        require_finite(u_history[k], "input");
        require_finite(y_history[k + 1], "output");
        u[k] = u_history[k];
        ydot[k] = (y_history[k + 1] - y_history[k]) / dt;
        correlation += u[k] * ydot[k];
    }

    const double u_scale = robust_scale(u);
    if (u_scale == 0.0) {
        throw ConfigError("suggest_alpha: input history is identically zero, scale undefined");
    }
    const double ydot_scale = robust_scale(ydot);
    if (ydot_scale == 0.0) {
        throw ConfigError("suggest_alpha: output history is constant, scale undefined");
    }
    const double magnitude = ydot_scale / u_scale;
    return correlation < 0.0 ? -magnitude : magnitude;
}

}  // namespace mfc
