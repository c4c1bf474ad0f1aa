#include "mfc/bench.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <numbers>

#include "mfc/estimator.hpp"

namespace mfc {

namespace {

constexpr double kTrueF = 0.4;
constexpr double kAlpha = 0.001;
constexpr double kInput = 100.0;

std::string number(double v) {
    char buf[32];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    return ec == std::errc{} ? std::string(buf, ptr) : std::string("nan");
}

}  // namespace

EstimatorBenchResult bench_estimator_case(const EstimatorBenchCase& c, std::size_t ticks) {
    const UltraLocalConfig cfg(kAlpha, c.tau);
    SampleWindow window(c.tau, c.dt);
    const auto signal = [&](double t) {
        return (kTrueF + kAlpha * kInput) * t +
               c.noise_amplitude * std::sin(2.0 * std::numbers::pi * c.noise_frequency * t);
    };

    EstimatorBenchResult result;
    result.config = c;
    const auto fill = static_cast<std::size_t>(std::ceil(c.tau / c.dt));
    double elapsed_ns = 0.0;
    double previous_y = signal(0.0);
    for (std::size_t k = 0; k < fill + ticks; ++k) {
        const double t = static_cast<double>(k) * c.dt;
        const double y = signal(t);
        window.push(Sample{t, kInput, y});
        if (k < fill) {
            previous_y = y;
            continue;
        }
        const auto start = std::chrono::steady_clock::now();
        const FEstimate est = estimate_f_integral(window, cfg);
        elapsed_ns += std::chrono::duration<double, std::nano>(std::chrono::steady_clock::now() - start).count();

        const double fd = (y - previous_y) / c.dt - kAlpha * kInput;
        result.max_error = std::max(result.max_error, std::abs(est.value - kTrueF));
        result.fd_max_error = std::max(result.fd_max_error, std::abs(fd - kTrueF));
        ++result.estimates;
        previous_y = y;
    }
    result.ns_per_estimate = result.estimates ? elapsed_ns / static_cast<double>(result.estimates) : 0.0;
    return result;
}

std::vector<EstimatorBenchResult> bench_estimator_sweep(const std::vector<double>& taus,
                                                        const std::vector<double>& dts,
                                                        const std::vector<double>& amplitudes, double frequency,
                                                        std::size_t ticks) {
    std::vector<EstimatorBenchResult> out;
    for (double tau : taus) {
        for (double dt : dts) {
            if (tau < 2.0 * dt) {
                continue;
            }
            for (double a : amplitudes) {
                out.push_back(bench_estimator_case(EstimatorBenchCase{tau, dt, a, frequency}, ticks));
            }
        }
    }
    return out;
}

std::string format_bench_csv(const std::vector<EstimatorBenchResult>& results) {
    std::string out = "tau,dt,noise_amplitude,noise_frequency,estimates,max_error,fd_max_error,ns_per_estimate\n";
    for (const auto& r : results) {
        out += number(r.config.tau) + ',' + number(r.config.dt) + ',' + number(r.config.noise_amplitude) + ',' +
               number(r.config.noise_frequency) + ',' + std::to_string(r.estimates) + ',' + number(r.max_error) +
               ',' + number(r.fd_max_error) + ',' + number(r.ns_per_estimate) + '\n';
    }
    return out;
}

}  // namespace mfc
