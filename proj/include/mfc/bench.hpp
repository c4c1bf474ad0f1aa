#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace mfc {

struct EstimatorBenchCase {
    double tau = 0.05;
    double dt = 1e-3;
    double noise_amplitude = 0.0;
    double noise_frequency = 200.0;  // Hz
};

struct EstimatorBenchResult {
    EstimatorBenchCase config;
    std::size_t estimates = 0;
    double max_error = 0.0;     // |F_est - F|
    double fd_max_error = 0.0;  // same for a two-point derivative estimate of F
    double ns_per_estimate = 0.0;
};

/**
 * Streams y(t) = (F + alpha u0) t + A sin(2 pi f t) with constant u0
 * through a sliding window and records the worst estimation error over
 * `ticks` estimates taken after the window has filled.
 */
EstimatorBenchResult bench_estimator_case(const EstimatorBenchCase& c, std::size_t ticks = 1000);

std::vector<EstimatorBenchResult> bench_estimator_sweep(const std::vector<double>& taus,
                                                        const std::vector<double>& dts,
                                                        const std::vector<double>& amplitudes, double frequency,
                                                        std::size_t ticks = 1000);

std::string format_bench_csv(const std::vector<EstimatorBenchResult>& results);

}  // namespace mfc
