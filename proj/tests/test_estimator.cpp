#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "mfc/controller.hpp"
#include "mfc/estimator.hpp"
#include "mfc/plants.hpp"
#include "oracles.hpp"

using namespace mfc;

namespace {

// Samples y and u on the grid t0 + k*dt, k = 0..n.
SampleWindow sampled_window(double tau, double dt, double t0, std::size_t n, const auto& y, const auto& u) {
    SampleWindow w(tau, dt);
    for (std::size_t k = 0; k <= n; ++k) {
        const double t = t0 + static_cast<double>(k) * dt;
        w.push({t, u(t), y(t)});
    }
    return w;
}

std::size_t ticks_for(double tau, double dt) { return static_cast<std::size_t>(std::llround(tau / dt)); }

}  // namespace

TEST_SUITE("sliding window") {
    TEST_CASE("first push gives a single sample") {
        SampleWindow w(0.05, 0.01);
        w.push({0.0, 0.0, 0.0});
        CHECK(w.size() == 1);
        CHECK(w.span() == 0.0);
    }

    TEST_CASE("push past the horizon evicts the oldest samples") {
        SampleWindow w(0.05, 0.01);
        for (int k = 0; k <= 5; ++k) {
            w.push({k * 0.01, 0.0, 0.0});
        }
        REQUIRE(w.size() == 6);
        w.push({0.06, 0.0, 0.0});
        CHECK(w.oldest().t == doctest::Approx(0.01));
        CHECK(w.size() == 6);
        CHECK(w.newest().t - w.oldest().t <= w.capacity_duration() + w.eviction_slack());
    }

    TEST_CASE("timestamps must increase strictly") {
        SampleWindow w(0.05, 0.01);
        w.push({0.05, 0.0, 0.0});
        CHECK_THROWS_AS(w.push({0.04, 0.0, 0.0}), OutOfOrderError);
        CHECK_THROWS_AS(w.push({0.05, 0.0, 0.0}), OutOfOrderError);
        CHECK(w.size() == 1);
    }

    TEST_CASE("invalid sample times and capacities are rejected") {
        SampleWindow w(0.05, 0.01);
        CHECK_THROWS_AS(w.push({-1.0, 0.0, 0.0}), NumericError);
        CHECK_THROWS_AS(w.push({NAN, 0.0, 0.0}), NumericError);
        CHECK_THROWS_AS(SampleWindow(0.0, 0.01), ConfigError);
        CHECK_THROWS_AS(SampleWindow(0.05, -1.0), ConfigError);
    }

    TEST_CASE("span never exceeds the capacity over a long stream") {
        SampleWindow w(0.05, 0.003);
        for (int k = 0; k < 2000; ++k) {
            w.push({k * 0.003, 1.0, 2.0});
            CHECK(w.span() <= 0.05 + w.eviction_slack());
        }
    }
}

TEST_SUITE("ultra-local config") {
    TEST_CASE("alpha and tau are validated") {
        CHECK_THROWS_AS(UltraLocalConfig(0.0, 0.05), ConfigError);
        CHECK_THROWS_AS(UltraLocalConfig(1.0, 0.0), ConfigError);
        CHECK_THROWS_AS(UltraLocalConfig(INFINITY, 0.05), ConfigError);
        const UltraLocalConfig cfg(-2.0, 0.1);
        CHECK(cfg.alpha() == -2.0);
        CHECK(cfg.order() == 1);
    }
}

TEST_SUITE("integral estimator") {
    TEST_CASE("zero data gives zero") {
        const auto w = sampled_window(0.05, 1e-4, 0.0, ticks_for(0.05, 1e-4), [](double) { return 0.0; },
                                      [](double) { return 0.0; });
        CHECK(estimate_f_integral(w, UltraLocalConfig(1.0, 0.05)).value == 0.0);
    }

    TEST_CASE("ramp with unit input recovers F = 2") {
        // y = 3t, u = 1, alpha = 1: ydot = 3 = F + 1.
        const auto y = [](double t) { return 3.0 * t; };
        const auto u = [](double) { return 1.0; };
        const double expected = oracle::integral_functional(y, u, 1.0, 0.0, 0.05);
        CHECK(expected == doctest::Approx(2.0).epsilon(1e-12));
        const auto w = sampled_window(0.05, 1e-4, 0.0, ticks_for(0.05, 1e-4), y, u);
        const FEstimate est = estimate_f_integral(w, UltraLocalConfig(1.0, 0.05));
        CHECK(std::abs(est.value - expected) <= 1e-8);
        CHECK(est.window_span == doctest::Approx(0.05));
    }

    TEST_CASE("azimuth-scale alpha recovers F = 0.4") {
        const auto y = [](double t) { return 0.5 * t; };
        const auto u = [](double) { return 100.0; };
        const double expected = oracle::integral_functional(y, u, 0.001, 0.0, 0.05);
        CHECK(expected == doctest::Approx(0.4).epsilon(1e-12));
        const auto w = sampled_window(0.05, 1e-4, 0.0, ticks_for(0.05, 1e-4), y, u);
        CHECK(std::abs(estimate_f_integral(w, UltraLocalConfig(0.001, 0.05)).value - expected) <= 1e-8);
    }

    TEST_CASE("exact on the model class for arbitrary constants") {
        std::mt19937_64 rng(7);
        std::uniform_real_distribution<double> dist(-50.0, 50.0);
        std::uniform_real_distribution<double> alpha_dist(0.01, 10.0);
        for (int i = 0; i < 25; ++i) {
            const double F = dist(rng), u0 = dist(rng), y0 = dist(rng);
            const double alpha = (i % 2 == 0 ? 1.0 : -1.0) * alpha_dist(rng);
            const auto y = [&](double t) { return y0 + (F + alpha * u0) * t; };
            const auto u = [&](double) { return u0; };
            const auto w = sampled_window(0.05, 1e-4, 0.0, ticks_for(0.05, 1e-4), y, u);
            CHECK(std::abs(estimate_f_integral(w, UltraLocalConfig(alpha, 0.05)).value - F) <= 1e-8 * (1.0 + std::abs(F)));
        }
    }

    TEST_CASE("irregular sample spacing stays exact on affine data") {
        std::mt19937_64 rng(3);
        std::uniform_real_distribution<double> jitter(0.5, 1.5);
        SampleWindow w(0.05, 1e-3);
        double t = 0.0;
        while (t < 0.08) {
            w.push({t, 2.0, 1.0 + (0.7 + 0.5 * 2.0) * t});
            t += 1e-3 * jitter(rng);
        }
        CHECK(estimate_f_integral(w, UltraLocalConfig(0.5, 0.05)).value == doctest::Approx(0.7).epsilon(1e-10));
    }

    TEST_CASE("warm-up uses the available span") {
        SampleWindow w(0.05, 1e-3);
        for (int k = 0; k <= 10; ++k) {
            const double t = k * 1e-3;
            w.push({t, 1.0, 4.0 * t});
        }
        const FEstimate est = estimate_f_integral(w, UltraLocalConfig(1.0, 0.05));
        CHECK(est.window_span == doctest::Approx(0.01));
        CHECK(est.value == doctest::Approx(3.0).epsilon(1e-10));
    }

    TEST_CASE("needs two samples and finite data") {
        SampleWindow w(0.05, 1e-3);
        const UltraLocalConfig cfg(1.0, 0.05);
        CHECK_THROWS_AS(estimate_f_integral(w, cfg), InsufficientDataError);
        w.push({0.0, 0.0, 0.0});
        CHECK_THROWS_AS(estimate_f_integral(w, cfg), InsufficientDataError);
        w.push({0.001, NAN, 0.0});
        CHECK_THROWS_AS(estimate_f_integral(w, cfg), NumericError);
    }

    TEST_CASE("shifting all timestamps leaves the estimate unchanged") {
        // Dyadic grid and shift keep every timestamp exactly representable.
        const double dt = std::ldexp(1.0, -14);
        const auto y = [](double s) { return std::sin(3.0 * s) + 0.2 * s * s; };
        const auto u = [](double s) { return 1.0 + std::cos(5.0 * s); };
        const std::size_t n = 1500;
        SampleWindow a(0.05, dt), b(0.05, dt);
        for (std::size_t k = 0; k <= n; ++k) {
            const double s = static_cast<double>(k) * dt;
            a.push({s, u(s), y(s)});
            b.push({s + 64.0, u(s), y(s)});
        }
        const UltraLocalConfig cfg(2.0, 0.05);
        CHECK(estimate_f_integral(a, cfg).value == estimate_f_integral(b, cfg).value);

        // A non-dyadic shift only costs rounding in the timestamps.
        SampleWindow c(0.05, dt);
        for (std::size_t k = 0; k <= n; ++k) {
            const double s = static_cast<double>(k) * dt;
            c.push({s + 12.345, u(s), y(s)});
        }
        CHECK(estimate_f_integral(c, cfg).value ==
              doctest::Approx(estimate_f_integral(a, cfg).value).epsilon(1e-9));
    }

    TEST_CASE("linear in the data") {
        const auto y1 = [](double t) { return std::sin(7.0 * t); };
        const auto u1 = [](double t) { return t * t; };
        const auto y2 = [](double t) { return 1.0 + std::exp(t); };
        const auto u2 = [](double t) { return std::cos(t); };
        const double dt = 1e-3, tau = 0.05;
        const UltraLocalConfig cfg(0.3, tau);
        const std::size_t n = 80;
        const auto w1 = sampled_window(tau, dt, 0.0, n, y1, u1);
        const auto w2 = sampled_window(tau, dt, 0.0, n, y2, u2);
        const auto ws = sampled_window(
            tau, dt, 0.0, n, [&](double t) { return 2.0 * y1(t) - 3.0 * y2(t); },
            [&](double t) { return 2.0 * u1(t) - 3.0 * u2(t); });
        const double combined = 2.0 * estimate_f_integral(w1, cfg).value - 3.0 * estimate_f_integral(w2, cfg).value;
        CHECK(estimate_f_integral(ws, cfg).value == doctest::Approx(combined).epsilon(1e-11));
    }

    TEST_CASE("second-order convergence on curved data") {
        // y and u both quadratic; the oracle integrates the continuous kernel.
        const auto y = [](double t) { return 0.3 + 1.1 * t + 40.0 * t * t; };
        const auto u = [](double t) { return 2.0 - 0.5 * t + 300.0 * t * t; };
        const double tau = 0.05, alpha = 1.5;
        const double expected = oracle::integral_functional(y, u, alpha, 0.0, tau);
        std::vector<double> errors;
        for (double dt : {5e-3, 2.5e-3, 1.25e-3, 6.25e-4}) {
            const auto w = sampled_window(tau, dt, 0.0, ticks_for(tau, dt), y, u);
            errors.push_back(std::abs(estimate_f_integral(w, UltraLocalConfig(alpha, tau)).value - expected));
        }
        for (std::size_t i = 1; i < errors.size(); ++i) {
            CHECK(errors[i - 1] / errors[i] == doctest::Approx(4.0).epsilon(0.05));
        }
    }

    TEST_CASE("high-frequency noise is attenuated relative to a finite difference") {
        const double tau = 0.05, dt = 1e-3, A = 0.05, f = 200.0;
        const auto noise = [&](double t) { return A * std::sin(oracle::two_pi * f * t); };
        SampleWindow clean(tau, dt), noisy(tau, dt);
        double worst_est = 0.0, worst_fd = 0.0;
        const UltraLocalConfig cfg(1.0, tau);
        for (int k = 0; k < 1100; ++k) {
            const double t = k * dt;
            clean.push({t, 1.0, 2.0 * t});
            noisy.push({t, 1.0, 2.0 * t + noise(t)});
            if (k >= 100) {
                worst_est = std::max(worst_est, std::abs(estimate_f_integral(noisy, cfg).value -
                                                         estimate_f_integral(clean, cfg).value));
                worst_fd = std::max(worst_fd, std::abs((noise(t) - noise(t - dt)) / dt));
            }
        }
        CHECK(worst_est <= worst_fd / 10.0);
    }
}

TEST_SUITE("closed-loop estimator") {
    TEST_CASE("zero integrand gives zero") {
        ClosedLoopWindow w(0.05, 0.01);
        for (int k = 0; k <= 5; ++k) {
            w.push({k * 0.01, 0.0, 0.0, 0.0});
        }
        CHECK(estimate_f_closed_loop(w, UltraLocalConfig(1.0, 0.05), 2.0).value == 0.0);
    }

    TEST_CASE("constant integrand averages to 0.3") {
        ClosedLoopWindow w(0.05, 0.01);
        for (int k = 0; k <= 5; ++k) {
            w.push({k * 0.01, 1.0, 0.5, 0.1});
        }
        CHECK(estimate_f_closed_loop(w, UltraLocalConfig(1.0, 0.05), 2.0).value == doctest::Approx(1.0 - 0.5 - 0.2));
    }

    TEST_CASE("linear integrand averages to its midpoint value") {
        ClosedLoopWindow w(0.1, 0.01);
        for (int k = 0; k <= 30; ++k) {
            const double t = k * 0.01;
            w.push({t, t, 0.0, 0.0});
        }
        // Last 0.1 s covers t in [0.2, 0.3].
        CHECK(estimate_f_closed_loop(w, UltraLocalConfig(1.0, 0.1), 1.0).value == doctest::Approx(0.25).epsilon(1e-9));
    }

    TEST_CASE("insufficient data is rejected") {
        ClosedLoopWindow w(0.05, 0.01);
        w.push({0.0, 1.0, 1.0, 1.0});
        CHECK_THROWS_AS(estimate_f_closed_loop(w, UltraLocalConfig(1.0, 0.05), 1.0), InsufficientDataError);
    }

    TEST_CASE("monitor on a constant-F loop converges to F") {
        const double dt = 0.01, alpha = 1.0;
        IpChannel channel(UltraLocalConfig(alpha, 0.1), 5.0, EstimatorKind::integral, dt);
        UltraLocalPlantParams plant;
        plant.gain = alpha;
        plant.offset = 1.0;
        UltraLocalPlantState state;
        const Setpoint sp{0.5, 0.0};
        for (int k = 0; k < 1000; ++k) {
            const double u = channel.step(state.t, sp, state.y);
            state = step_ultra_local(state, plant, u, dt);
        }
        REQUIRE(channel.closed_loop_f_est().has_value());
        CHECK(std::abs(channel.closed_loop_f_est()->value - 1.0) <= 1e-3);
        CHECK(std::abs(channel.last_f_est().value - 1.0) <= 1e-3);
        CHECK(std::abs(state.y - 0.5) <= 1e-3);
    }

    TEST_CASE("in-loop integrand equals the estimate that produced u") {
        // ydot* - alpha u - kp e with u from the iP law is the F_est of that tick.
        const double dt = 0.01, alpha = 2.0, kp = 5.0;
        IpChannel channel(UltraLocalConfig(alpha, 0.1), kp, EstimatorKind::closed_loop, dt);
        UltraLocalPlantParams plant;
        plant.gain = 1.3;
        plant.offset = 1.0;
        UltraLocalPlantState state;
        for (int k = 0; k < 300; ++k) {
            const Setpoint sp{std::sin(0.01 * k), 0.01 / dt * std::cos(0.01 * k)};
            channel.observe(state.t, state.y);
            const double u = ip_control(channel, sp, state.y);
            const double e = state.y - sp.y_star;
            CHECK(sp.y_star_dot - alpha * u - kp * e == doctest::Approx(channel.last_f_est().value).epsilon(1e-12));
            channel.commit(sp, state.y, u);
            state = step_ultra_local(state, plant, u, dt);
        }
    }
}

TEST_SUITE("alpha suggestion") {
    TEST_CASE("unit input on a slope-2 ramp gives 2") {
        std::vector<double> u(100, 1.0), y(100);
        for (std::size_t k = 0; k < y.size(); ++k) {
            y[k] = 2.0 * 0.01 * static_cast<double>(k);
        }
        CHECK(suggest_alpha(u, y, 0.01) == doctest::Approx(2.0));
        std::vector<double> neg(100, -1.0);
        CHECK(suggest_alpha(neg, y, 0.01) == doctest::Approx(-2.0));
    }

    TEST_CASE("comparable magnitudes for a noisy sinusoidal excitation") {
        std::mt19937_64 rng(11);
        std::normal_distribution<double> noise(0.0, 0.01);
        std::vector<double> u, y;
        double state = 0.0;
        for (int k = 0; k < 2000; ++k) {
            const double uk = std::sin(0.01 * k);
            u.push_back(uk);
            y.push_back(state + 1e-4 * noise(rng));
            state += 0.01 * 3.0 * uk;
        }
        CHECK(suggest_alpha(u, y, 0.01) == doctest::Approx(3.0).epsilon(0.05));
    }

    TEST_CASE("degenerate histories are rejected") {
        std::vector<double> zeros(50, 0.0), ones(50, 1.0), ramp(50);
        for (std::size_t k = 0; k < ramp.size(); ++k) {
            ramp[k] = 0.1 * static_cast<double>(k);
        }
        CHECK_THROWS_AS(suggest_alpha(zeros, ramp, 0.01), ConfigError);
        CHECK_THROWS_AS(suggest_alpha(ones, zeros, 0.01), ConfigError);
        CHECK_THROWS_AS(suggest_alpha(ones, std::vector<double>(10, 0.0), 0.01), ConfigError);
        CHECK_THROWS_AS(suggest_alpha(std::vector<double>{1.0}, std::vector<double>{1.0}, 0.01), ConfigError);
        CHECK_THROWS_AS(suggest_alpha(ones, ramp, 0.0), ConfigError);
    }
}
