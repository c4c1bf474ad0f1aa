#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "mfc/controller.hpp"
#include "mfc/plants.hpp"

using namespace mfc;

namespace {

// Channel whose integral estimate equals `f`: with no committed input the
// held u is 0, so y = f t makes F the slope.
IpChannel channel_with_estimate(double alpha, double kp, double f) {
    IpChannel ch(UltraLocalConfig(alpha, 0.05), kp, EstimatorKind::integral, 0.01);
    for (int k = 0; k <= 5; ++k) {
        const double t = k * 0.01;
        ch.observe(t, f * t);
    }
    return ch;
}

struct LoopTrace {
    std::vector<double> t, e, estimation_error;
};

// iP loop on ydot = F(t) + gain u.
LoopTrace run_loop(double alpha, double gain, double kp, double tau, const UltraLocalPlantParams& base,
                   const Setpoint& sp, double dt, int ticks) {
    UltraLocalPlantParams plant = base;
    plant.gain = gain;
    IpChannel ch(UltraLocalConfig(alpha, tau), kp, EstimatorKind::integral, dt);
    UltraLocalPlantState state;
    LoopTrace trace;
    for (int k = 0; k < ticks; ++k) {
        ch.observe(state.t, state.y);
        const double u = ip_control(ch, sp, state.y);
        trace.t.push_back(state.t);
        trace.e.push_back(state.y - sp.y_star);
        // F seen by a model with this alpha: F(t) + (gain - alpha) u held over the last tick.
        const double f_seen = plant.disturbance(state.t) + (gain - alpha) * ch.held_input();
        trace.estimation_error.push_back(f_seen - ch.last_f_est().value);
        ch.commit(sp, state.y, u);
        state = step_ultra_local(state, plant, u, dt);
    }
    return trace;
}

}  // namespace

TEST_SUITE("iP law") {
    TEST_CASE("equilibrium gives zero input") {
        const IpChannel ch = channel_with_estimate(1.0, 1.0, 0.0);
        CHECK(ip_control(ch, {0.0, 0.0}, 0.0) == 0.0);
    }

    TEST_CASE("azimuth gains example") {
        const IpChannel ch = channel_with_estimate(0.001, 0.5, 2.0);
        REQUIRE(ch.last_f_est().value == doctest::Approx(2.0).epsilon(1e-12));
        const double expected = -(2.0 - 1.0 + 0.5 * 0.4) / 0.001;
        CHECK(expected == doctest::Approx(-1200.0));
        CHECK(ip_control(ch, {1.0, 1.0}, 1.4) == doctest::Approx(expected).epsilon(1e-9));
    }

    TEST_CASE("pitch gains example") {
        const IpChannel ch = channel_with_estimate(5.0, 500.0, -1.0);
        const double expected = -(-1.0 - 0.0 + 500.0 * -0.002) / 5.0;
        CHECK(expected == doctest::Approx(0.4));
        CHECK(ip_control(ch, {0.3, 0.0}, 0.298) == doctest::Approx(expected).epsilon(1e-9));
    }

    TEST_CASE("estimate stays zero until two samples exist") {
        IpChannel ch(UltraLocalConfig(1.0, 0.05), 2.0, EstimatorKind::integral, 0.01);
        ch.observe(0.0, 5.0);
        CHECK(ch.last_f_est().value == 0.0);
        CHECK_FALSE(ch.integral_f_est().has_value());
        CHECK(ip_control(ch, {1.0, 0.5}, 5.0) == doctest::Approx(-(0.0 - 0.5 + 2.0 * 4.0)));
        ch.observe(0.01, 5.0);
        CHECK(ch.integral_f_est().has_value());
    }

    TEST_CASE("the held input is committed and reset") {
        IpChannel ch(UltraLocalConfig(1.0, 0.05), 2.0, EstimatorKind::integral, 0.01);
        CHECK(ch.step(0.0, {1.0, 0.0}, 0.0) == doctest::Approx(2.0));
        CHECK(ch.held_input() == doctest::Approx(2.0));
        CHECK(ch.window().newest().u == 0.0);
        ch.step(0.01, {1.0, 0.0}, 0.0);
        CHECK(ch.window().newest().u == doctest::Approx(2.0));
        ch.reset();
        CHECK(ch.window().empty());
        CHECK(ch.held_input() == 0.0);
    }

    TEST_CASE("invalid construction and inputs are rejected") {
        CHECK_THROWS_AS(IpChannel(UltraLocalConfig(1.0, 0.05), 0.0, EstimatorKind::integral, 0.01), ConfigError);
        CHECK_THROWS_AS(IpChannel(UltraLocalConfig(1.0, 0.05), -1.0, EstimatorKind::integral, 0.01), ConfigError);
        const IpChannel ch = channel_with_estimate(1.0, 1.0, 0.0);
        CHECK_THROWS_AS(ip_control(ch, {0.0, 0.0}, NAN), NumericError);
        CHECK_THROWS_AS(ip_control(ch, {INFINITY, 0.0}, 0.0), NumericError);
    }

    TEST_CASE("constant F and reference: exponential convergence up to the estimation error") {
        UltraLocalPlantParams plant;
        plant.offset = 1.0;
        const double kp = 5.0, tau = 0.1, dt = 0.01;
        const LoopTrace tr = run_loop(1.0, 1.0, kp, tau, plant, {0.5, 0.0}, dt, 600);
        const std::size_t k0 = static_cast<std::size_t>(std::llround(2.0 * tau / dt));
        double eps = 0.0;
        for (std::size_t k = k0; k < tr.t.size(); ++k) {
            eps = std::max(eps, std::abs(tr.estimation_error[k]));
        }
        for (std::size_t k = k0; k < tr.t.size(); ++k) {
            const double bound = std::abs(tr.e[k0]) * std::exp(-kp * (tr.t[k] - tr.t[k0])) + eps / kp;
            CHECK(std::abs(tr.e[k]) <= bound + 1e-12);
        }
    }

    TEST_CASE("rescaling alpha leaves the error trajectory within the estimation bound") {
        UltraLocalPlantParams plant;
        plant.offset = 1.0;
        plant.amplitude = 0.5;
        plant.frequency = 0.1;
        const double kp = 5.0, dt = 0.01;
        const LoopTrace a = run_loop(1.0, 1.0, kp, 0.1, plant, {0.2, 0.0}, dt, 3000);
        const LoopTrace b = run_loop(2.0, 1.0, kp, 0.1, plant, {0.2, 0.0}, dt, 3000);
        double eps = 0.0, worst = 0.0;
        for (std::size_t k = 100; k < a.t.size(); ++k) {
            eps = std::max({eps, std::abs(a.estimation_error[k]), std::abs(b.estimation_error[k])});
            worst = std::max(worst, std::abs(a.e[k] - b.e[k]));
        }
        CHECK(worst <= 2.0 * eps / kp);
    }
}

TEST_SUITE("mimo") {
    TEST_CASE("single channel reduces to the iP law") {
        std::vector<IpChannel> chans{channel_with_estimate(2.0, 3.0, 0.7)};
        IpChannel reference = chans.front();
        const std::vector<Setpoint> sps{{0.1, 0.2}};
        const std::vector<double> ys{0.06};
        const std::vector<double> u = mimo_step(chans, sps, ys, 0.06);
        reference.observe(0.06, 0.06);
        REQUIRE(u.size() == 1);
        CHECK(u[0] == ip_control(reference, sps[0], 0.06));
    }

    TEST_CASE("identical channels give bitwise identical outputs") {
        std::vector<IpChannel> chans(2, IpChannel(UltraLocalConfig(0.001, 0.1), 0.5, EstimatorKind::integral, 0.01));
        const std::vector<Setpoint> sps{{0.02, 0.001}, {0.02, 0.001}};
        for (int k = 0; k < 50; ++k) {
            const double y = 0.01 * std::sin(0.1 * k);
            const std::vector<double> ys{y, y};
            const std::vector<double> u = mimo_step(chans, sps, ys, k * 0.01);
            CHECK(u[0] == u[1]);
        }
    }

    TEST_CASE("length mismatch is a configuration error") {
        std::vector<IpChannel> chans(2, IpChannel(UltraLocalConfig(1.0, 0.1), 1.0, EstimatorKind::integral, 0.01));
        const std::vector<Setpoint> one{{0.0, 0.0}};
        const std::vector<double> two{0.0, 0.0};
        CHECK_THROWS_AS(mimo_step(chans, one, two, 0.0), ConfigError);
        std::vector<IpChannel> none;
        CHECK_THROWS_AS(mimo_step(none, std::vector<Setpoint>{}, std::vector<double>{}, 0.0), ConfigError);
    }
}

TEST_SUITE("actuator map") {
    const ActuatorMap paper_map{10.0, 24.0};

    TEST_CASE("offset, clamp and zero convention") {
        CHECK(actuator_map(5.0, paper_map) == 15.0);
        CHECK(actuator_map(-20.0, paper_map) == -24.0);
        CHECK(actuator_map(0.0, paper_map) == 0.0);
        CHECK(actuator_map(-3.0, paper_map) == -13.0);
        CHECK(actuator_map(1e9, paper_map) == 24.0);
    }

    TEST_CASE("odd in u") {
        std::mt19937_64 rng(5);
        std::uniform_real_distribution<double> dist(-40.0, 40.0);
        for (int i = 0; i < 1000; ++i) {
            const double u = dist(rng);
            CHECK(actuator_map(-u, paper_map) == -actuator_map(u, paper_map));
        }
    }

    TEST_CASE("invalid maps are rejected") {
        CHECK_THROWS_AS((ActuatorMap{24.0, 24.0}.validate()), ConfigError);
        CHECK_THROWS_AS((ActuatorMap{-1.0, 24.0}.validate()), ConfigError);
        CHECK_THROWS_AS(actuator_map(NAN, paper_map), NumericError);
    }
}

TEST_SUITE("pid baseline") {
    TEST_CASE("zero error from rest gives zero output") {
        PidState state;
        const PidGains gains{1.0, 2.0, 0.5, 0.01};
        for (int k = 0; k < 10; ++k) {
            CHECK(pid_control(state, gains, {0.0, 0.0}, 0.0, 0.01) == 0.0);
        }
    }

    TEST_CASE("pure proportional") {
        PidState state;
        CHECK(pid_control(state, PidGains{1.0, 0.0, 0.0}, {0.5, 0.0}, 0.0, 0.01) == 0.5);
    }

    TEST_CASE("step response on an integrator plant follows the discrete recurrence") {
        // y_{k+1} = y_k + dt kp (1 - y_k)  =>  y_k = 1 - (1 - kp dt)^k.
        const double kp = 2.0, dt = 1e-3;
        PidState state;
        LtiState plant;
        for (int k = 1; k <= 5000; ++k) {
            const double u = pid_control(state, PidGains{kp, 0.0, 0.0}, {1.0, 0.0}, plant.y, dt);
            plant = step_lti(plant, LtiParams{0.0, 1.0, 0.0}, u, dt);
            const double discrete = 1.0 - std::pow(1.0 - kp * dt, k);
            const double continuous = 1.0 - std::exp(-kp * k * dt);
            CHECK(plant.y == doctest::Approx(discrete).epsilon(1e-9));
            CHECK(std::abs(plant.y - continuous) <= 0.02 * continuous);
        }
    }

    TEST_CASE("integrator is clamped") {
        PidState state;
        const PidGains gains{0.0, 10.0, 0.0, 0.0, 0.5};
        double u = 0.0;
        for (int k = 0; k < 1000; ++k) {
            u = pid_control(state, gains, {1.0, 0.0}, 0.0, 0.01);
        }
        CHECK(u == doctest::Approx(0.5));
        CHECK(state.integrator == doctest::Approx(0.5));
    }

    TEST_CASE("derivative acts on the measurement, not the reference") {
        PidState state;
        const PidGains gains{0.0, 0.0, 1.0};
        pid_control(state, gains, {0.0, 0.0}, 0.0, 0.01);
        CHECK(pid_control(state, gains, {5.0, 0.0}, 0.0, 0.01) == 0.0);
        CHECK(pid_control(state, gains, {5.0, 0.0}, 0.1, 0.01) == doctest::Approx(-10.0));
    }

    TEST_CASE("derivative filter is a first-order lag") {
        PidState state;
        const double dt = 0.01, tf = 0.04;
        const PidGains gains{0.0, 0.0, 1.0, tf};
        pid_control(state, gains, {0.0, 0.0}, 0.0, dt);
        double y = 0.0;
        double filtered = 0.0;
        for (int k = 0; k < 20; ++k) {
            y += 0.01;  // measured slope 1
            filtered += dt / (tf + dt) * (-1.0 - filtered);
            CHECK(pid_control(state, gains, {0.0, 0.0}, y, dt) == doctest::Approx(filtered).epsilon(1e-9));
        }
    }

    TEST_CASE("invalid gains and steps are rejected") {
        CHECK_THROWS_AS((PidGains{1.0, 0.0, 0.0, 0.0, 0.0}.validate()), ConfigError);
        CHECK_THROWS_AS((PidGains{NAN, 0.0, 0.0}.validate()), ConfigError);
        PidState state;
        CHECK_THROWS_AS(pid_control(state, PidGains{1.0, 0.0, 0.0}, {0.0, 0.0}, 0.0, 0.0), ConfigError);
    }
}
