#include "mfc/scenario.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <iomanip>
#include <limits>
#include <map>
#include <sstream>

namespace mfc {

// ---------------------------------------------------------------------------
// Configuration
// ---------------------------------------------------------------------------

std::size_t ScenarioConfig::tick_count() const {
    return static_cast<std::size_t>(std::llround(duration / dt_control));
}

void ScenarioConfig::validate() const {
    if (schema_version != kSchemaVersion) {
        throw ConfigError("scenario: unsupported schema_version " + std::to_string(schema_version));
    }
    if (!(dt_control > 0.0) || !std::isfinite(dt_control)) {
        throw ConfigError("scenario: dt_control must be > 0");
    }
    if (!(duration >= 10.0 * dt_control) || !std::isfinite(duration)) {
        throw ConfigError("scenario: duration must be at least 10 * dt_control");
    }
    if (substeps < 1) {
        throw ConfigError("scenario: substeps must be >= 1");
    }
    if (!(startup_exclusion >= 0.0)) {
        throw ConfigError("scenario: startup_exclusion must be >= 0");
    }
    const std::size_t expected = plant == PlantKind::half_quadrotor ? 2 : 1;
    if (channels.size() != expected) {
        throw ConfigError("scenario: plant needs " + std::to_string(expected) + " channel(s), got " +
                          std::to_string(channels.size()));
    }
    for (const ChannelConfig& ch : channels) {
        UltraLocalConfig{ch.alpha, ch.tau};
        if (!(ch.kp > 0.0)) {
            throw ConfigError("scenario: channel kp must be > 0");
        }
        if (ch.tau < 2.0 * dt_control * (1.0 - 1e-9)) {
            throw ConfigError("scenario: tau must be at least 2 * dt_control");
        }
        ch.reference.validate();
        ch.noise.validate();
        ch.pid.validate();
    }
    if (actuator_enabled) {
        actuator.validate();
    }
    if (plant == PlantKind::half_quadrotor) {
        half_quadrotor.validate();
        if (actuator_enabled && actuator.saturation > half_quadrotor.max_voltage) {
            throw ConfigError("scenario: actuator saturation exceeds the plant's max_voltage");
        }
    }
    for (const PerturbationEvent& ev : events) {
        if (ev.kind != "added_mass") {
            throw ConfigError("scenario: unknown event kind '" + ev.kind + "'");
        }
        if (plant != PlantKind::half_quadrotor) {
            throw ConfigError("scenario: added_mass events need the half_quadrotor plant");
        }
        if (!(ev.time >= 0.0) || !(ev.mass >= 0.0) || !std::isfinite(ev.arm)) {
            throw ConfigError("scenario: event needs time >= 0, mass >= 0, finite arm");
        }
    }
}

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

// Sections like "channel.2" sorted by their numeric suffix.
std::vector<std::string> numbered_sections(const KeyValueConfig& kv, const std::string& prefix) {
    auto names = kv.sections_with_prefix(prefix);
    std::vector<std::pair<long, std::string>> keyed;
    for (const auto& n : names) {
        const std::string suffix = n.substr(prefix.size());
        long idx = 0;
        try {
            std::size_t used = 0;
            idx = std::stol(suffix, &used);
            if (used != suffix.size()) {
                throw ConfigError("");
            }
        } catch (...) {
            throw ConfigError(kv.source() + ": section '" + n + "' must be numbered");
        }
        keyed.emplace_back(idx, n);
    }
    std::sort(keyed.begin(), keyed.end());
    names.clear();
    for (std::size_t i = 0; i < keyed.size(); ++i) {
        if (keyed[i].first != static_cast<long>(i + 1)) {
            throw ConfigError(kv.source() + ": " + prefix + "N sections must be numbered 1..n");
        }
        names.push_back(keyed[i].second);
    }
    return names;
}

std::vector<double> parse_tuple(const std::string& item, std::size_t arity, const std::string& key) {
    const auto parts = split_list(item, ':');
    if (parts.size() != arity) {
        throw ConfigError("config: '" + key + "' entries need " + std::to_string(arity) + " ':'-separated fields");
    }
    std::vector<double> out;
    for (const auto& p : parts) {
        out.push_back(parse_double(p, key));
    }
    return out;
}

ReferenceSpec parse_reference(const KeyValueConfig& kv, const std::string& sec) {
    ReferenceSpec ref;
    const std::string kind = kv.get_string(sec + ".reference", "hold");
    if (kind == "hold") {
        ref.kind = ReferenceKind::hold;
    } else if (kind == "smoothed_step_sequence") {
        ref.kind = ReferenceKind::smoothed_step_sequence;
    } else if (kind == "sinusoid_mix") {
        ref.kind = ReferenceKind::sinusoid_mix;
    } else {
        throw ConfigError(kv.source() + ": unknown reference kind '" + kind + "'");
    }
    ref.base = kv.get_double(sec + ".reference.base", 0.0);
    const std::string steps_key = sec + ".reference.steps";
    for (const auto& item : split_list(kv.get_string(steps_key, ""), ',')) {
        const auto f = parse_tuple(item, 3, steps_key);
        ref.segments.push_back(StepSegment{f[0], f[1], f[2]});
    }
    const std::string sines_key = sec + ".reference.sines";
    for (const auto& item : split_list(kv.get_string(sines_key, ""), ',')) {
        const auto f = parse_tuple(item, 3, sines_key);
        ref.sinusoids.push_back(SinusoidComponent{f[0], f[1], f[2]});
    }
    return ref;
}

NoiseSpec parse_noise(const KeyValueConfig& kv, const std::string& sec, std::uint64_t channel_number) {
    NoiseSpec n;
    const std::string kind = kv.get_string(sec + ".noise", "none");
    if (kind == "none") {
        n.kind = NoiseKind::none;
    } else if (kind == "sinusoid") {
        n.kind = NoiseKind::sinusoid;
    } else if (kind == "uniform") {
        n.kind = NoiseKind::uniform;
    } else {
        throw ConfigError(kv.source() + ": unknown noise kind '" + kind + "'");
    }
    n.amplitude = kv.get_double(sec + ".noise.amplitude", 0.0);
    n.frequency = kv.get_double(sec + ".noise.frequency", 0.0);
    // Stream id only; the run mixes it with the scenario seed.
    n.seed = kv.get_uint(sec + ".noise.seed", channel_number);
    return n;
}

PidGrid parse_grid(const KeyValueConfig& kv, const std::string& sec) {
    PidGrid g;
    g.kp_min = kv.get_double(sec + ".pid_grid.kp_min", g.kp_min);
    g.kp_max = kv.get_double(sec + ".pid_grid.kp_max", g.kp_max);
    g.kp_points = static_cast<int>(kv.get_int(sec + ".pid_grid.points", g.kp_points));
    const auto ratios = [&](const std::string& key, std::vector<double> fallback) {
        const auto v = kv.find(key);
        if (!v) {
            return fallback;
        }
        std::vector<double> out;
        for (const auto& item : split_list(*v, ',')) {
            out.push_back(parse_double(item, key));
        }
        return out;
    };
    g.ki_ratios = ratios(sec + ".pid_grid.ki_ratios", g.ki_ratios);
    g.kd_ratios = ratios(sec + ".pid_grid.kd_ratios", g.kd_ratios);
    if (!(g.kp_min > 0.0) || !(g.kp_max >= g.kp_min) || g.kp_points < 1 || g.ki_ratios.empty() ||
        g.kd_ratios.empty()) {
        throw ConfigError(kv.source() + ": invalid pid_grid in " + sec);
    }
    return g;
}

}  // namespace

ScenarioConfig scenario_from_config(const KeyValueConfig& kv) {
    ScenarioConfig cfg;
    cfg.schema_version = static_cast<int>(kv.get_int("schema_version", -1));
    if (cfg.schema_version == -1) {
        throw ConfigError(kv.source() + ": missing schema_version");
    }
    cfg.name = kv.get_string("scenario.name", cfg.name);

    const std::string plant = kv.get_string("scenario.plant", "half_quadrotor");
    if (plant == "half_quadrotor") {
        cfg.plant = PlantKind::half_quadrotor;
    } else if (plant == "ultra_local") {
        cfg.plant = PlantKind::ultra_local;
    } else if (plant == "lti") {
        cfg.plant = PlantKind::lti;
    } else {
        throw ConfigError(kv.source() + ": unknown plant '" + plant + "'");
    }
    const std::string controller = kv.get_string("scenario.controller", "ip");
    if (controller == "ip") {
        cfg.controller = ControllerKind::ip;
    } else if (controller == "pid") {
        cfg.controller = ControllerKind::pid;
    } else {
        throw ConfigError(kv.source() + ": unknown controller '" + controller + "'");
    }

    cfg.dt_control = kv.get_double("scenario.dt_control", cfg.dt_control);
    cfg.duration = kv.get_double("scenario.duration", cfg.duration);
    cfg.substeps = static_cast<int>(kv.get_int("scenario.substeps", cfg.substeps));
    cfg.seed = kv.get_uint("scenario.seed", cfg.seed);
    cfg.startup_exclusion = kv.get_double("scenario.startup_exclusion", cfg.startup_exclusion);
    cfg.output = kv.get_string("scenario.output", "");
    cfg.initial_output = kv.get_double("scenario.initial_output", 0.0);

    cfg.actuator_enabled = kv.get_bool("actuator.enabled", cfg.plant == PlantKind::half_quadrotor);
    cfg.actuator.offset = kv.get_double("actuator.offset", cfg.actuator.offset);
    cfg.actuator.saturation = kv.get_double("actuator.saturation", cfg.actuator.saturation);

    HalfQuadrotorParams& q = cfg.half_quadrotor;
    const std::pair<const char*, double*> quad_fields[] = {
        {"inertia_azimuth", &q.inertia_azimuth},   {"inertia_pitch", &q.inertia_pitch},
        {"thrust_azimuth", &q.thrust_azimuth},     {"thrust_pitch", &q.thrust_pitch},
        {"cross_azimuth", &q.cross_azimuth},       {"cross_pitch", &q.cross_pitch},
        {"friction_azimuth", &q.friction_azimuth}, {"friction_pitch", &q.friction_pitch},
        {"gravity_torque", &q.gravity_torque},     {"gyro_coupling", &q.gyro_coupling},
        {"added_mass_torque", &q.added_mass_torque}, {"deadzone_voltage", &q.deadzone_voltage},
        {"max_voltage", &q.max_voltage},
    };
    for (const auto& [name, field] : quad_fields) {
        *field = kv.get_double(std::string("half_quadrotor.") + name, *field);
    }

    UltraLocalPlantParams& ul = cfg.ultra_local;
    ul.gain = kv.get_double("ultra_local.gain", ul.gain);
    ul.offset = kv.get_double("ultra_local.offset", ul.offset);
    ul.amplitude = kv.get_double("ultra_local.amplitude", ul.amplitude);
    ul.frequency = kv.get_double("ultra_local.frequency", ul.frequency);
    ul.phase = kv.get_double("ultra_local.phase", ul.phase);

    cfg.lti.a = kv.get_double("lti.a", cfg.lti.a);
    cfg.lti.b = kv.get_double("lti.b", cfg.lti.b);
    cfg.lti.d = kv.get_double("lti.d", cfg.lti.d);

    std::uint64_t number = 1;
    for (const std::string& sec : numbered_sections(kv, "channel.")) {
        ChannelConfig ch;
        ch.alpha = kv.get_double(sec + ".alpha");
        ch.kp = kv.get_double(sec + ".kp");
        ch.tau = kv.get_double(sec + ".tau");
        const std::string est = kv.get_string(sec + ".estimator", "integral");
        if (est == "integral") {
            ch.estimator = EstimatorKind::integral;
        } else if (est == "closed_loop") {
            ch.estimator = EstimatorKind::closed_loop;
        } else {
            throw ConfigError(kv.source() + ": unknown estimator '" + est + "'");
        }
        ch.reference = parse_reference(kv, sec);
        ch.noise = parse_noise(kv, sec, number++);
        ch.pid.kp = kv.get_double(sec + ".pid.kp", 0.0);
        ch.pid.ki = kv.get_double(sec + ".pid.ki", 0.0);
        ch.pid.kd = kv.get_double(sec + ".pid.kd", 0.0);
        ch.pid.derivative_filter = kv.get_double(sec + ".pid.filter", cfg.dt_control);
        ch.pid.integrator_limit = kv.get_double(sec + ".pid.limit", 1e9);
        ch.pid_grid = parse_grid(kv, sec);
        cfg.channels.push_back(std::move(ch));
    }

    for (const std::string& sec : numbered_sections(kv, "event.")) {
        PerturbationEvent ev;
        ev.time = kv.get_double(sec + ".time");
        ev.kind = kv.get_string(sec + ".kind", ev.kind);
        ev.mass = kv.get_double(sec + ".mass");
        ev.arm = kv.get_double(sec + ".arm", ev.arm);
        cfg.events.push_back(ev);
    }
    std::stable_sort(cfg.events.begin(), cfg.events.end(),
                     [](const PerturbationEvent& a, const PerturbationEvent& b) { return a.time < b.time; });

    if (const auto unused = kv.unused_keys(); !unused.empty()) {
        std::string list;
        for (const auto& k : unused) {
            list += (list.empty() ? "" : ", ") + k;
        }
        throw ConfigError(kv.source() + ": unknown keys: " + list);
    }
    cfg.validate();
    return cfg;
}

ScenarioConfig load_scenario(const std::filesystem::path& path, const std::vector<std::string>& overrides) {
    KeyValueConfig kv = KeyValueConfig::load(path);
    for (const auto& o : overrides) {
        kv.apply_override(o);
    }
    return scenario_from_config(kv);
}

// ---------------------------------------------------------------------------
// Simulation loop
// ---------------------------------------------------------------------------

namespace {

class PlantSimulator {
public:
    explicit PlantSimulator(const ScenarioConfig& cfg)
        : kind_(cfg.plant), quad_(cfg.half_quadrotor), ultra_(cfg.ultra_local), lti_(cfg.lti) {
        quad_state_ = HalfQuadrotorState{};
        ultra_state_ = UltraLocalPlantState{cfg.initial_output, 0.0};
        lti_state_ = LtiState{cfg.initial_output, 0.0};
        for (std::size_t i = 0; i < cfg.channels.size(); ++i) {
            NoiseSpec spec = cfg.channels[i].noise;
            spec.seed = splitmix64(cfg.seed ^ splitmix64(spec.seed));
            noise_[i] = NoiseSource(spec);
        }
    }

    std::vector<double> measure(double t) {
        switch (kind_) {
            case PlantKind::half_quadrotor: {
                HalfQuadrotorState s = quad_state_;
                s.t = t;
                const Outputs y = measure_half_quadrotor(s, noise_);
                return {y[0], y[1]};
            }
            case PlantKind::ultra_local:
                return {inject_noise(ultra_state_.y, noise_[0], t)};
            case PlantKind::lti:
                return {inject_noise(lti_state_.y, noise_[0], t)};
        }
        return {};
    }

    void advance(std::span<const double> v, double dt, int substeps) {
        const double h = dt / substeps;
        for (int i = 0; i < substeps; ++i) {
            switch (kind_) {
                case PlantKind::half_quadrotor:
                    quad_state_ = rk4_half_quadrotor(quad_state_, quad_, Volts{v[0], v[1]}, h);
                    break;
                case PlantKind::ultra_local:
                    ultra_state_ = step_ultra_local(ultra_state_, ultra_, v[0], h);
                    break;
                case PlantKind::lti:
                    lti_state_ = step_lti(lti_state_, lti_, v[0], h);
                    if (std::abs(lti_state_.y) > kDivergenceBound) {
                        throw DivergenceError("lti plant diverged at t=" + std::to_string(lti_state_.t));
                    }
                    break;
            }
        }
    }

    void apply(const PerturbationEvent& ev) { quad_ = apply_added_mass(quad_, ev.mass, ev.arm); }

private:
    PlantKind kind_;
    HalfQuadrotorParams quad_;
    HalfQuadrotorState quad_state_;
    UltraLocalPlantParams ultra_;
    UltraLocalPlantState ultra_state_;
    LtiParams lti_;
    LtiState lti_state_;
    std::array<NoiseSource, 2> noise_;
};

class LoopController {
public:
    explicit LoopController(const ScenarioConfig& cfg) : kind_(cfg.controller), dt_(cfg.dt_control) {
        for (const ChannelConfig& ch : cfg.channels) {
            ip_.emplace_back(UltraLocalConfig{ch.alpha, ch.tau}, ch.kp, ch.estimator, cfg.dt_control);
            pid_gains_.push_back(ch.pid);
            pid_state_.emplace_back();
        }
    }

    // Fills u and the F estimate in use (0 for the PID baseline).
    void compute(double t, std::span<const Setpoint> sp, std::span<const double> y, std::vector<double>& u,
                 std::vector<double>& f_est) {
        if (kind_ == ControllerKind::ip) {
            u = mimo_step(ip_, sp, y, t);
            for (std::size_t i = 0; i < ip_.size(); ++i) {
                f_est[i] = ip_[i].last_f_est().value;
            }
        } else {
            for (std::size_t i = 0; i < pid_state_.size(); ++i) {
                u[i] = pid_control(pid_state_[i], pid_gains_[i], sp[i], y[i], dt_);
                f_est[i] = 0.0;
            }
        }
    }

    // Replays one tick with a given u, returning the u the controller would have produced.
    double replay(std::size_t i, double t, const Setpoint& sp, double y, double logged_u) {
        if (kind_ == ControllerKind::ip) {
            ip_[i].observe(t, y);
            const double u = ip_control(ip_[i], sp, y);
            ip_[i].commit(sp, y, logged_u);
            return u;
        }
        return pid_control(pid_state_[i], pid_gains_[i], sp, y, dt_);
    }

    std::vector<ChannelGains> gains() const {
        std::vector<ChannelGains> out;
        for (std::size_t i = 0; i < ip_.size(); ++i) {
            out.push_back(ChannelGains{ip_[i].config().alpha(), ip_[i].kp(), ip_[i].config().tau(), pid_gains_[i]});
        }
        return out;
    }

private:
    ControllerKind kind_;
    double dt_;
    std::vector<IpChannel> ip_;
    std::vector<PidGains> pid_gains_;
    std::vector<PidState> pid_state_;
};

}  // namespace

ScenarioRecord run_scenario(const ScenarioConfig& cfg) {
    cfg.validate();
    const std::size_t m = cfg.channels.size();
    const std::size_t ticks = cfg.tick_count();

    PlantSimulator plant(cfg);
    LoopController controller(cfg);
    ScenarioRecord record;
    record.channel_count = m;
    record.rows.reserve(ticks);

    std::vector<Setpoint> sp(m);
    std::vector<double> u(m), f_est(m), v(m);
    std::size_t next_event = 0;

    for (std::size_t k = 0; k < ticks; ++k) {
        const double t = static_cast<double>(k) * cfg.dt_control;
        while (next_event < cfg.events.size() && cfg.events[next_event].time <= t + 1e-9 * cfg.dt_control) {
            record.gains_before_events.push_back(controller.gains());
            plant.apply(cfg.events[next_event]);
            record.gains_after_events.push_back(controller.gains());
            ++next_event;
        }

        const std::vector<double> y = plant.measure(t);
        for (std::size_t i = 0; i < m; ++i) {
            sp[i] = eval_reference(cfg.channels[i].reference, t);
        }
        controller.compute(t, sp, y, u, f_est);
        for (std::size_t i = 0; i < m; ++i) {
            v[i] = cfg.actuator_enabled ? actuator_map(u[i], cfg.actuator) : u[i];
        }

        TickRow row;
        row.t = t;
        row.channels.resize(m);
        for (std::size_t i = 0; i < m; ++i) {
            row.channels[i] = ChannelRow{y[i], sp[i].y_star, sp[i].y_star_dot, y[i] - sp[i].y_star, f_est[i], u[i], v[i]};
        }
        record.rows.push_back(std::move(row));

        try {
            plant.advance(v, cfg.dt_control, cfg.substeps);
        } catch (const DivergenceError& err) {
            record.diverged = true;
            record.divergence_time = t + cfg.dt_control;
            record.divergence_message = err.what();
            break;
        }
    }

    for (std::size_t i = 0; i < m; ++i) {
        record.summary.push_back(summarize_channel(record, i, cfg));
    }
    return record;
}

double rmse_between(const ScenarioRecord& record, std::size_t channel, double t0, double t1) {
    double sum = 0.0;
    std::size_t n = 0;
    for (const TickRow& row : record.rows) {
        if (row.t >= t0 && row.t < t1) {
            const double e = row.channels[channel].e;
            sum += e * e;
            ++n;
        }
    }
    return n == 0 ? std::numeric_limits<double>::quiet_NaN() : std::sqrt(sum / static_cast<double>(n));
}

ChannelSummary summarize_channel(const ScenarioRecord& record, std::size_t channel, const ScenarioConfig& cfg) {
    ChannelSummary s;
    s.rmse = rmse_between(record, channel, cfg.startup_exclusion, std::numeric_limits<double>::infinity());

    double f_sum = 0.0;
    double f_sq = 0.0;
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    std::size_t n = 0;
    std::size_t saturated = 0;
    for (const TickRow& row : record.rows) {
        const ChannelRow& c = row.channels[channel];
        if (cfg.actuator_enabled && std::abs(c.v) >= cfg.actuator.saturation) {
            ++saturated;
        }
        if (row.t < cfg.startup_exclusion) {
            continue;
        }
        s.max_abs_error = std::max(s.max_abs_error, std::abs(c.e));
        f_sum += c.f_est;
        f_sq += c.f_est * c.f_est;
        lo = std::min(lo, c.y_star);
        hi = std::max(hi, c.y_star);
        ++n;
    }
    if (!record.rows.empty()) {
        s.saturation_fraction = static_cast<double>(saturated) / static_cast<double>(record.rows.size());
    }
    if (n > 0) {
        const double mean = f_sum / static_cast<double>(n);
        s.f_est_variance = std::max(0.0, f_sq / static_cast<double>(n) - mean * mean);
        s.reference_range = hi - lo;
    }
    return s;
}

namespace {

bool same_bits(double a, double b) { return std::bit_cast<std::uint64_t>(a) == std::bit_cast<std::uint64_t>(b); }

bool same_pid(const PidGains& a, const PidGains& b) {
    return same_bits(a.kp, b.kp) && same_bits(a.ki, b.ki) && same_bits(a.kd, b.kd) &&
           same_bits(a.derivative_filter, b.derivative_filter) && same_bits(a.integrator_limit, b.integrator_limit);
}

bool same_row(const TickRow& a, const TickRow& b) {
    if (!same_bits(a.t, b.t) || a.channels.size() != b.channels.size()) {
        return false;
    }
    for (std::size_t i = 0; i < a.channels.size(); ++i) {
        const ChannelRow& x = a.channels[i];
        const ChannelRow& y = b.channels[i];
        if (!same_bits(x.y, y.y) || !same_bits(x.y_star, y.y_star) || !same_bits(x.y_star_dot, y.y_star_dot) ||
            !same_bits(x.e, y.e) || !same_bits(x.f_est, y.f_est) || !same_bits(x.u, y.u) || !same_bits(x.v, y.v)) {
            return false;
        }
    }
    return true;
}

}  // namespace

bool gains_identical(const std::vector<ChannelGains>& a, const std::vector<ChannelGains>& b) {
    if (a.size() != b.size()) {
        return false;
    }
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (!same_bits(a[i].alpha, b[i].alpha) || !same_bits(a[i].kp, b[i].kp) || !same_bits(a[i].tau, b[i].tau) ||
            !same_pid(a[i].pid, b[i].pid)) {
            return false;
        }
    }
    return true;
}

bool records_identical(const ScenarioRecord& a, const ScenarioRecord& b) {
    if (a.channel_count != b.channel_count || a.rows.size() != b.rows.size() || a.diverged != b.diverged ||
        a.summary.size() != b.summary.size()) {
        return false;
    }
    for (std::size_t k = 0; k < a.rows.size(); ++k) {
        if (!same_row(a.rows[k], b.rows[k])) {
            return false;
        }
    }
    for (std::size_t i = 0; i < a.summary.size(); ++i) {
        const ChannelSummary& x = a.summary[i];
        const ChannelSummary& y = b.summary[i];
        if (!same_bits(x.rmse, y.rmse) || !same_bits(x.max_abs_error, y.max_abs_error) ||
            !same_bits(x.saturation_fraction, y.saturation_fraction) ||
            !same_bits(x.f_est_variance, y.f_est_variance)) {
            return false;
        }
    }
    return true;
}

CausalityReport check_causality(const ScenarioConfig& cfg, const ScenarioRecord& record, double prefix_fraction) {
    CausalityReport report;
    LoopController controller(cfg);
    for (const TickRow& row : record.rows) {
        for (std::size_t i = 0; i < row.channels.size(); ++i) {
            const ChannelRow& c = row.channels[i];
            const Setpoint sp = eval_reference(cfg.channels[i].reference, row.t);
            const double u = controller.replay(i, row.t, sp, c.y, c.u);
            if (!same_bits(u, c.u)) {
                ++report.mismatches;
            }
        }
        ++report.ticks_checked;
    }

    ScenarioConfig truncated = cfg;
    const auto prefix_ticks =
        std::max<std::size_t>(10, static_cast<std::size_t>(prefix_fraction * static_cast<double>(cfg.tick_count())));
    truncated.duration = static_cast<double>(prefix_ticks) * cfg.dt_control;
    const ScenarioRecord head = run_scenario(truncated);
    if (head.rows.size() > record.rows.size()) {
        report.prefix_rerun_matches = false;
    } else {
        for (std::size_t k = 0; k < head.rows.size(); ++k) {
            if (!same_row(head.rows[k], record.rows[k])) {
                report.prefix_rerun_matches = false;
                break;
            }
        }
    }
    return report;
}

// ---------------------------------------------------------------------------
// PID baseline and comparison
// ---------------------------------------------------------------------------

PidTuningResult tune_pid(const ScenarioConfig& nominal, int passes) {
    ScenarioConfig cfg = nominal;
    cfg.events.clear();
    cfg.controller = ControllerKind::pid;

    PidTuningResult result;
    const std::size_t m = cfg.channels.size();
    result.rmse.assign(m, std::numeric_limits<double>::infinity());
    const auto cost = [&](std::size_t ch) {
        ++result.evaluations;
        const ScenarioRecord rec = run_scenario(cfg);
        if (rec.diverged) {
            return std::numeric_limits<double>::infinity();
        }
        const double r = rec.summary[ch].rmse;
        return std::isfinite(r) ? r : std::numeric_limits<double>::infinity();
    };

    for (int pass = 0; pass < passes; ++pass) {
        for (std::size_t ch = 0; ch < m; ++ch) {
            const PidGrid& grid = cfg.channels[ch].pid_grid;
            PidGains best = cfg.channels[ch].pid;
            double best_cost = cost(ch);
            for (int i = 0; i < grid.kp_points; ++i) {
                const double frac = grid.kp_points == 1 ? 0.0 : static_cast<double>(i) / (grid.kp_points - 1);
                const double kp = grid.kp_min * std::pow(grid.kp_max / grid.kp_min, frac);
                for (double ki_ratio : grid.ki_ratios) {
                    for (double kd_ratio : grid.kd_ratios) {
                        PidGains candidate = best;
                        candidate.kp = kp;
                        candidate.ki = kp * ki_ratio;
                        candidate.kd = kp * kd_ratio;
                        cfg.channels[ch].pid = candidate;
                        const double c = cost(ch);
                        if (c < best_cost) {
                            best_cost = c;
                            best = candidate;
                        }
                    }
                }
            }
            cfg.channels[ch].pid = best;
            result.rmse[ch] = best_cost;
        }
    }
    for (const ChannelConfig& ch : cfg.channels) {
        result.gains.push_back(ch.pid);
    }
    return result;
}

ComparisonTable compare_controllers(const ScenarioConfig& cfg, const std::vector<PidGains>& pid_gains) {
    if (pid_gains.size() != cfg.channels.size()) {
        throw ConfigError("compare_controllers: need one set of PID gains per channel");
    }
    ComparisonTable table;
    table.split_time = cfg.events.empty() ? 0.5 * cfg.duration : cfg.events.front().time;
    const double end = std::numeric_limits<double>::infinity();

    const auto evaluate = [&](const std::string& name, const ScenarioConfig& variant) {
        ScenarioConfig nominal = variant;
        nominal.events.clear();
        const ScenarioRecord rec = run_scenario(variant);
        const ScenarioRecord base = run_scenario(nominal);
        ComparisonRow row;
        row.variant = name;
        row.diverged = rec.diverged || base.diverged;
        for (std::size_t i = 0; i < variant.channels.size(); ++i) {
            const double pre = rmse_between(rec, i, variant.startup_exclusion, table.split_time);
            const double post = rmse_between(rec, i, table.split_time, end);
            const double post_nominal = rmse_between(base, i, table.split_time, end);
            row.rmse_pre.push_back(pre);
            row.rmse_post.push_back(post);
            row.rmse_post_nominal.push_back(post_nominal);
            row.within_run.push_back(post / pre);
            row.degradation.push_back(post / post_nominal);
        }
        table.rows.push_back(std::move(row));
    };

    ScenarioConfig ip = cfg;
    ip.controller = ControllerKind::ip;
    evaluate("iP", ip);

    ScenarioConfig pid = cfg;
    pid.controller = ControllerKind::pid;
    for (std::size_t i = 0; i < pid.channels.size(); ++i) {
        pid.channels[i].pid = pid_gains[i];
    }
    evaluate("PID", pid);
    return table;
}

std::string format_comparison(const ComparisonTable& table) {
    std::ostringstream out;
    out << "split at t=" << table.split_time << " s\n";
    out << std::left << std::setw(8) << "variant" << std::setw(4) << "ch" << std::setw(14) << "rmse_pre"
        << std::setw(14) << "rmse_post" << std::setw(14) << "post_nominal" << std::setw(12) << "post/pre"
        << std::setw(13) << "degradation" << "diverged\n";
    for (const ComparisonRow& row : table.rows) {
        for (std::size_t i = 0; i < row.rmse_pre.size(); ++i) {
            out << std::left << std::setw(8) << row.variant << std::setw(4) << (i + 1) << std::setprecision(5)
                << std::setw(14) << row.rmse_pre[i] << std::setw(14) << row.rmse_post[i] << std::setw(14)
                << row.rmse_post_nominal[i] << std::setw(12) << row.within_run[i] << std::setw(13)
                << row.degradation[i] << (row.diverged ? "yes" : "no") << "\n";
        }
    }
    return out.str();
}

}  // namespace mfc
