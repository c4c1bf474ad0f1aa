#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "mfc/config.hpp"
#include "mfc/controller.hpp"
#include "mfc/plants.hpp"
#include "mfc/trajectories.hpp"

namespace mfc {

inline constexpr int kSchemaVersion = 1;

enum class PlantKind { half_quadrotor, ultra_local, lti };
enum class ControllerKind { ip, pid };

// Log-spaced kp grid; ki and kd are searched as multiples of kp.
struct PidGrid {
    double kp_min = 0.1;
    double kp_max = 100.0;
    int kp_points = 9;
    std::vector<double> ki_ratios{0.0, 0.1, 0.3, 1.0, 3.0, 10.0};
    std::vector<double> kd_ratios{0.0, 0.003, 0.01, 0.03};
};

struct ChannelConfig {
    double alpha = 1.0;
    double kp = 1.0;
    double tau = 0.05;
    EstimatorKind estimator = EstimatorKind::integral;
    ReferenceSpec reference;
    NoiseSpec noise;
    PidGains pid;
    PidGrid pid_grid;
};

struct PerturbationEvent {
    double time = 0.0;
    std::string kind = "added_mass";
    double mass = 0.0;  // kg
    double arm = 0.2;   // m
};

struct ScenarioConfig {
    int schema_version = kSchemaVersion;
    std::string name = "scenario";
    PlantKind plant = PlantKind::half_quadrotor;
    ControllerKind controller = ControllerKind::ip;
    HalfQuadrotorParams half_quadrotor;
    UltraLocalPlantParams ultra_local;
    LtiParams lti;
    double initial_output = 0.0;  // single-output plants
    ActuatorMap actuator;
    bool actuator_enabled = true;
    double dt_control = 0.01;
    double duration = 60.0;
    int substeps = 10;
    std::uint64_t seed = 1;
    double startup_exclusion = 2.0;
    std::string output;
    std::vector<ChannelConfig> channels;
    std::vector<PerturbationEvent> events;

    std::size_t tick_count() const;
    void validate() const;
};

ScenarioConfig scenario_from_config(const KeyValueConfig& kv);
ScenarioConfig load_scenario(const std::filesystem::path& path, const std::vector<std::string>& overrides = {});

struct ChannelRow {
    double y = 0.0;
    double y_star = 0.0;
    double y_star_dot = 0.0;
    double e = 0.0;
    double f_est = 0.0;
    double u = 0.0;
    double v = 0.0;
};

struct TickRow {
    double t = 0.0;
    std::vector<ChannelRow> channels;
};

// Controller parameters as held by the running controllers.
struct ChannelGains {
    double alpha = 0.0;
    double kp = 0.0;
    double tau = 0.0;
    PidGains pid;
};

struct ChannelSummary {
    double rmse = 0.0;
    double max_abs_error = 0.0;
    double saturation_fraction = 0.0;
    double f_est_variance = 0.0;
    double reference_range = 0.0;
};

struct ScenarioRecord {
    std::size_t channel_count = 0;
    std::vector<TickRow> rows;
    std::vector<ChannelSummary> summary;
    bool diverged = false;
    double divergence_time = 0.0;
    std::string divergence_message;
    // One snapshot per applied event, taken immediately before and after it.
    std::vector<std::vector<ChannelGains>> gains_before_events;
    std::vector<std::vector<ChannelGains>> gains_after_events;
};

/**
 * Runs the closed loop tick by tick: measure, evaluate references, control,
 * map to volts, then sub-step the plant across the tick with the volts held.
 * Perturbation events alter only the plant. Divergence stops the run and
 * returns the partial record with `diverged` set.
 */
ScenarioRecord run_scenario(const ScenarioConfig& cfg);

// RMSE of e over rows with t0 <= t < t1.
double rmse_between(const ScenarioRecord& record, std::size_t channel, double t0, double t1);
ChannelSummary summarize_channel(const ScenarioRecord& record, std::size_t channel, const ScenarioConfig& cfg);

// Bitwise equality of every logged double.
bool records_identical(const ScenarioRecord& a, const ScenarioRecord& b);
bool gains_identical(const std::vector<ChannelGains>& a, const std::vector<ChannelGains>& b);

struct CausalityReport {
    std::size_t ticks_checked = 0;
    std::size_t mismatches = 0;
    bool prefix_rerun_matches = true;
};

/**
 * Re-derives every logged u_k from fresh controllers fed only the logged
 * rows 0..k, and re-runs the scenario truncated at `prefix_fraction` of the
 * duration to confirm it reproduces the head of the full record.
 */
CausalityReport check_causality(const ScenarioConfig& cfg, const ScenarioRecord& record,
                                double prefix_fraction = 0.5);

struct PidTuningResult {
    std::vector<PidGains> gains;
    std::vector<double> rmse;
    std::size_t evaluations = 0;
};

/**
 * Grid search for the PID baseline on the given (nominal) scenario with
 * events removed. Channels are tuned one at a time, each minimizing its own
 * RMSE after startup exclusion with the other channels at their current
 * gains; the sweep over channels is repeated `passes` times.
 */
PidTuningResult tune_pid(const ScenarioConfig& nominal, int passes = 2);

struct ComparisonRow {
    std::string variant;
    std::vector<double> rmse_pre;
    std::vector<double> rmse_post;
    std::vector<double> rmse_post_nominal;  // same window, same seed, events removed
    std::vector<double> within_run;         // rmse_post / rmse_pre
    std::vector<double> degradation;        // rmse_post / rmse_post_nominal
    bool diverged = false;
};

struct ComparisonTable {
    double split_time = 0.0;
    std::vector<ComparisonRow> rows;
};

// Runs iP and PID on identical plant, references, noise and seed, each once
// as configured and once with the events removed.
ComparisonTable compare_controllers(const ScenarioConfig& cfg, const std::vector<PidGains>& pid_gains);
std::string format_comparison(const ComparisonTable& table);

}  // namespace mfc
