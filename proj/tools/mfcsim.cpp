// Command-line scenario runner for the model-free control toolkit.
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "mfc/bench.hpp"
#include "mfc/csv.hpp"
#include "mfc/scenario.hpp"

namespace {

struct CommonOptions {
    std::string config;
    std::string out;
    std::optional<std::uint64_t> seed;
    std::vector<std::string> overrides;
};

void add_common(CLI::App* cmd, CommonOptions& opts) {
    cmd->add_option("--config", opts.config, "scenario config file")->required()->check(CLI::ExistingFile);
    cmd->add_option("--out", opts.out, "output path");
    cmd->add_option("--seed", opts.seed, "override scenario.seed");
    cmd->add_option("--override", opts.overrides, "key=value config override (repeatable)");
}

mfc::ScenarioConfig load(const CommonOptions& opts) {
    std::vector<std::string> overrides = opts.overrides;
    if (opts.seed) {
        overrides.push_back("scenario.seed=" + std::to_string(*opts.seed));
    }
    return mfc::load_scenario(opts.config, overrides);
}

void print_summary(const mfc::ScenarioConfig& cfg, const mfc::ScenarioRecord& rec) {
    std::printf("scenario %s: %zu ticks%s\n", cfg.name.c_str(), rec.rows.size(),
                rec.diverged ? " (DIVERGED)" : "");
    for (std::size_t i = 0; i < rec.summary.size(); ++i) {
        const auto& s = rec.summary[i];
        const double pct = s.reference_range > 0.0 ? 100.0 * s.rmse / s.reference_range : 0.0;
        std::printf("  ch%zu rmse=%.6g (%.3g%% of range %.6g) max|e|=%.6g sat=%.4f var(F_est)=%.6g\n", i + 1,
                    s.rmse, pct, s.reference_range, s.max_abs_error, s.saturation_fraction, s.f_est_variance);
    }
    if (rec.diverged) {
        std::printf("  %s\n", rec.divergence_message.c_str());
    }
}

int run_command(const CommonOptions& opts) {
    const mfc::ScenarioConfig cfg = load(opts);
    const mfc::ScenarioRecord rec = mfc::run_scenario(cfg);
    print_summary(cfg, rec);
    const std::string path = !opts.out.empty() ? opts.out : cfg.output;
    if (!path.empty()) {
        mfc::export_csv(rec, path);
        std::printf("wrote %s\n", path.c_str());
    }
    return rec.diverged ? 2 : 0;
}

int compare_command(const CommonOptions& opts, const std::string& tune_config) {
    const mfc::ScenarioConfig cfg = load(opts);
    mfc::ScenarioConfig nominal = cfg;
    if (!tune_config.empty()) {
        CommonOptions t = opts;
        t.config = tune_config;
        nominal = load(t);
    }
    const mfc::PidTuningResult tuned = mfc::tune_pid(nominal);
    std::printf("PID tuned on '%s' in %zu runs:\n", nominal.name.c_str(), tuned.evaluations);
    for (std::size_t i = 0; i < tuned.gains.size(); ++i) {
        std::printf("  ch%zu kp=%.6g ki=%.6g kd=%.6g (nominal rmse %.6g)\n", i + 1, tuned.gains[i].kp,
                    tuned.gains[i].ki, tuned.gains[i].kd, tuned.rmse[i]);
    }
    const mfc::ComparisonTable table = mfc::compare_controllers(cfg, tuned.gains);
    const std::string text = mfc::format_comparison(table);
    std::cout << text;
    if (!opts.out.empty()) {
        std::ofstream out(opts.out);
        if (!out) {
            throw mfc::IoError("cannot write '" + opts.out + "'");
        }
        out << "variant,channel,rmse_pre,rmse_post,rmse_post_nominal,post_over_pre,degradation,diverged\n";
        for (const auto& row : table.rows) {
            for (std::size_t i = 0; i < row.rmse_pre.size(); ++i) {
                out << row.variant << ',' << i + 1 << ',' << row.rmse_pre[i] << ',' << row.rmse_post[i] << ','
                    << row.rmse_post_nominal[i] << ',' << row.within_run[i] << ',' << row.degradation[i] << ',' << (row.diverged ? 1 : 0) << '\n';
            }
        }
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"mfcsim - model-free control scenarios"};
    app.require_subcommand(1);

    CommonOptions run_opts;
    auto* run = app.add_subcommand("run", "run one scenario and export its record as CSV");
    add_common(run, run_opts);

    CommonOptions cmp_opts;
    std::string tune_config;
    auto* cmp = app.add_subcommand("compare", "tune the PID baseline, then compare iP vs PID");
    add_common(cmp, cmp_opts);
    cmp->add_option("--tune-config", tune_config, "nominal scenario used for PID tuning")
        ->check(CLI::ExistingFile);

    std::vector<double> taus{0.02, 0.05, 0.1};
    std::vector<double> dts{1e-3, 1e-2};
    std::vector<double> amplitudes{0.0, 0.01, 0.05};
    double frequency = 200.0;
    std::size_t ticks = 1000;
    std::string bench_out;
    auto* bench = app.add_subcommand("bench-estimator", "sweep tau, dt and noise for the integral estimator");
    bench->add_option("--tau", taus, "estimation horizons, s")->delimiter(',');
    bench->add_option("--dt", dts, "sampling periods, s")->delimiter(',');
    bench->add_option("--noise", amplitudes, "sinusoidal noise amplitudes")->delimiter(',');
    bench->add_option("--frequency", frequency, "noise frequency, Hz");
    bench->add_option("--ticks", ticks, "estimates per case");
    bench->add_option("--out", bench_out, "CSV output path (default stdout)");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*run) {
            return run_command(run_opts);
        }
        if (*cmp) {
            return compare_command(cmp_opts, tune_config);
        }
        if (*bench) {
            const std::string csv =
                mfc::format_bench_csv(mfc::bench_estimator_sweep(taus, dts, amplitudes, frequency, ticks));
            if (bench_out.empty()) {
                std::cout << csv;
            } else {
                std::ofstream out(bench_out);
                if (!out) {
                    throw mfc::IoError("cannot write '" + bench_out + "'");
                }
                out << csv;
            }
            return 0;
        }
    } catch (const mfc::Error& err) {
        std::fprintf(stderr, "error: %s\n", err.what());
        return 1;
    }
    return 0;
}
