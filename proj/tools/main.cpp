// rfseeker: run experiments, trace single localizations, validate configs.
//
// Exit codes: 0 success, 1 invalid configuration or arguments, 2 runtime failure.

#include <algorithm>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "rfseeker/config.hpp"
#include "rfseeker/csv.hpp"
#include "rfseeker/experiment.hpp"

namespace fs = std::filesystem;
using namespace rfseek;

namespace {

struct Overrides {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> out;
    std::optional<int> trials;
    std::vector<double> snr;
};

void add_common(CLI::App* cmd, Overrides& o) {
    cmd->add_option("--config", o.config, "YAML config file (defaults when omitted)")
        ->check(CLI::ExistingFile);
    cmd->add_option("--seed", o.seed, "Master seed")->envname("RFSEEKER_SEED");
    cmd->add_option("--out", o.out, "Output directory");
    cmd->add_option("--trials", o.trials, "Trials per SNR");
    cmd->add_option("--snr", o.snr, "SNR values in dB, comma separated (inf = noiseless)")
        ->delimiter(',');
}

ExperimentConfig resolve(const Overrides& o) {
    ExperimentConfig cfg = o.config.empty() ? parse_config("") : load_config(o.config);
    if (o.seed) cfg.master_seed = *o.seed;
    if (o.out) cfg.output_dir = *o.out;
    if (o.trials) cfg.trials = *o.trials;
    if (!o.snr.empty()) cfg.snr_sweep = o.snr;
    // Overrides go through the same checks as file values.
    return parse_config(dump_config(cfg), o.config.empty() ? "<command line>" : o.config);
}

std::string path_in(const std::string& dir, const char* name) { return (fs::path(dir) / name).string(); }

int cmd_run(const ExperimentConfig& cfg) {
    fs::create_directories(cfg.output_dir);
    csv::write_file(path_in(cfg.output_dir, "resolved_config.yaml"), dump_config(cfg));
    const ExperimentReport report = run_experiment(cfg);
    emit_csv(report, cfg.output_dir);
    if (report.trajectory) emit_trajectory(*report.trajectory, path_in(cfg.output_dir, "trajectory.csv"));

    if (!report.failures.empty()) {
        std::map<std::string, int> per_method;
        for (const auto& f : report.failures) ++per_method[f.substr(0, f.find(' '))];
        for (const auto& [method, n] : per_method) {
            std::cerr << "note: " << n << " " << method << " cell(s) failed and were left out, e.g. "
                      << *std::find_if(report.failures.begin(), report.failures.end(),
                                       [&](const std::string& f) { return f.rfind(method + " ", 0) == 0; })
                      << '\n';
        }
    }
    const int last = cfg.scenario.mission.max_iterations;
    std::cout << "method,snr_db,iteration,rmse_m,trials\n";
    for (const RmseRow& r : report.rmse) {
        const bool final_progressive = r.method == kProgressive && r.iteration == last;
        const bool final_baseline = r.method != kProgressive && r.iteration == cfg.iteration_caps.back();
        if (!final_progressive && !final_baseline) continue;
        std::cout << r.method << ',' << csv::format_double(r.snr_db) << ',' << r.iteration << ','
                  << csv::format_double(r.rmse_m) << ',' << r.trials << '\n';
    }
    std::cout << "wrote " << cfg.output_dir << "/{raw.csv,rmse.csv,trajectory.csv,resolved_config.yaml}\n";
    return 0;
}

int cmd_trace(const ExperimentConfig& cfg) {
    // The run `run` writes to trajectory.csv: trial 0 at the last SNR.
    const std::size_t snr_index = cfg.snr_sweep.size() - 1;
    const double snr = cfg.snr_sweep[snr_index];
    Scenario scenario = cfg.scenario;
    scenario.channel.sigma = sigma_for_snr(snr, cfg.sigma_ref);
    scenario.source = trial_source(cfg, 0);
    RngStream rng = cell_stream(cfg.master_seed, snr_index, kProgressive, 0);
    const LocalizationTrace trace = run_localization(scenario, cfg.localizer, rng);

    fs::create_directories(cfg.output_dir);
    csv::write_file(path_in(cfg.output_dir, "resolved_config.yaml"), dump_config(cfg));
    emit_trajectory(trace, path_in(cfg.output_dir, "trajectory.csv"));
    write_trace(trace, path_in(cfg.output_dir, "iterations.csv"), path_in(cfg.output_dir, "samples.csv"));

    std::cout << "source " << csv::format_double(trace.source.x) << ','
              << csv::format_double(trace.source.y) << ',' << csv::format_double(trace.source.z)
              << "  snr_db " << csv::format_double(snr) << '\n';
    std::cout << "iteration,waypoint_x,waypoint_y,estimate_x,estimate_y,confidence,error_m\n";
    for (const auto& it : trace.iterations) {
        std::cout << it.index << ',' << csv::format_double(it.leg_end.x) << ','
                  << csv::format_double(it.leg_end.y) << ',' << csv::format_double(it.fused.x) << ','
                  << csv::format_double(it.fused.y) << ',' << csv::format_double(it.confidence)
                  << ',' << csv::format_double(it.error) << '\n';
    }
    std::cout << "terminated_by " << termination_name(trace.terminated_by) << ", final error "
              << csv::format_double(trace.final_error) << " m\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"UAV-aided progressive RSSI source localization"};
    app.require_subcommand(1);

    Overrides run_o, trace_o, validate_o;
    CLI::App* run = app.add_subcommand("run", "Monte Carlo experiment; writes raw.csv, rmse.csv, trajectory.csv");
    add_common(run, run_o);
    CLI::App* trace = app.add_subcommand("trace", "One seeded localization run with its trajectory");
    add_common(trace, trace_o);
    CLI::App* validate = app.add_subcommand("validate", "Check a config and print it with defaults filled in");
    add_common(validate, validate_o);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    ExperimentConfig cfg;
    try {
        if (run->parsed()) cfg = resolve(run_o);
        else if (trace->parsed()) cfg = resolve(trace_o);
        else cfg = resolve(validate_o);
    } catch (const ContractError& e) {
        std::cerr << "invalid configuration: " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }

    try {
        if (run->parsed()) return cmd_run(cfg);
        if (trace->parsed()) return cmd_trace(cfg);
        std::cout << dump_config(cfg);
        return 0;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
}
