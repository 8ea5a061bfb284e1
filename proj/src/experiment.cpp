#include "rfseeker/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <filesystem>
#include <map>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

#include "rfseeker/csv.hpp"

namespace rfseek {

std::string_view source_mode_name(SourceMode m) noexcept {
    return m == SourceMode::random ? "random" : "fixed";
}

void ExperimentConfig::validate() const {
    scenario.validate();
    localizer.validate();
    trilateration.validate();
    centroid.validate();
    if (methods.empty()) throw ContractError("experiment.methods: must not be empty");
    std::set<std::string> seen;
    for (const auto& m : methods) {
        if (m != kProgressive && !parse_baseline(m)) {
            throw ContractError("experiment.methods: unknown method '" + m + "'");
        }
        if (!seen.insert(m).second) {
            throw ContractError("experiment.methods: duplicate method '" + m + "'");
        }
    }
    if (!seen.contains(std::string(kProgressive))) {
        throw ContractError("experiment.methods: must include 'progressive'");
    }
    if (snr_sweep.empty()) throw ContractError("experiment.snr_sweep: must not be empty");
    for (double snr : snr_sweep) {
        if (std::isnan(snr) || snr == -std::numeric_limits<double>::infinity()) {
            throw ContractError("experiment.snr_sweep: values must be numbers or +inf");
        }
    }
    if (!(sigma_ref >= 0.0) || !std::isfinite(sigma_ref)) {
        throw ContractError("experiment.sigma_ref: must be finite and >= 0");
    }
    if (iteration_caps.empty()) throw ContractError("experiment.iteration_caps: must not be empty");
    for (int cap : iteration_caps) {
        if (cap < 1 || cap > scenario.mission.max_iterations) {
            throw ContractError("experiment.iteration_caps: each cap must lie in [1, "
                                "mission.max_iterations]");
        }
    }
    if (trials < 1) throw ContractError("experiment.trials: must be >= 1");
    if (threads < 0) throw ContractError("experiment.threads: must be >= 0");
    if (output_dir.empty()) throw ContractError("experiment.output_dir: must not be empty");
}

Position trial_source(const ExperimentConfig& cfg, int trial) {
    if (cfg.source_mode == SourceMode::fixed) return cfg.scenario.source;
    const Roi& roi = cfg.scenario.roi;
    RngStream rng = RngStream::derive(
        cfg.master_seed, {string_key("source"), static_cast<std::uint64_t>(trial)});
    const double x = rng.uniform(roi.x_min, roi.x_max);
    const double y = rng.uniform(roi.y_min, roi.y_max);
    return {x, y, roi.z_min};
}

RngStream cell_stream(std::uint64_t master_seed, std::size_t snr_index, std::string_view method,
                      int trial, std::uint64_t sub) {
    return RngStream::derive(master_seed, {static_cast<std::uint64_t>(snr_index),
                                           string_key(method),
                                           static_cast<std::uint64_t>(trial), sub});
}

std::size_t samples_through(const LocalizationTrace& trace, int iterations) {
    std::size_t n = 0;
    const std::size_t legs = std::min<std::size_t>(trace.iterations.size(),
                                                   static_cast<std::size_t>(std::max(0, iterations)));
    for (std::size_t i = 0; i < legs; ++i) n += trace.iterations[i].samples.size();
    return n;
}

std::vector<RssiSample> baseline_samples(const LocalizationTrace& progressive, std::size_t count,
                                         const Scenario& scenario, RngStream& rng) {
    if (progressive.iterations.empty()) {
        throw ContractError("baseline_samples: progressive trace has no iterations");
    }
    const IterationRecord& first = progressive.iterations.front();
    const auto path = continuation_path(first.leg_start, first.leg_end,
                                        scenario.mission.sample_spacing, count, scenario.roi);
    std::vector<RssiSample> out;
    out.reserve(path.size());
    for (const Position& p : path) out.push_back(synth_rssi(scenario.channel, scenario.source, p, rng));
    return out;
}

Position run_baseline(BaselineMethod method, std::span<const RssiSample> samples,
                      const ExperimentConfig& cfg, const ChannelParams& channel, RngStream& rng) {
    const Roi& roi = cfg.scenario.roi;
    switch (method) {
        case BaselineMethod::single_shot_pso_lm:
            return single_shot_pso_lm(samples, channel, roi, cfg.localizer.pso, cfg.localizer.lm,
                                      rng);
        case BaselineMethod::trilateration:
            return trilateration(samples, kappa(channel), roi, rng, cfg.trilateration);
        case BaselineMethod::weighted_centroid:
            return weighted_centroid(samples, kappa(channel), cfg.centroid.iterations, roi,
                                     channel.d_min);
    }
    throw ContractError("run_baseline: unknown method");
}

std::vector<RmseRow> aggregate(const std::vector<RawRow>& raw) {
    struct Cell {
        RmseRow row;
        std::vector<double> errors;
    };
    std::vector<Cell> cells;
    std::map<std::tuple<std::string, std::string, int>, std::size_t> index;
    for (const RawRow& r : raw) {
        // Keyed on the formatted SNR so inf and finite values compare sanely.
        const auto key = std::make_tuple(r.method, csv::format_double(r.snr_db), r.iteration);
        auto it = index.find(key);
        if (it == index.end()) {
            it = index.emplace(key, cells.size()).first;
            cells.push_back({{r.method, r.snr_db, r.iteration, 0.0, 0}, {}});
        }
        cells[it->second].errors.push_back(r.error_m);
    }
    std::vector<RmseRow> out;
    out.reserve(cells.size());
    for (auto& c : cells) {
        c.row.rmse_m = rmse(c.errors);
        c.row.trials = static_cast<int>(c.errors.size());
        out.push_back(c.row);
    }
    return out;
}

namespace {

struct TrialResult {
    // Per method (config order): rows in iteration order.
    std::vector<std::vector<RawRow>> rows;
    std::vector<std::string> failures;
    std::optional<LocalizationTrace> trace;
};

std::string failure_text(std::string_view method, double snr, int trial, const std::exception& e) {
    std::ostringstream os;
    os << method << " snr=" << csv::format_double(snr) << " trial=" << trial << ": " << e.what();
    return os.str();
}

TrialResult run_trial(const ExperimentConfig& cfg, std::size_t snr_index, int trial) {
    const double snr = cfg.snr_sweep[snr_index];
    Scenario scenario = cfg.scenario;
    scenario.channel.sigma = sigma_for_snr(snr, cfg.sigma_ref);
    scenario.source = trial_source(cfg, trial);
    const int max_it = scenario.mission.max_iterations;

    TrialResult res;
    res.rows.resize(cfg.methods.size());

    std::optional<LocalizationTrace> trace;
    try {
        RngStream rng = cell_stream(cfg.master_seed, snr_index, kProgressive, trial);
        trace = run_localization(scenario, cfg.localizer, rng);
    } catch (const std::exception& e) {
        res.failures.push_back(failure_text(kProgressive, snr, trial, e));
    }

    for (std::size_t m = 0; m < cfg.methods.size(); ++m) {
        const std::string& name = cfg.methods[m];
        if (!trace) {
            if (name != kProgressive) {
                res.failures.push_back(name + " snr=" + csv::format_double(snr) + " trial=" +
                                       std::to_string(trial) + ": no progressive run to match");
            }
            continue;
        }
        if (name == kProgressive) {
            // A run that stopped early keeps its final estimate.
            for (int it = 1; it <= max_it; ++it) {
                const std::size_t k =
                    std::min<std::size_t>(static_cast<std::size_t>(it), trace->iterations.size()) - 1;
                res.rows[m].push_back({name, snr, it, trial, trace->iterations[k].error});
            }
            continue;
        }
        const BaselineMethod method = *parse_baseline(name);
        for (int cap : cfg.iteration_caps) {
            try {
                RngStream rng = cell_stream(cfg.master_seed, snr_index, name, trial,
                                            static_cast<std::uint64_t>(cap));
                const auto samples =
                    baseline_samples(*trace, samples_through(*trace, cap), scenario, rng);
                const Position est = run_baseline(method, samples, cfg, scenario.channel, rng);
                res.rows[m].push_back({name, snr, cap, trial, distance(est, scenario.source)});
            } catch (const std::exception& e) {
                res.failures.push_back(failure_text(name, snr, trial, e) +
                                       " (cap " + std::to_string(cap) + ")");
            }
        }
    }
    res.trace = std::move(trace);
    return res;
}

}  // namespace

ExperimentReport run_experiment(const ExperimentConfig& cfg) {
    cfg.validate();
    const std::size_t n_snr = cfg.snr_sweep.size();
    const std::size_t n_trials = static_cast<std::size_t>(cfg.trials);
    const std::size_t n_items = n_snr * n_trials;

    const std::size_t trajectory_item = (n_snr - 1) * n_trials;
    std::vector<TrialResult> results(n_items);
    std::atomic<std::size_t> next{0};
    std::exception_ptr fatal;
    std::mutex fatal_mutex;

    auto worker = [&] {
        while (true) {
            const std::size_t item = next.fetch_add(1);
            if (item >= n_items) return;
            try {
                results[item] = run_trial(cfg, item / n_trials, static_cast<int>(item % n_trials));
                if (item != trajectory_item) results[item].trace.reset();
            } catch (...) {
                std::lock_guard lock(fatal_mutex);
                if (!fatal) fatal = std::current_exception();
            }
        }
    };

    unsigned n_threads = cfg.threads > 0 ? static_cast<unsigned>(cfg.threads)
                                         : std::max(1u, std::thread::hardware_concurrency());
    n_threads = std::min<unsigned>(n_threads, static_cast<unsigned>(n_items));
    std::vector<std::jthread> pool;
    for (unsigned t = 1; t < n_threads; ++t) pool.emplace_back(worker);
    worker();
    pool.clear();
    if (fatal) std::rethrow_exception(fatal);

    // Assemble in a fixed order so thread scheduling cannot show in the output.
    ExperimentReport report;
    for (std::size_t m = 0; m < cfg.methods.size(); ++m) {
        for (std::size_t s = 0; s < n_snr; ++s) {
            std::map<int, std::vector<RawRow>> by_iteration;
            for (std::size_t t = 0; t < n_trials; ++t) {
                for (const RawRow& r : results[s * n_trials + t].rows[m]) {
                    by_iteration[r.iteration].push_back(r);
                }
            }
            for (auto& [it, rows] : by_iteration) {
                report.raw.insert(report.raw.end(), rows.begin(), rows.end());
            }
        }
    }
    for (const auto& r : results) {
        report.failures.insert(report.failures.end(), r.failures.begin(), r.failures.end());
    }
    report.trajectory = results[trajectory_item].trace;
    report.rmse = aggregate(report.raw);
    return report;
}

namespace {

constexpr std::string_view kRawHeader = "method,snr_db,iteration,trial,error_m";
constexpr std::string_view kRmseHeader = "method,snr_db,iteration,rmse_m,trials";

void check_header(const std::vector<std::string>& lines, std::string_view header,
                  const std::string& path) {
    if (lines.empty() || lines.front() != header) {
        throw std::runtime_error("'" + path + "': expected header '" + std::string(header) + "'");
    }
}

std::vector<std::string_view> fields(const std::string& line, std::size_t n,
                                     const std::string& path, std::size_t lineno) {
    auto f = csv::split(line);
    if (f.size() != n) {
        throw std::runtime_error("'" + path + "' line " + std::to_string(lineno) + ": expected " +
                                 std::to_string(n) + " fields");
    }
    return f;
}

}  // namespace

void emit_csv(const ExperimentReport& report, const std::string& dir) {
    std::filesystem::create_directories(dir);
    std::ostringstream raw;
    raw << kRawHeader << '\n';
    for (const RawRow& r : report.raw) {
        raw << r.method << ',' << csv::format_double(r.snr_db) << ',' << r.iteration << ','
            << r.trial << ',' << csv::format_double(r.error_m) << '\n';
    }
    std::ostringstream agg;
    agg << kRmseHeader << '\n';
    for (const RmseRow& r : report.rmse) {
        agg << r.method << ',' << csv::format_double(r.snr_db) << ',' << r.iteration << ','
            << csv::format_double(r.rmse_m) << ',' << r.trials << '\n';
    }
    const std::filesystem::path base(dir);
    csv::write_file((base / "raw.csv").string(), raw.str());
    csv::write_file((base / "rmse.csv").string(), agg.str());
}

ExperimentReport read_csv(const std::string& dir) {
    const std::filesystem::path base(dir);
    const std::string raw_path = (base / "raw.csv").string();
    const std::string rmse_path = (base / "rmse.csv").string();
    ExperimentReport report;

    const auto raw_lines = csv::read_lines(raw_path);
    check_header(raw_lines, kRawHeader, raw_path);
    for (std::size_t i = 1; i < raw_lines.size(); ++i) {
        if (raw_lines[i].empty()) continue;
        const auto f = fields(raw_lines[i], 5, raw_path, i + 1);
        report.raw.push_back({std::string(f[0]), csv::parse_double(f[1]),
                              static_cast<int>(csv::parse_int(f[2])),
                              static_cast<int>(csv::parse_int(f[3])), csv::parse_double(f[4])});
    }
    const auto rmse_lines = csv::read_lines(rmse_path);
    check_header(rmse_lines, kRmseHeader, rmse_path);
    for (std::size_t i = 1; i < rmse_lines.size(); ++i) {
        if (rmse_lines[i].empty()) continue;
        const auto f = fields(rmse_lines[i], 5, rmse_path, i + 1);
        report.rmse.push_back({std::string(f[0]), csv::parse_double(f[1]),
                               static_cast<int>(csv::parse_int(f[2])), csv::parse_double(f[3]),
                               static_cast<int>(csv::parse_int(f[4]))});
    }
    return report;
}

void emit_trajectory(const LocalizationTrace& trace, const std::string& path) {
    std::ostringstream os;
    os << "iteration,waypoint_x,waypoint_y,waypoint_z,estimate_x,estimate_y,estimate_z,error_m\n";
    for (const IterationRecord& rec : trace.iterations) {
        os << rec.index << ',' << csv::format_double(rec.leg_end.x) << ','
           << csv::format_double(rec.leg_end.y) << ',' << csv::format_double(rec.leg_end.z) << ','
           << csv::format_double(rec.fused.x) << ',' << csv::format_double(rec.fused.y) << ','
           << csv::format_double(rec.fused.z) << ',' << csv::format_double(rec.error) << '\n';
    }
    const std::filesystem::path p(path);
    if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
    csv::write_file(path, os.str());
}

}  // namespace rfseek
