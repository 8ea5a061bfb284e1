#include "rfseeker/localizer.hpp"

#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "rfseeker/csv.hpp"

namespace rfseek {

void Scenario::validate() const {
    roi.validate();
    channel.validate();
    mission.validate();
    if (!source.finite() || !roi.contains(source)) {
        throw ContractError("scenario.source: must lie inside the roi");
    }
    if (!roi.contains_footprint(mission.start)) {
        throw ContractError("mission.start: must lie inside the roi footprint");
    }
}

void LocalizerConfig::validate() const {
    pso.validate();
    lm.validate();
    confidence.validate();
    if (!(p0 > 0.0)) throw ContractError("fusion.p0: must be > 0");
    if (!(q >= 0.0)) throw ContractError("fusion.q: must be >= 0");
    if (window_legs < 1) throw ContractError("solver.window_legs: must be >= 1");
}

std::string_view termination_name(Termination t) noexcept {
    switch (t) {
        case Termination::max_iters: return "max_iters";
        case Termination::step_converged: return "step_converged";
        case Termination::reached_estimate: return "reached_estimate";
    }
    return "unknown";
}

Termination parse_termination(std::string_view name) {
    for (Termination t : {Termination::max_iters, Termination::step_converged,
                          Termination::reached_estimate}) {
        if (termination_name(t) == name) return t;
    }
    throw std::runtime_error("unknown termination reason '" + std::string(name) + "'");
}

std::size_t LocalizationTrace::total_samples() const noexcept {
    std::size_t n = 0;
    for (const auto& it : iterations) n += it.samples.size();
    return n;
}

namespace {

Position fold_footprint(Position p, const Roi& roi) {
    p.x = reflect_into(p.x, roi.x_min, roi.x_max);
    p.y = reflect_into(p.y, roi.y_min, roi.y_max);
    return p;
}

Position random_heading_step(const Position& from, double length, const Roi& roi,
                             RngStream& rng) {
    const double heading = 2.0 * std::numbers::pi * rng.uniform();
    const Position end{from.x + length * std::cos(heading), from.y + length * std::sin(heading),
                       from.z};
    return fold_footprint(end, roi);
}

}  // namespace

Position initial_leg(const Position& start, double leg_length, const Roi& roi, RngStream& rng) {
    if (!(leg_length > 0.0)) throw ContractError("initial_leg: leg length must be > 0");
    return random_heading_step(start, leg_length, roi, rng);
}

Position next_leg(const Position& current, const Position& fused_estimate, double leg_length,
                  const Roi& roi, RngStream& rng) {
    if (!(leg_length > 0.0)) throw ContractError("next_leg: leg length must be > 0");
    const double dx = fused_estimate.x - current.x;
    const double dy = fused_estimate.y - current.y;
    const double offset = std::hypot(dx, dy);
    if (offset < 1e-9) return random_heading_step(current, leg_length, roi, rng);
    if (offset <= leg_length) return {fused_estimate.x, fused_estimate.y, current.z};
    const double s = leg_length / offset;
    return fold_footprint({current.x + s * dx, current.y + s * dy, current.z}, roi);
}

std::vector<RssiSample> sample_leg(const Position& from, const Position& to, double spacing,
                                   const ChannelParams& channel, const Position& source,
                                   RngStream& rng) {
    if (!(spacing > 0.0)) throw ContractError("sample_leg: spacing must be > 0");
    const double length = distance(from, to);
    if (!(length > 0.0)) throw ContractError("sample_leg: leg has zero length");
    if (spacing > length * (1.0 + 1e-12)) {
        throw InsufficientDataError("sample_leg: spacing exceeds leg length");
    }
    const double steps = length / spacing;
    const double whole = std::round(steps);
    if (std::abs(steps - whole) > 1e-6) {
        throw ContractError("sample_leg: spacing must divide the leg length");
    }
    const auto segments = static_cast<std::size_t>(whole);
    std::vector<RssiSample> out;
    out.reserve(segments + 1);
    for (std::size_t k = 0; k <= segments; ++k) {
        const double t = static_cast<double>(k) / static_cast<double>(segments);
        const Position at = k == segments ? to : from + t * (to - from);
        out.push_back(synth_rssi(channel, source, at, rng));
    }
    return out;
}

std::optional<Termination> check_termination(const LocalizationTrace& trace,
                                             const MissionConfig& mission) {
    const auto& its = trace.iterations;
    if (its.empty()) throw ContractError("check_termination: no iterations recorded");
    const std::size_t i = its.size();
    if (i >= static_cast<std::size_t>(mission.max_iterations)) return Termination::max_iters;
    if (i >= 3) {
        const double step1 = distance(its[i - 1].fused, its[i - 2].fused);
        const double step2 = distance(its[i - 2].fused, its[i - 3].fused);
        if (step1 < mission.termination_epsilon && step2 < mission.termination_epsilon) {
            return Termination::step_converged;
        }
    }
    if (horizontal_distance(its.back().leg_end, its.back().fused) < mission.sample_spacing) {
        return Termination::reached_estimate;
    }
    return std::nullopt;
}

LocalizationTrace run_localization(const Scenario& scenario, const LocalizerConfig& cfg,
                                   RngStream& rng) {
    scenario.validate();
    cfg.validate();
    const ChannelParams& channel = scenario.channel;
    const MissionConfig& mission = scenario.mission;
    const double k = kappa(channel);
    ConfidenceConfig conf_cfg = cfg.confidence;
    if (conf_cfg.track_channel) conf_cfg.sigma = std::max(channel.sigma, conf_cfg.sigma);

    LocalizationTrace trace;
    trace.scenario_id = scenario.id;
    trace.source = scenario.source;

    // The UAV holds the altitude the channel model was fitted for.
    Position leg_start{mission.start.x, mission.start.y, channel.uav_altitude};
    Position leg_end = initial_leg(leg_start, mission.leg_length, scenario.roi, rng);
    FusionState state;

    for (int i = 1; i <= mission.max_iterations; ++i) {
        // Approach legs shorter than L keep at least two segments.
        const double length = distance(leg_start, leg_end);
        const double segments = std::max(2.0, std::round(length / mission.sample_spacing));
        std::vector<RssiSample> samples =
            sample_leg(leg_start, leg_end, length / segments, channel, scenario.source, rng);

        std::vector<RssiSample> pooled;
        const int first = std::max(0, static_cast<int>(trace.iterations.size()) - (cfg.window_legs - 1));
        for (std::size_t w = static_cast<std::size_t>(first); w < trace.iterations.size(); ++w) {
            const auto& prev = trace.iterations[w].samples;
            pooled.insert(pooled.end(), prev.begin(), prev.end());
        }
        pooled.insert(pooled.end(), samples.begin(), samples.end());
        const RatioObjective objective = RatioObjective::from_samples(pooled, k, channel.d_min);
        const SolverResult solved =
            pso_lm_localize(objective, scenario.roi, cfg.pso, cfg.lm, rng);

        const bool use_prior =
            i > 1 && conf_cfg.reference == ConfidenceReference::prior;
        const Position reference = use_prior ? state.mean : solved.estimate;
        const double raw_conf =
            segment_confidence(samples, reference, k, conf_cfg, channel.d_min);
        const double conf = std::clamp(raw_conf, conf_cfg.floor, 1.0);

        state = i == 1 ? kf_init(solved.estimate, conf, cfg.p0, cfg.q)
                       : kf_update(state, solved.estimate, conf);

        IterationRecord rec;
        rec.index = i;
        rec.leg_start = leg_start;
        rec.leg_end = leg_end;
        rec.samples = std::move(samples);
        rec.preliminary = solved.estimate;
        rec.confidence = conf;
        rec.fused = state.mean;
        rec.covariance_trace = state.covariance.trace();
        rec.error = distance(state.mean, scenario.source);
        rec.objective = solved.objective;
        rec.solver_converged = solved.converged;
        trace.iterations.push_back(std::move(rec));

        if (const auto done = check_termination(trace, mission)) {
            trace.terminated_by = *done;
            break;
        }
        leg_start = leg_end;
        leg_end = next_leg(leg_start, state.mean, mission.leg_length, scenario.roi, rng);
    }

    trace.final_estimate = trace.iterations.back().fused;
    trace.final_error = trace.iterations.back().error;
    return trace;
}

namespace {

constexpr std::string_view kIterationHeader =
    "iteration,leg_start_x,leg_start_y,leg_start_z,leg_end_x,leg_end_y,leg_end_z,"
    "preliminary_x,preliminary_y,preliminary_z,confidence,fused_x,fused_y,fused_z,"
    "covariance_trace,error_m,objective,solver_converged";
constexpr std::string_view kSampleHeader = "iteration,sample,x,y,z,rssi_dbm";

void put(std::ostringstream& os, const Position& p) {
    os << ',' << csv::format_double(p.x) << ',' << csv::format_double(p.y) << ','
       << csv::format_double(p.z);
}

Position get_position(const std::vector<std::string_view>& f, std::size_t at) {
    return {csv::parse_double(f.at(at)), csv::parse_double(f.at(at + 1)),
            csv::parse_double(f.at(at + 2))};
}

std::string_view meta_value(const std::string& line, std::string_view key) {
    const std::string prefix = "# " + std::string(key) + "=";
    if (line.rfind(prefix, 0) != 0) {
        throw std::runtime_error("trace: expected metadata line '" + prefix + "...'");
    }
    return std::string_view(line).substr(prefix.size());
}

}  // namespace

void write_trace(const LocalizationTrace& trace, const std::string& iterations_path,
                 const std::string& samples_path) {
    std::ostringstream it;
    it << "# scenario_id=" << trace.scenario_id << '\n';
    it << "# source=" << csv::format_double(trace.source.x) << ','
       << csv::format_double(trace.source.y) << ',' << csv::format_double(trace.source.z) << '\n';
    it << "# terminated_by=" << termination_name(trace.terminated_by) << '\n';
    it << kIterationHeader << '\n';
    std::ostringstream sm;
    sm << kSampleHeader << '\n';
    for (const auto& rec : trace.iterations) {
        it << rec.index;
        put(it, rec.leg_start);
        put(it, rec.leg_end);
        put(it, rec.preliminary);
        it << ',' << csv::format_double(rec.confidence);
        put(it, rec.fused);
        it << ',' << csv::format_double(rec.covariance_trace) << ','
           << csv::format_double(rec.error) << ',' << csv::format_double(rec.objective) << ','
           << (rec.solver_converged ? 1 : 0) << '\n';
        for (std::size_t s = 0; s < rec.samples.size(); ++s) {
            sm << rec.index << ',' << s;
            put(sm, rec.samples[s].position);
            sm << ',' << csv::format_double(rec.samples[s].rssi) << '\n';
        }
    }
    csv::write_file(iterations_path, it.str());
    csv::write_file(samples_path, sm.str());
}

LocalizationTrace read_trace(const std::string& iterations_path,
                             const std::string& samples_path) {
    const auto lines = csv::read_lines(iterations_path);
    if (lines.size() < 4 || lines[3] != kIterationHeader) {
        throw std::runtime_error("trace: malformed iterations file '" + iterations_path + "'");
    }
    LocalizationTrace trace;
    trace.scenario_id = std::string(meta_value(lines[0], "scenario_id"));
    const auto src = csv::split(meta_value(lines[1], "source"));
    trace.source = get_position(src, 0);
    trace.terminated_by = parse_termination(meta_value(lines[2], "terminated_by"));

    for (std::size_t l = 4; l < lines.size(); ++l) {
        if (lines[l].empty()) continue;
        const auto f = csv::split(lines[l]);
        if (f.size() != 18) throw std::runtime_error("trace: bad iteration row " + lines[l]);
        IterationRecord rec;
        rec.index = static_cast<int>(csv::parse_int(f[0]));
        rec.leg_start = get_position(f, 1);
        rec.leg_end = get_position(f, 4);
        rec.preliminary = get_position(f, 7);
        rec.confidence = csv::parse_double(f[10]);
        rec.fused = get_position(f, 11);
        rec.covariance_trace = csv::parse_double(f[14]);
        rec.error = csv::parse_double(f[15]);
        rec.objective = csv::parse_double(f[16]);
        rec.solver_converged = csv::parse_int(f[17]) != 0;
        trace.iterations.push_back(std::move(rec));
    }

    const auto sample_lines = csv::read_lines(samples_path);
    if (sample_lines.empty() || sample_lines[0] != kSampleHeader) {
        throw std::runtime_error("trace: malformed samples file '" + samples_path + "'");
    }
    for (std::size_t l = 1; l < sample_lines.size(); ++l) {
        if (sample_lines[l].empty()) continue;
        const auto f = csv::split(sample_lines[l]);
        if (f.size() != 6) throw std::runtime_error("trace: bad sample row " + sample_lines[l]);
        const auto index = csv::parse_int(f[0]);
        IterationRecord* owner = nullptr;
        for (auto& rec : trace.iterations) {
            if (rec.index == index) owner = &rec;
        }
        if (!owner) throw std::runtime_error("trace: sample for unknown iteration");
        owner->samples.push_back({get_position(f, 2), csv::parse_double(f[5])});
    }

    if (!trace.iterations.empty()) {
        trace.final_estimate = trace.iterations.back().fused;
        trace.final_error = trace.iterations.back().error;
    }
    return trace;
}

}  // namespace rfseek
