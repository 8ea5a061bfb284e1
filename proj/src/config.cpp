#include "rfseeker/config.hpp"

#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <yaml-cpp/yaml.h>

#include "rfseeker/csv.hpp"

namespace rfseek {

ConfigError::ConfigError(std::string key, int line, const std::string& what)
    : ContractError(what), key_(std::move(key)), line_(line) {}

namespace {

std::string_view mode_name(ConfidenceMode m) {
    return m == ConfidenceMode::symmetric ? "symmetric" : "verbatim";
}

std::string_view reference_name(ConfidenceReference r) {
    return r == ConfidenceReference::preliminary ? "preliminary" : "prior";
}

bool present(const YAML::Node& n) { return n.IsDefined() && !n.IsNull(); }

std::string join(const std::string& path, std::string_view key) {
    return path.empty() ? std::string(key) : path + "." + std::string(key);
}

class Parser {
public:
    explicit Parser(std::string origin) : origin_(std::move(origin)) {}

    [[noreturn]] void fail(const std::string& key, int line, const std::string& msg) const {
        std::ostringstream os;
        os << origin_;
        if (line > 0) os << ":" << line;
        os << ": " << key << ": " << msg;
        throw ConfigError(key, line, os.str());
    }

    static int line_of(const YAML::Node& n) { return n.Mark().line >= 0 ? n.Mark().line + 1 : 0; }

    /// Records the line of every key so later validation errors can point at it.
    void index(const YAML::Node& node, const std::string& path) {
        if (!node.IsMap()) return;
        for (const auto& kv : node) {
            const std::string key = join(path, kv.first.as<std::string>());
            lines_[key] = line_of(kv.first);
            index(kv.second, key);
        }
    }

    [[nodiscard]] int line_for(const std::string& key) const {
        // Longest recorded prefix of the dotted path.
        std::string k = key;
        while (!k.empty()) {
            if (auto it = lines_.find(k); it != lines_.end()) return it->second;
            const auto dot = k.rfind('.');
            if (dot == std::string::npos) break;
            k.resize(dot);
        }
        return 0;
    }

    /// Map section with a fixed set of allowed keys.
    class Section {
    public:
        Section(Parser& p, YAML::Node node, std::string path)
            : p_(p), node_(std::move(node)), path_(std::move(path)) {
            if (present(node_) && !node_.IsMap()) {
                p_.fail(path_, line_of(node_), "expected a mapping");
            }
        }

        [[nodiscard]] YAML::Node take(const char* key) {
            allowed_.insert(key);
            if (!present(node_)) return {};
            const YAML::Node& self = node_;
            return self[key];
        }

        [[nodiscard]] Section section(const char* key) {
            return Section(p_, take(key), join(path_, key));
        }

        template <typename T>
        void get(const char* key, T& out) {
            const YAML::Node n = take(key);
            if (!present(n)) return;
            out = p_.scalar<T>(n, join(path_, key));
        }

        void get(const char* key, Position& out) {
            const YAML::Node n = take(key);
            if (!present(n)) return;
            const std::string where = join(path_, key);
            if (!n.IsSequence() || n.size() != 3) {
                p_.fail(where, line_of(n), "expected a sequence [x, y, z]");
            }
            out = {p_.scalar<double>(n[0], where), p_.scalar<double>(n[1], where),
                   p_.scalar<double>(n[2], where)};
        }

        template <typename T>
        void get(const char* key, std::vector<T>& out) {
            const YAML::Node n = take(key);
            if (!present(n)) return;
            const std::string where = join(path_, key);
            if (!n.IsSequence()) p_.fail(where, line_of(n), "expected a sequence");
            std::vector<T> values;
            for (const auto& item : n) values.push_back(p_.scalar<T>(item, where));
            out = std::move(values);
        }

        /// Rejects keys nobody asked for.
        void finish() {
            if (!present(node_)) return;
            for (const auto& kv : node_) {
                const std::string key = kv.first.as<std::string>();
                if (!allowed_.contains(key)) {
                    p_.fail(join(path_, key), line_of(kv.first), "unknown key");
                }
            }
        }

    private:
        Parser& p_;
        YAML::Node node_;
        std::string path_;
        std::set<std::string> allowed_;
    };

    template <typename T>
    T scalar(const YAML::Node& n, const std::string& where) const {
        if (!n.IsScalar()) fail(where, line_of(n), "expected a scalar value");
        if constexpr (std::is_same_v<T, double>) {
            const std::string text = n.Scalar();
            // Accept the plain spelling as well as YAML's .inf.
            if (text == "inf" || text == "+inf") return std::numeric_limits<double>::infinity();
            if (text == "-inf") return -std::numeric_limits<double>::infinity();
        }
        try {
            return n.as<T>();
        } catch (const YAML::Exception&) {
            fail(where, line_of(n), "cannot convert '" + n.Scalar() + "'");
        }
    }

private:
    std::string origin_;
    std::map<std::string, int> lines_;
};

ConfidenceMode parse_mode(Parser& p, const std::string& text, const std::string& key, int line) {
    if (text == "symmetric") return ConfidenceMode::symmetric;
    if (text == "verbatim") return ConfidenceMode::verbatim;
    p.fail(key, line, "expected 'symmetric' or 'verbatim', got '" + text + "'");
}

ConfidenceReference parse_reference(Parser& p, const std::string& text, const std::string& key,
                                    int line) {
    if (text == "preliminary") return ConfidenceReference::preliminary;
    if (text == "prior") return ConfidenceReference::prior;
    p.fail(key, line, "expected 'preliminary' or 'prior', got '" + text + "'");
}

ExperimentConfig build(Parser& p, const YAML::Node& root) {
    ExperimentConfig cfg;
    Parser::Section top(p, root, "");

    {
        auto s = top.section("scenario");
        s.get("id", cfg.scenario.id);
        std::string mode(source_mode_name(cfg.source_mode));
        const YAML::Node mode_node = s.take("source_mode");
        if (present(mode_node)) {
            mode = p.scalar<std::string>(mode_node, "scenario.source_mode");
            if (mode == "random") {
                cfg.source_mode = SourceMode::random;
            } else if (mode == "fixed") {
                cfg.source_mode = SourceMode::fixed;
            } else {
                p.fail("scenario.source_mode", Parser::line_of(mode_node),
                       "expected 'random' or 'fixed', got '" + mode + "'");
            }
        }
        s.get("source", cfg.scenario.source);
        s.finish();
    }
    {
        auto s = top.section("roi");
        Roi& r = cfg.scenario.roi;
        s.get("x_min", r.x_min);
        s.get("x_max", r.x_max);
        s.get("y_min", r.y_min);
        s.get("y_max", r.y_max);
        s.get("z_min", r.z_min);
        s.get("z_max", r.z_max);
        s.finish();
    }
    {
        auto s = top.section("channel");
        ChannelParams& c = cfg.scenario.channel;
        s.get("carrier_ghz", c.carrier_ghz);
        s.get("a", c.a);
        s.get("b", c.b);
        s.get("uav_altitude", c.uav_altitude);
        s.get("tx_power_offset", c.tx_power_offset);
        s.get("d_min", c.d_min);
        s.finish();
    }
    {
        auto s = top.section("mission");
        MissionConfig& m = cfg.scenario.mission;
        s.get("start", m.start);
        s.get("leg_length", m.leg_length);
        s.get("sample_spacing", m.sample_spacing);
        s.get("max_iterations", m.max_iterations);
        s.get("termination_epsilon", m.termination_epsilon);
        s.finish();
    }
    {
        auto s = top.section("pso");
        PsoConfig& c = cfg.localizer.pso;
        s.get("swarm_size", c.swarm_size);
        s.get("inertia", c.inertia);
        s.get("c1", c.c1);
        s.get("c2", c.c2);
        s.get("max_iters", c.max_iters);
        s.get("velocity_clamp", c.velocity_clamp);
        s.get("convergence_tol", c.convergence_tol);
        s.get("stall_iters", c.stall_iters);
        s.finish();
    }
    {
        auto s = top.section("lm");
        LmConfig& c = cfg.localizer.lm;
        s.get("lambda_init", c.lambda_init);
        s.get("lambda_up", c.lambda_up);
        s.get("lambda_down", c.lambda_down);
        s.get("step_tol", c.step_tol);
        s.get("max_iters", c.max_iters);
        s.finish();
    }
    {
        auto s = top.section("solver");
        s.get("window_legs", cfg.localizer.window_legs);
        s.finish();
    }
    {
        auto s = top.section("confidence");
        ConfidenceConfig& c = cfg.localizer.confidence;
        if (const YAML::Node n = s.take("mode"); present(n)) {
            c.mode = parse_mode(p, p.scalar<std::string>(n, "confidence.mode"), "confidence.mode",
                                Parser::line_of(n));
        }
        if (const YAML::Node n = s.take("reference"); present(n)) {
            c.reference = parse_reference(p, p.scalar<std::string>(n, "confidence.reference"),
                                          "confidence.reference", Parser::line_of(n));
        }
        s.get("sigma", c.sigma);
        s.get("track_channel", c.track_channel);
        s.get("floor", c.floor);
        s.finish();
    }
    {
        auto s = top.section("fusion");
        s.get("p0", cfg.localizer.p0);
        s.get("q", cfg.localizer.q);
        s.finish();
    }
    {
        auto s = top.section("baselines");
        s.get("trilateration_max_triples", cfg.trilateration.max_triples);
        s.get("centroid_iterations", cfg.centroid.iterations);
        s.finish();
    }
    {
        auto s = top.section("experiment");
        s.get("methods", cfg.methods);
        s.get("snr_sweep", cfg.snr_sweep);
        s.get("sigma_ref", cfg.sigma_ref);
        s.get("iteration_caps", cfg.iteration_caps);
        s.get("trials", cfg.trials);
        s.get("master_seed", cfg.master_seed);
        s.get("output_dir", cfg.output_dir);
        s.get("threads", cfg.threads);
        s.finish();
    }
    top.finish();
    return cfg;
}

}  // namespace

ExperimentConfig parse_config(std::string_view yaml, std::string_view origin) {
    Parser p{std::string(origin)};
    YAML::Node root;
    try {
        root = YAML::Load(std::string(yaml));
    } catch (const YAML::Exception& e) {
        p.fail("<document>", e.mark.line >= 0 ? e.mark.line + 1 : 0, e.msg);
    }
    if (present(root) && !root.IsMap()) p.fail("<document>", 1, "expected a mapping");
    p.index(root, "");
    ExperimentConfig cfg = build(p, root);
    try {
        cfg.validate();
    } catch (const ContractError& e) {
        const std::string what = e.what();
        const auto colon = what.find(':');
        const std::string key = colon == std::string::npos ? std::string() : what.substr(0, colon);
        const std::string msg = colon == std::string::npos ? what : what.substr(colon + 2);
        p.fail(key, p.line_for(key), msg);
    }
    return cfg;
}

ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open config '" + path + "'");
    std::ostringstream text;
    text << in.rdbuf();
    return parse_config(text.str(), path);
}

namespace {

std::string num(double v) {
    if (std::isinf(v)) return v > 0 ? ".inf" : "-.inf";
    return csv::format_double(v);
}

void position(YAML::Emitter& out, const Position& p) {
    out << YAML::Flow << YAML::BeginSeq << num(p.x) << num(p.y) << num(p.z) << YAML::EndSeq;
}

}  // namespace

std::string dump_config(const ExperimentConfig& cfg) {
    YAML::Emitter out;
    out << YAML::BeginMap;

    out << YAML::Key << "scenario" << YAML::Value << YAML::BeginMap;
    out << YAML::Key << "id" << YAML::Value << YAML::DoubleQuoted << cfg.scenario.id;
    out << YAML::Key << "source_mode" << YAML::Value << std::string(source_mode_name(cfg.source_mode));
    out << YAML::Key << "source" << YAML::Value;
    position(out, cfg.scenario.source);
    out << YAML::EndMap;

    const Roi& r = cfg.scenario.roi;
    out << YAML::Key << "roi" << YAML::Value << YAML::BeginMap;
    out << YAML::Key << "x_min" << YAML::Value << num(r.x_min);
    out << YAML::Key << "x_max" << YAML::Value << num(r.x_max);
    out << YAML::Key << "y_min" << YAML::Value << num(r.y_min);
    out << YAML::Key << "y_max" << YAML::Value << num(r.y_max);
    out << YAML::Key << "z_min" << YAML::Value << num(r.z_min);
    out << YAML::Key << "z_max" << YAML::Value << num(r.z_max);
    out << YAML::EndMap;

    const ChannelParams& c = cfg.scenario.channel;
    out << YAML::Key << "channel" << YAML::Value << YAML::BeginMap;
    out << YAML::Key << "carrier_ghz" << YAML::Value << num(c.carrier_ghz);
    out << YAML::Key << "a" << YAML::Value << num(c.a);
    out << YAML::Key << "b" << YAML::Value << num(c.b);
    out << YAML::Key << "uav_altitude" << YAML::Value << num(c.uav_altitude);
    out << YAML::Key << "tx_power_offset" << YAML::Value << num(c.tx_power_offset);
    out << YAML::Key << "d_min" << YAML::Value << num(c.d_min);
    out << YAML::EndMap;

    const MissionConfig& m = cfg.scenario.mission;
    out << YAML::Key << "mission" << YAML::Value << YAML::BeginMap;
    out << YAML::Key << "start" << YAML::Value;
    position(out, m.start);
    out << YAML::Key << "leg_length" << YAML::Value << num(m.leg_length);
    out << YAML::Key << "sample_spacing" << YAML::Value << num(m.sample_spacing);
    out << YAML::Key << "max_iterations" << YAML::Value << m.max_iterations;
    out << YAML::Key << "termination_epsilon" << YAML::Value << num(m.termination_epsilon);
    out << YAML::EndMap;

    const PsoConfig& pso = cfg.localizer.pso;
    out << YAML::Key << "pso" << YAML::Value << YAML::BeginMap;
    out << YAML::Key << "swarm_size" << YAML::Value << pso.swarm_size;
    out << YAML::Key << "inertia" << YAML::Value << num(pso.inertia);
    out << YAML::Key << "c1" << YAML::Value << num(pso.c1);
    out << YAML::Key << "c2" << YAML::Value << num(pso.c2);
    out << YAML::Key << "max_iters" << YAML::Value << pso.max_iters;
    out << YAML::Key << "velocity_clamp" << YAML::Value << num(pso.velocity_clamp);
    out << YAML::Key << "convergence_tol" << YAML::Value << num(pso.convergence_tol);
    out << YAML::Key << "stall_iters" << YAML::Value << pso.stall_iters;
    out << YAML::EndMap;

    const LmConfig& lm = cfg.localizer.lm;
    out << YAML::Key << "lm" << YAML::Value << YAML::BeginMap;
    out << YAML::Key << "lambda_init" << YAML::Value << num(lm.lambda_init);
    out << YAML::Key << "lambda_up" << YAML::Value << num(lm.lambda_up);
    out << YAML::Key << "lambda_down" << YAML::Value << num(lm.lambda_down);
    out << YAML::Key << "step_tol" << YAML::Value << num(lm.step_tol);
    out << YAML::Key << "max_iters" << YAML::Value << lm.max_iters;
    out << YAML::EndMap;

    out << YAML::Key << "solver" << YAML::Value << YAML::BeginMap;
    out << YAML::Key << "window_legs" << YAML::Value << cfg.localizer.window_legs;
    out << YAML::EndMap;

    const ConfidenceConfig& conf = cfg.localizer.confidence;
    out << YAML::Key << "confidence" << YAML::Value << YAML::BeginMap;
    out << YAML::Key << "mode" << YAML::Value << std::string(mode_name(conf.mode));
    out << YAML::Key << "reference" << YAML::Value << std::string(reference_name(conf.reference));
    out << YAML::Key << "sigma" << YAML::Value << num(conf.sigma);
    out << YAML::Key << "track_channel" << YAML::Value << conf.track_channel;
    out << YAML::Key << "floor" << YAML::Value << num(conf.floor);
    out << YAML::EndMap;

    out << YAML::Key << "fusion" << YAML::Value << YAML::BeginMap;
    out << YAML::Key << "p0" << YAML::Value << num(cfg.localizer.p0);
    out << YAML::Key << "q" << YAML::Value << num(cfg.localizer.q);
    out << YAML::EndMap;

    out << YAML::Key << "baselines" << YAML::Value << YAML::BeginMap;
    out << YAML::Key << "trilateration_max_triples" << YAML::Value << cfg.trilateration.max_triples;
    out << YAML::Key << "centroid_iterations" << YAML::Value << cfg.centroid.iterations;
    out << YAML::EndMap;

    out << YAML::Key << "experiment" << YAML::Value << YAML::BeginMap;
    out << YAML::Key << "methods" << YAML::Value << YAML::Flow << cfg.methods;
    out << YAML::Key << "snr_sweep" << YAML::Value << YAML::Flow << YAML::BeginSeq;
    for (double v : cfg.snr_sweep) out << num(v);
    out << YAML::EndSeq;
    out << YAML::Key << "sigma_ref" << YAML::Value << num(cfg.sigma_ref);
    out << YAML::Key << "iteration_caps" << YAML::Value << YAML::Flow << cfg.iteration_caps;
    out << YAML::Key << "trials" << YAML::Value << cfg.trials;
    out << YAML::Key << "master_seed" << YAML::Value << cfg.master_seed;
    out << YAML::Key << "output_dir" << YAML::Value << YAML::DoubleQuoted << cfg.output_dir;
    out << YAML::Key << "threads" << YAML::Value << cfg.threads;
    out << YAML::EndMap;

    out << YAML::EndMap;
    return std::string(out.c_str()) + "\n";
}

}  // namespace rfseek
