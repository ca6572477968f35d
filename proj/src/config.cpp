#include "subkam/config.hpp"

#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "subkam/resonance.hpp"

namespace subkam {

using nlohmann::json;

std::string to_string(Command c)
{
    switch (c) {
    case Command::Reduce: return "reduce";
    case Command::Measure: return "measure";
    case Command::Verify: return "verify";
    case Command::Sweep: return "sweep";
    }
    return "?";
}

Command command_from_string(const std::string& s)
{
    if (s == "reduce") return Command::Reduce;
    if (s == "measure") return Command::Measure;
    if (s == "verify") return Command::Verify;
    if (s == "sweep") return Command::Sweep;
    throw ParameterError("unknown command '" + s + "' (expected reduce, measure, verify or sweep)");
}

std::string RunConfig::resolve(const std::string& path) const
{
    if (path.empty()) return path;
    const std::filesystem::path p(path);
    if (p.is_absolute()) return path;
    return (std::filesystem::path(base_dir) / p).lexically_normal().string();
}

namespace {

std::string join(const std::vector<std::string>& v)
{
    std::string out;
    for (const auto& s : v) out += (out.empty() ? "" : "; ") + s;
    return out;
}

// Reads one JSON object, recording wrong types and unknown keys under a dotted path.
class Block {
public:
    Block(const json* obj, std::string path, std::vector<std::string>& errors)
        : obj_(obj), path_(std::move(path)), errors_(errors)
    {
        if (obj_ && !obj_->is_object()) {
            errors_.push_back(path_ + ": expected an object");
            obj_ = nullptr;
        }
    }

    template <class T>
    void get(const std::string& key, T& out)
    {
        known_.insert(key);
        if (!obj_ || !obj_->contains(key)) return;
        const json& v = obj_->at(key);
        if (!matches<T>(v)) {
            errors_.push_back(name(key) + ": expected " + type_name<T>());
            return;
        }
        try {
            out = v.get<T>();
        } catch (const json::exception& e) {
            errors_.push_back(name(key) + ": " + e.what());
        }
    }

    Block child(const std::string& key)
    {
        known_.insert(key);
        const json* c = obj_ && obj_->contains(key) ? &obj_->at(key) : nullptr;
        return Block(c, name(key), errors_);
    }

    void finish() const
    {
        if (!obj_) return;
        for (const auto& [k, v] : obj_->items())
            if (!known_.count(k)) errors_.push_back(name(k) + ": unknown key");
    }

private:
    std::string name(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

    template <class T>
    static bool matches(const json& v)
    {
        if constexpr (std::is_same_v<T, bool>) return v.is_boolean();
        else if constexpr (std::is_same_v<T, std::string>) return v.is_string();
        else if constexpr (std::is_integral_v<T> && std::is_unsigned_v<T>) return v.is_number_unsigned();
        else if constexpr (std::is_integral_v<T>) return v.is_number_integer();
        else if constexpr (std::is_floating_point_v<T>) return v.is_number();
        else {
            if (!v.is_array()) return false;
            for (const auto& e : v)
                if (!matches<typename T::value_type>(e)) return false;
            return true;
        }
    }

    template <class T>
    static std::string type_name()
    {
        if constexpr (std::is_same_v<T, bool>) return "a boolean";
        else if constexpr (std::is_same_v<T, std::string>) return "a string";
        else if constexpr (std::is_integral_v<T> && std::is_unsigned_v<T>) return "a nonnegative integer";
        else if constexpr (std::is_integral_v<T>) return "an integer";
        else if constexpr (std::is_floating_point_v<T>) return "a number";
        else return "an array of " + type_name<typename T::value_type>().substr(2);
    }

    const json* obj_;
    std::string path_;
    std::vector<std::string>& errors_;
    std::set<std::string> known_;
};

void line_column(const std::string& text, std::size_t byte, int& line, int& column)
{
    line = 1;
    column = 1;
    for (std::size_t i = 0; i + 1 < byte && i < text.size(); ++i) {
        if (text[i] == '\n') {
            ++line;
            column = 1;
        } else {
            ++column;
        }
    }
}

} // namespace

ConfigError::ConfigError(std::vector<std::string> v) : ParameterError("invalid configuration: " + join(v)), violations(std::move(v)) {}

std::vector<std::string> config_violations(const RunConfig& cfg)
{
    std::vector<std::string> out = cfg.kam.violations();
    auto need = [&](bool ok, const std::string& msg) {
        if (!ok) out.push_back(msg);
    };
    const ProblemConfig& pr = cfg.problem;
    need(pr.eps >= 0.0, "problem.eps must be nonnegative");
    need(pr.potential.empty() ? pr.synthetic == "cos" : true, "problem.synthetic must be \"cos\"");
    const ParamsConfig& pa = cfg.params;
    need(pa.lo.size() == pa.hi.size(), "params.lo and params.hi must have the same length");
    need(static_cast<int>(pa.lo.size()) == pr.d, "params box dimension must equal problem.d");
    for (std::size_t i = 0; i < std::min(pa.lo.size(), pa.hi.size()); ++i)
        need(pa.lo[i] <= pa.hi[i], "params.lo must not exceed params.hi");
    need(pa.samples >= 1, "params.samples must be at least 1");
    need(pa.sampling == "halton" || pa.sampling == "grid", "params.sampling must be \"halton\" or \"grid\"");
    const MeasureConfig& me = cfg.measure;
    need(!me.gammas.empty(), "measure.gammas must not be empty");
    for (double g : me.gammas) need(g > 0.0, "measure.gammas entries must be positive");
    need(!me.K.empty(), "measure.K must not be empty");
    for (int k : me.K) need(k >= 1, "measure.K entries must be at least 1");
    for (const auto& f : me.families) {
        try {
            resonance_family_from_string(f);
        } catch (const Error&) {
            out.push_back("measure.families: unknown family '" + f + "'");
        }
    }
    need(me.cross_check_fraction >= 0.0 && me.cross_check_fraction <= 1.0,
         "measure.cross_check_fraction must lie in [0, 1]");
    need(me.r0_box.empty() || (me.r0_box.size() == 2 && me.r0_box[0] < me.r0_box[1]),
         "measure.r0_box must be empty or [lo, hi] with lo < hi");
    const VerifyConfig& ve = cfg.verify;
    need(ve.horizon > 0.0 && ve.dt > 0.0 && ve.record_interval > 0.0, "verify horizon, dt and record_interval must be positive");
    need(ve.rho > 0.0 && ve.p > 0.0, "verify.rho and verify.p must be positive");
    need(ve.phi0.empty() || static_cast<int>(ve.phi0.size()) == pr.d, "verify.phi0 must be empty or of length problem.d");
    need(ve.points >= 1, "verify.points must be at least 1");
    const SweepConfig& sw = cfg.sweep;
    need(sw.cutoffs.size() >= 2, "sweep.cutoffs needs at least two entries");
    for (int n : sw.cutoffs) need(n >= 1, "sweep.cutoffs entries must be at least 1");
    need(!sw.betas.empty(), "sweep.betas must not be empty");
    for (double b : sw.betas) need(b > 0.0, "sweep.betas entries must be positive");
    need(sw.K >= 1, "sweep.K must be at least 1");
    need(sw.seeds >= 1, "sweep.seeds must be at least 1");
    return out;
}

RunConfig parse_config(const std::string& text, const std::string& base_dir)
{
    json root;
    try {
        root = json::parse(text);
    } catch (const json::parse_error& e) {
        int line = 0, column = 0;
        line_column(text, e.byte, line, column);
        std::ostringstream os;
        os << "syntax error at line " << line << ", column " << column << ": " << e.what();
        throw ConfigError({os.str()});
    }
    std::vector<std::string> errors;
    RunConfig cfg;
    cfg.base_dir = base_dir;
    Block top(&root, "", errors);

    std::string command = to_string(cfg.command);
    top.get("command", command);
    try {
        cfg.command = command_from_string(command);
    } catch (const Error& e) {
        errors.push_back(std::string("command: ") + e.what());
    }

    ProblemConfig& pr = cfg.problem;
    {
        Block b = top.child("problem");
        b.get("potential", pr.potential);
        b.get("synthetic", pr.synthetic);
        b.get("alpha", pr.alpha);
        b.get("beta", pr.beta);
        b.get("lambda", pr.lambda);
        b.get("eps", pr.eps);
        b.get("d", pr.d);
        b.get("N", pr.N);
        b.finish();
    }

    KamParams& k = cfg.kam;
    {
        Block b = top.child("kam");
        b.get("gamma", k.gamma);
        std::string profile = to_string(k.profile);
        b.get("profile", profile);
        try {
            k.profile = tau_profile_from_string(profile);
        } catch (const Error& e) {
            errors.push_back(std::string("kam.profile: ") + e.what());
        }
        b.get("tau1", k.tau1);
        b.get("desk_tau", k.desk_tau);
        b.get("desk_tau1", k.desk_tau1);
        b.get("c", k.c);
        b.get("max_steps", k.max_steps);
        b.get("target", k.target);
        b.get("mode_floor", k.mode_floor);
        b.get("s", k.s);
        b.get("r", k.r);
        b.get("rho", k.rho);
        b.get("p", k.p);
        Block lie = b.child("lie");
        lie.get("order", k.lie.order);
        lie.get("tail_tol", k.lie.tail_tol);
        lie.get("max_order", k.lie.max_order);
        lie.finish();
        b.finish();
    }
    k.d = pr.d;
    k.alpha = pr.alpha;
    k.beta = pr.beta;
    k.lambda = pr.lambda;
    k.lattice_cutoff = pr.N;

    {
        Block b = top.child("params");
        b.get("lo", cfg.params.lo);
        b.get("hi", cfg.params.hi);
        b.get("samples", cfg.params.samples);
        b.get("seed", cfg.params.seed);
        b.get("sampling", cfg.params.sampling);
        b.finish();
    }
    {
        Block b = top.child("measure");
        b.get("gammas", cfg.measure.gammas);
        b.get("K", cfg.measure.K);
        b.get("families", cfg.measure.families);
        b.get("cross_check_fraction", cfg.measure.cross_check_fraction);
        b.get("r0_box", cfg.measure.r0_box);
        b.finish();
    }
    {
        Block b = top.child("verify");
        b.get("checkpoint", cfg.verify.checkpoint);
        b.get("dynamics", cfg.verify.dynamics);
        b.get("horizon", cfg.verify.horizon);
        b.get("dt", cfg.verify.dt);
        b.get("record_interval", cfg.verify.record_interval);
        b.get("rho", cfg.verify.rho);
        b.get("p", cfg.verify.p);
        b.get("phi0", cfg.verify.phi0);
        b.get("points", cfg.verify.points);
        b.finish();
    }
    {
        Block b = top.child("sweep");
        b.get("cutoffs", cfg.sweep.cutoffs);
        b.get("betas", cfg.sweep.betas);
        b.get("K", cfg.sweep.K);
        b.get("seeds", cfg.sweep.seeds);
        b.finish();
    }
    {
        Block b = top.child("outputs");
        b.get("trajectories", cfg.outputs.trajectories);
        b.get("checkpoint", cfg.outputs.checkpoint);
        b.finish();
    }
    top.finish();

    const auto constraints = config_violations(cfg);
    errors.insert(errors.end(), constraints.begin(), constraints.end());
    if (!errors.empty()) throw ConfigError(errors);
    return cfg;
}

RunConfig load_config(const std::string& path)
{
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config file " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    const std::filesystem::path dir = std::filesystem::path(path).parent_path();
    return parse_config(ss.str(), dir.empty() ? "." : dir.string());
}

} // namespace subkam
