#include "grushin/config.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "grushin/errors.hpp"

namespace grushin {

using nlohmann::json;

Scheme scheme_from_string(const std::string& name) {
    if (name == "crank_nicolson") return Scheme::CrankNicolson;
    if (name == "backward_euler") return Scheme::BackwardEuler;
    throw ConfigError("unknown scheme '" + name + "' (expected crank_nicolson or backward_euler)");
}

std::string scheme_to_string(Scheme scheme) {
    return scheme == Scheme::CrankNicolson ? "crank_nicolson" : "backward_euler";
}

ExperimentConfig ExperimentConfig::defaults() {
    ExperimentConfig cfg;
    cfg.coeff_b = ProfileSpec::bump_profile(0.6, 0.2, 0.5);
    cfg.coeff_btilde = ProfileSpec::constant_profile(1.0);
    cfg.initial_modes = {{1, 1.0, ProfileSpec::bump_profile(0.6, 0.55, 1.0)}};
    return cfg;
}

double evaluate_initial_profile(const ProfileSpec& profile, double x) {
    switch (profile.kind) {
    case ProfileSpec::Kind::Constant:
        return profile.constant;
    case ProfileSpec::Kind::Bump: {
        const double t = (x - profile.bump.center) / profile.bump.width;
        if (std::abs(t) >= 1.0) return 0.0;
        return profile.bump.amplitude * std::exp(1.0 - 1.0 / (1.0 - t * t));
    }
    case ProfileSpec::Kind::Table: {
        const auto& xs = profile.table.x;
        const auto& ys = profile.table.y;
        if (x < xs.front() || x > xs.back()) return 0.0;
        auto it = std::upper_bound(xs.begin(), xs.end(), x);
        if (it == xs.begin()) return ys.front();
        if (it == xs.end()) return ys.back();
        const std::size_t j = static_cast<std::size_t>(it - xs.begin());
        const double w = (x - xs[j - 1]) / (xs[j] - xs[j - 1]);
        return ys[j - 1] + w * (ys[j] - ys[j - 1]);
    }
    }
    return 0.0;
}

namespace {

class Validator {
public:
    std::vector<std::string> violations;

    void fail(const std::string& msg) { violations.push_back(msg); }

    void check_keys(const json& obj, const std::string& where, const std::set<std::string>& known) {
        if (!obj.is_object()) {
            fail(where + ": expected an object");
            return;
        }
        for (auto it = obj.begin(); it != obj.end(); ++it)
            if (!known.count(it.key()))
                fail(where + ": unknown key '" + it.key() + "'");
    }

    template <class T>
    void read(const json& obj, const char* key, T& out, const std::string& where) {
        if (!obj.is_object() || !obj.contains(key)) return;
        try {
            out = obj.at(key).get<T>();
        } catch (const json::exception&) {
            fail(where + "." + key + ": wrong type");
        }
    }
};

ProfileSpec parse_profile(const json& j, const std::string& where, Validator& v, bool is_data) {
    ProfileSpec p = ProfileSpec::constant_profile(1.0);
    if (!j.is_object()) {
        v.fail(where + ": profile must be an object");
        return p;
    }
    std::string type = j.value("type", std::string("constant"));
    if (type == "constant") {
        v.check_keys(j, where, {"type", "value"});
        double value = is_data ? 0.0 : 1.0;
        v.read(j, "value", value, where);
        return ProfileSpec::constant_profile(value);
    }
    if (type == "bump") {
        v.check_keys(j, where, {"type", "center", "width", "amplitude"});
        double center = 0.0, width = 1.0, amplitude = 0.0;
        v.read(j, "center", center, where);
        v.read(j, "width", width, where);
        v.read(j, "amplitude", amplitude, where);
        if (!(width > 0.0)) {
            v.fail(where + ": bump width must be positive");
            return p;
        }
        return ProfileSpec::bump_profile(center, width, amplitude);
    }
    if (type == "table") {
        v.check_keys(j, where, {"type", "x", "y"});
        std::vector<double> x, y;
        v.read(j, "x", x, where);
        v.read(j, "y", y, where);
        if (x.size() != y.size() || x.size() < 2 || !std::is_sorted(x.begin(), x.end())) {
            v.fail(where + ": table needs matching, increasing x with at least 2 knots");
            return p;
        }
        return ProfileSpec::table_profile(std::move(x), std::move(y));
    }
    v.fail(where + ": unknown profile type '" + type + "'");
    return p;
}

json profile_to_json(const ProfileSpec& p) {
    switch (p.kind) {
    case ProfileSpec::Kind::Constant:
        return {{"type", "constant"}, {"value", p.constant}};
    case ProfileSpec::Kind::Bump:
        return {{"type", "bump"},
                {"center", p.bump.center},
                {"width", p.bump.width},
                {"amplitude", p.bump.amplitude}};
    case ProfileSpec::Kind::Table:
        return {{"type", "table"}, {"x", p.table.x}, {"y", p.table.y}};
    }
    return {};
}

void validate_semantics(const ExperimentConfig& c, Validator& v) {
    const auto& g = c.geometry;
    if (!(g.x_min < g.x_max)) v.fail("geometry: require x_min < x_max");
    if (!(g.L2 > 0.0)) v.fail("geometry: require L2 > 0");
    if (!(g.support.lo < g.support.hi)) v.fail("geometry.support: require lo < hi");
    if (!(g.support.lo > g.x_min && g.support.hi < g.x_max))
        v.fail("geometry.support: must be strictly inside the domain");
    if (g.support.lo <= 0.0 && g.support.hi >= 0.0)
        v.fail("geometry.support: must not contain x = 0");
    if (!(g.support.delta > 0.0))
        v.fail("geometry.support: require delta > 0");
    else if (std::min(std::abs(g.support.lo), std::abs(g.support.hi)) < g.support.delta &&
             !(g.support.lo <= 0.0 && g.support.hi >= 0.0))
        v.fail("geometry.support: |x| >= delta fails on the support");
    if (!(g.omega1.lo < g.omega1.hi)) v.fail("geometry.omega1: require lo < hi");
    if (!(g.omega1.lo >= g.x_min && g.omega1.hi <= g.x_max))
        v.fail("geometry.omega1: must lie inside the domain");

    const auto& d = c.discretization;
    if (d.n_cells < 4) v.fail("discretization: require n_cells >= 4");
    if (!(d.dt > 0.0)) v.fail("discretization: require dt > 0");
    if (d.N_max < 1) v.fail("discretization: require N_max >= 1");
    if (d.n_y_quad < 4 * d.N_max)
        v.fail("discretization: n_y_quad must be at least 4 * N_max (anti-aliasing)");
    if (d.store_stride < 0) v.fail("discretization: store_stride must be >= 0");
    if (d.heat_steps < 1) v.fail("discretization: heat_steps must be >= 1");

    const auto& ph = c.physics;
    if (!(ph.gamma > 0.0 && ph.gamma <= 1.0)) v.fail("physics: gamma out of (0,1]");
    if (!(ph.s > 0.5)) v.fail("physics: require s > 1/2");
    if (!(ph.m > 0.0 && ph.m <= 1.0 && ph.M >= 1.0)) v.fail("physics: require 0 < m <= 1 <= M");
    if (!(ph.L_b > 0.0)) v.fail("physics: require L_b > 0");

    const auto& pr = c.protocol;
    if (!(pr.t1 > 0.0 && pr.t1 < pr.T1 && pr.T1 < pr.T))
        v.fail("protocol ordering: require 0 < t1 < T1 < T");
    if (!(pr.K1 > 0.0)) v.fail("protocol: require K1 > 0");
    if (pr.N < 1 || pr.N > d.N_max) v.fail("protocol: N out of [1, N_max]");

    const auto& e = c.ensemble;
    if (e.count < 1) v.fail("ensemble: require count >= 1");
    if (!(e.noise_level >= 0.0)) v.fail("ensemble: require noise_level >= 0");
    if (!(e.jitter >= 0.0 && e.jitter < 0.5)) v.fail("ensemble: jitter out of [0, 0.5)");

    const auto& s = c.sweeps;
    if (s.n_lo < 1 || s.n_lo > s.n_hi) v.fail("sweeps: require 1 <= n_lo <= n_hi");
    if (s.N_list.empty() || !std::is_sorted(s.N_list.begin(), s.N_list.end()))
        v.fail("sweeps: N_list must be nonempty and ascending");
    else {
        for (int n : s.N_list)
            if (n < 1 || n > d.N_max) v.fail("sweeps: N_list entries must lie in [1, N_max]");
    }
    if (s.T1_list.empty() || !std::is_sorted(s.T1_list.begin(), s.T1_list.end()))
        v.fail("sweeps: T1_list must be nonempty and ascending");

    std::set<int> seen;
    for (const auto& mode : c.initial_modes) {
        if (mode.n < 1 || mode.n > d.N_max) v.fail("initial_data: mode index out of [1, N_max]");
        if (!seen.insert(mode.n).second) v.fail("initial_data: duplicate mode index");
    }
    if (c.initial_modes.empty()) v.fail("initial_data: at least one mode required");

    if (c.output.directory.empty()) v.fail("output: directory must not be empty");
}

} // namespace

ExperimentConfig parse_config_text(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }

    Validator v;
    ExperimentConfig cfg = ExperimentConfig::defaults();

    v.check_keys(doc, "config",
                 {"schema_version", "geometry", "discretization", "physics", "protocol",
                  "coefficient", "initial_data", "ensemble", "sweeps", "output"});
    if (doc.contains("schema_version") && doc["schema_version"] != 1)
        v.fail("config: unsupported schema_version");

    if (doc.contains("geometry")) {
        const json& j = doc["geometry"];
        v.check_keys(j, "geometry", {"x_min", "x_max", "support", "omega1", "L2"});
        v.read(j, "x_min", cfg.geometry.x_min, "geometry");
        v.read(j, "x_max", cfg.geometry.x_max, "geometry");
        v.read(j, "L2", cfg.geometry.L2, "geometry");
        if (j.contains("support")) {
            const json& s = j["support"];
            v.check_keys(s, "geometry.support", {"lo", "hi", "delta"});
            v.read(s, "lo", cfg.geometry.support.lo, "geometry.support");
            v.read(s, "hi", cfg.geometry.support.hi, "geometry.support");
            v.read(s, "delta", cfg.geometry.support.delta, "geometry.support");
        }
        if (j.contains("omega1")) {
            const json& o = j["omega1"];
            v.check_keys(o, "geometry.omega1", {"lo", "hi"});
            v.read(o, "lo", cfg.geometry.omega1.lo, "geometry.omega1");
            v.read(o, "hi", cfg.geometry.omega1.hi, "geometry.omega1");
        }
    }

    if (doc.contains("discretization")) {
        const json& j = doc["discretization"];
        v.check_keys(j, "discretization",
                     {"n_cells", "dt", "N_max", "n_y_quad", "store_stride", "heat_steps"});
        v.read(j, "n_cells", cfg.discretization.n_cells, "discretization");
        v.read(j, "dt", cfg.discretization.dt, "discretization");
        v.read(j, "N_max", cfg.discretization.N_max, "discretization");
        v.read(j, "n_y_quad", cfg.discretization.n_y_quad, "discretization");
        v.read(j, "store_stride", cfg.discretization.store_stride, "discretization");
        v.read(j, "heat_steps", cfg.discretization.heat_steps, "discretization");
    }

    if (doc.contains("physics")) {
        const json& j = doc["physics"];
        v.check_keys(j, "physics", {"gamma", "s", "m", "M", "L_b"});
        v.read(j, "gamma", cfg.physics.gamma, "physics");
        v.read(j, "s", cfg.physics.s, "physics");
        v.read(j, "m", cfg.physics.m, "physics");
        v.read(j, "M", cfg.physics.M, "physics");
        v.read(j, "L_b", cfg.physics.L_b, "physics");
    }

    if (doc.contains("protocol")) {
        const json& j = doc["protocol"];
        v.check_keys(j, "protocol", {"T", "T1", "t1", "K1", "N", "scheme"});
        v.read(j, "T", cfg.protocol.T, "protocol");
        v.read(j, "T1", cfg.protocol.T1, "protocol");
        v.read(j, "t1", cfg.protocol.t1, "protocol");
        v.read(j, "K1", cfg.protocol.K1, "protocol");
        v.read(j, "N", cfg.protocol.N, "protocol");
        if (j.contains("scheme")) {
            std::string s;
            v.read(j, "scheme", s, "protocol");
            try {
                cfg.protocol.scheme = scheme_from_string(s);
            } catch (const ConfigError& e) {
                v.fail(std::string("protocol: ") + e.what());
            }
        }
    }

    if (doc.contains("coefficient")) {
        const json& j = doc["coefficient"];
        v.check_keys(j, "coefficient", {"b", "b_tilde"});
        if (j.contains("b")) cfg.coeff_b = parse_profile(j["b"], "coefficient.b", v, false);
        if (j.contains("b_tilde"))
            cfg.coeff_btilde = parse_profile(j["b_tilde"], "coefficient.b_tilde", v, false);
    }

    if (doc.contains("initial_data")) {
        const json& j = doc["initial_data"];
        v.check_keys(j, "initial_data", {"modes"});
        if (j.contains("modes")) {
            if (!j["modes"].is_array()) {
                v.fail("initial_data.modes: expected an array");
            } else {
                cfg.initial_modes.clear();
                int idx = 0;
                for (const json& jm : j["modes"]) {
                    std::ostringstream where;
                    where << "initial_data.modes[" << idx++ << "]";
                    ModeInitConfig mic;
                    v.check_keys(jm, where.str(), {"n", "scale", "profile"});
                    v.read(jm, "n", mic.n, where.str());
                    v.read(jm, "scale", mic.scale, where.str());
                    if (jm.contains("profile"))
                        mic.profile = parse_profile(jm["profile"], where.str() + ".profile", v, true);
                    cfg.initial_modes.push_back(std::move(mic));
                }
            }
        }
    }

    if (doc.contains("ensemble")) {
        const json& j = doc["ensemble"];
        v.check_keys(j, "ensemble", {"count", "master_seed", "noise_level", "jitter"});
        v.read(j, "count", cfg.ensemble.count, "ensemble");
        v.read(j, "master_seed", cfg.ensemble.master_seed, "ensemble");
        v.read(j, "noise_level", cfg.ensemble.noise_level, "ensemble");
        v.read(j, "jitter", cfg.ensemble.jitter, "ensemble");
    }

    if (doc.contains("sweeps")) {
        const json& j = doc["sweeps"];
        v.check_keys(j, "sweeps", {"n_lo", "n_hi", "N_list", "T1_list"});
        v.read(j, "n_lo", cfg.sweeps.n_lo, "sweeps");
        v.read(j, "n_hi", cfg.sweeps.n_hi, "sweeps");
        v.read(j, "N_list", cfg.sweeps.N_list, "sweeps");
        v.read(j, "T1_list", cfg.sweeps.T1_list, "sweeps");
    }
    if (!doc.contains("sweeps") || !doc["sweeps"].contains("N_list")) {
        // the default list adapts to the retained mode count
        std::vector<int> trimmed;
        for (int n : cfg.sweeps.N_list)
            if (n <= cfg.discretization.N_max) trimmed.push_back(n);
        if (trimmed.empty()) trimmed.push_back(1);
        cfg.sweeps.N_list = std::move(trimmed);
    }

    if (doc.contains("output")) {
        const json& j = doc["output"];
        v.check_keys(j, "output", {"directory", "write_csv", "write_trajectories"});
        v.read(j, "directory", cfg.output.directory, "output");
        v.read(j, "write_csv", cfg.output.write_csv, "output");
        v.read(j, "write_trajectories", cfg.output.write_trajectories, "output");
    }

    validate_semantics(cfg, v);

    if (!v.violations.empty()) {
        std::ostringstream os;
        os << "invalid config (" << v.violations.size() << " violation(s)):";
        for (const auto& msg : v.violations) os << "\n  - " << msg;
        throw ConfigError(os.str());
    }
    return cfg;
}

ExperimentConfig parse_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config file: " + path);
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return parse_config_text(buffer.str());
}

std::string resolved_config_json(const ExperimentConfig& c) {
    json j;
    j["schema_version"] = 1;
    j["geometry"] = {{"x_min", c.geometry.x_min},
                     {"x_max", c.geometry.x_max},
                     {"support",
                      {{"lo", c.geometry.support.lo},
                       {"hi", c.geometry.support.hi},
                       {"delta", c.geometry.support.delta}}},
                     {"omega1", {{"lo", c.geometry.omega1.lo}, {"hi", c.geometry.omega1.hi}}},
                     {"L2", c.geometry.L2}};
    j["discretization"] = {{"n_cells", c.discretization.n_cells},
                           {"dt", c.discretization.dt},
                           {"N_max", c.discretization.N_max},
                           {"n_y_quad", c.discretization.n_y_quad},
                           {"store_stride", c.discretization.store_stride},
                           {"heat_steps", c.discretization.heat_steps}};
    j["physics"] = {{"gamma", c.physics.gamma},
                    {"s", c.physics.s},
                    {"m", c.physics.m},
                    {"M", c.physics.M},
                    {"L_b", c.physics.L_b}};
    j["protocol"] = {{"T", c.protocol.T},   {"T1", c.protocol.T1}, {"t1", c.protocol.t1},
                     {"K1", c.protocol.K1}, {"N", c.protocol.N},
                     {"scheme", scheme_to_string(c.protocol.scheme)}};
    j["coefficient"] = {{"b", profile_to_json(c.coeff_b)}, {"b_tilde", profile_to_json(c.coeff_btilde)}};
    json modes = json::array();
    for (const auto& m : c.initial_modes)
        modes.push_back({{"n", m.n}, {"scale", m.scale}, {"profile", profile_to_json(m.profile)}});
    j["initial_data"] = {{"modes", modes}};
    j["ensemble"] = {{"count", c.ensemble.count},
                     {"master_seed", c.ensemble.master_seed},
                     {"noise_level", c.ensemble.noise_level},
                     {"jitter", c.ensemble.jitter}};
    j["sweeps"] = {{"n_lo", c.sweeps.n_lo},
                   {"n_hi", c.sweeps.n_hi},
                   {"N_list", c.sweeps.N_list},
                   {"T1_list", c.sweeps.T1_list}};
    j["output"] = {{"directory", c.output.directory},
                   {"write_csv", c.output.write_csv},
                   {"write_trajectories", c.output.write_trajectories}};
    return j.dump(2) + "\n";
}

} // namespace grushin
