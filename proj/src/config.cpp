#include "nslit/config.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include <json.hpp>

namespace nslit {

using nlohmann::json;

namespace {

std::string join_violations(const std::vector<std::string>& v) {
    std::ostringstream os;
    os << "invalid configuration (" << v.size() << " problem" << (v.size() == 1 ? "" : "s")
       << "):";
    for (const auto& s : v) os << "\n  - " << s;
    return os.str();
}

// Collects violations so one parse reports every problem at once.
struct Validator {
    std::vector<std::string> problems;

    void complain(const std::string& path, const std::string& what) {
        problems.push_back(path + ": " + what);
    }

    void check_keys(const json& obj, const std::string& path,
                    const std::set<std::string>& allowed) {
        if (!obj.is_object()) {
            complain(path, "expected an object");
            return;
        }
        for (const auto& [key, _] : obj.items())
            if (!allowed.count(key)) complain(path + "." + key, "unknown key");
    }

    bool number(const json& obj, const std::string& path, const char* key, double& out,
                bool required = false) {
        if (!obj.contains(key)) {
            if (required) complain(path + "." + key, "missing required key");
            return false;
        }
        if (!obj[key].is_number()) {
            complain(path + "." + key, "expected a number");
            return false;
        }
        out = obj[key].get<double>();
        return true;
    }

    bool unsigned_int(const json& obj, const std::string& path, const char* key,
                      std::uint64_t& out) {
        if (!obj.contains(key)) return false;
        if (!obj[key].is_number_unsigned() && !(obj[key].is_number_integer() &&
                                                obj[key].get<std::int64_t>() >= 0)) {
            complain(path + "." + key, "expected a nonnegative integer");
            return false;
        }
        out = obj[key].get<std::uint64_t>();
        return true;
    }

    bool boolean(const json& obj, const std::string& path, const char* key, bool& out) {
        if (!obj.contains(key)) return false;
        if (!obj[key].is_boolean()) {
            complain(path + "." + key, "expected a boolean");
            return false;
        }
        out = obj[key].get<bool>();
        return true;
    }

    bool text(const json& obj, const std::string& path, const char* key, std::string& out) {
        if (!obj.contains(key)) return false;
        if (!obj[key].is_string()) {
            complain(path + "." + key, "expected a string");
            return false;
        }
        out = obj[key].get<std::string>();
        return true;
    }
};

GaussianSlitMode parse_slit(const json& j, const std::string& path, double birth_time,
                            Validator& v) {
    v.check_keys(j, path, {"center", "sigma0", "v0", "phase_offset"});
    GaussianSlitMode m;
    m.birth_time = birth_time;
    if (!j.is_object()) return m;
    v.number(j, path, "center", m.center, true);
    if (v.number(j, path, "sigma0", m.sigma0, true) && !(m.sigma0 > 0.0))
        v.complain(path + ".sigma0", "must be > 0");
    v.number(j, path, "v0", m.v0);
    v.number(j, path, "phase_offset", m.phase_offset);
    return m;
}

SwitchingEvent parse_event(const json& j, const std::string& path, double t0, Validator& v) {
    v.check_keys(j, path, {"time", "action", "slit", "slit_index", "policy"});
    SwitchingEvent ev;
    if (!j.is_object()) return ev;
    // Events after t_screen are legal and inert: no query time ever reaches
    // them, so the run must match the static field byte for byte.
    if (v.number(j, path, "time", ev.time, true) && !(ev.time >= t0))
        v.complain(path + ".time", "must not precede t0");

    std::string action;
    if (!v.text(j, path, "action", action)) {
        v.complain(path + ".action", "missing required key");
        return ev;
    }
    if (action == "open_slit") {
        ev.action = SwitchingEvent::Action::open_slit;
        if (!j.contains("slit")) {
            v.complain(path + ".slit", "open_slit requires a slit object");
        } else {
            ev.mode = parse_slit(j["slit"], path + ".slit", ev.time, v);
        }
    } else if (action == "close_slit") {
        ev.action = SwitchingEvent::Action::close_slit;
        std::uint64_t idx = 0;
        if (!v.unsigned_int(j, path, "slit_index", idx))
            v.complain(path + ".slit_index", "close_slit requires a slit index");
        ev.slit_index = static_cast<int>(idx);
    } else {
        v.complain(path + ".action", "must be \"open_slit\" or \"close_slit\"");
    }

    std::string policy;
    if (v.text(j, path, "policy", policy)) {
        if (policy == "fresh_width")
            ev.policy = SwitchingEvent::RebirthPolicy::fresh_width;
        else if (policy == "evolved_from_t0")
            ev.policy = SwitchingEvent::RebirthPolicy::evolved_from_t0;
        else
            v.complain(path + ".policy", "must be \"fresh_width\" or \"evolved_from_t0\"");
    }
    return ev;
}

}  // namespace

ConfigError::ConfigError(std::vector<std::string> violations)
    : std::runtime_error(join_violations(violations)), violations_(std::move(violations)) {}

ExperimentConfig parse_config(const std::string& text) {
    json root = json::parse(text, nullptr, false);
    if (root.is_discarded()) throw ConfigError({"document: not valid JSON"});

    Validator v;
    ExperimentConfig cfg;
    v.check_keys(root, "config",
                 {"units", "slits", "particles", "time", "integrator", "ensemble", "events",
                  "grid", "screen", "outputs"});
    if (!root.is_object()) throw ConfigError(std::move(v.problems));

    if (root.contains("units")) {
        const json& u = root["units"];
        v.check_keys(u, "units", {"hbar", "mass", "omega"});
        if (u.is_object()) {
            if (v.number(u, "units", "hbar", cfg.units.hbar) && !(cfg.units.hbar > 0.0))
                v.complain("units.hbar", "must be > 0");
            if (v.number(u, "units", "mass", cfg.units.mass) && !(cfg.units.mass > 0.0))
                v.complain("units.mass", "must be > 0");
            if (v.number(u, "units", "omega", cfg.units.omega) && !(cfg.units.omega > 0.0))
                v.complain("units.omega", "must be > 0");
        }
    }

    if (root.contains("time")) {
        const json& t = root["time"];
        v.check_keys(t, "time", {"t0", "t_screen"});
        if (t.is_object()) {
            v.number(t, "time", "t0", cfg.t0);
            v.number(t, "time", "t_screen", cfg.t_screen, true);
        }
    } else {
        v.complain("time", "missing required section (needs t_screen)");
    }
    if (!(cfg.t_screen > cfg.t0)) v.complain("time.t_screen", "must exceed t0");

    const bool has_slits = root.contains("slits");
    const bool has_particles = root.contains("particles");
    if (has_slits == has_particles)
        v.complain("config", "exactly one of \"slits\" or \"particles\" is required");
    if (has_slits) {
        if (!root["slits"].is_array() || root["slits"].empty()) {
            v.complain("slits", "expected a nonempty array");
        } else {
            for (std::size_t i = 0; i < root["slits"].size(); ++i)
                cfg.slits.push_back(
                    parse_slit(root["slits"][i], "slits[" + std::to_string(i) + "]", cfg.t0, v));
        }
    }
    if (has_particles) {
        if (!root["particles"].is_array() || root["particles"].empty()) {
            v.complain("particles", "expected a nonempty array");
        } else {
            for (std::size_t p = 0; p < root["particles"].size(); ++p) {
                const std::string path = "particles[" + std::to_string(p) + "]";
                const json& pj = root["particles"][p];
                v.check_keys(pj, path, {"slits", "mass"});
                ParticleSpec spec;
                spec.mass = cfg.units.mass;
                if (pj.is_object()) {
                    if (v.number(pj, path, "mass", spec.mass) && !(spec.mass > 0.0))
                        v.complain(path + ".mass", "must be > 0");
                    if (!pj.contains("slits") || !pj["slits"].is_array() || pj["slits"].empty()) {
                        v.complain(path + ".slits", "expected a nonempty array");
                    } else {
                        for (std::size_t i = 0; i < pj["slits"].size(); ++i)
                            spec.slits.push_back(parse_slit(pj["slits"][i],
                                                            path + ".slits[" + std::to_string(i) +
                                                                "]",
                                                            cfg.t0, v));
                    }
                }
                cfg.particles.push_back(std::move(spec));
            }
        }
    }

    if (root.contains("integrator")) {
        const json& it = root["integrator"];
        v.check_keys(it, "integrator",
                     {"dt", "fringe_fraction", "max_substeps", "node_retry_factor"});
        if (it.is_object()) {
            if (v.number(it, "integrator", "dt", cfg.integrator.dt) && !(cfg.integrator.dt > 0.0))
                v.complain("integrator.dt", "must be > 0");
            if (v.number(it, "integrator", "fringe_fraction", cfg.integrator.fringe_fraction) &&
                !(cfg.integrator.fringe_fraction > 0.0))
                v.complain("integrator.fringe_fraction", "must be > 0");
            std::uint64_t tmp = 0;
            if (v.unsigned_int(it, "integrator", "max_substeps", tmp)) {
                cfg.integrator.max_substeps = static_cast<int>(tmp);
                if (cfg.integrator.max_substeps < 1)
                    v.complain("integrator.max_substeps", "must be >= 1");
            }
            if (v.unsigned_int(it, "integrator", "node_retry_factor", tmp)) {
                cfg.integrator.node_retry_factor = static_cast<int>(tmp);
                if (cfg.integrator.node_retry_factor < 1)
                    v.complain("integrator.node_retry_factor", "must be >= 1");
            }
        }
    }

    if (root.contains("ensemble")) {
        const json& e = root["ensemble"];
        v.check_keys(e, "ensemble", {"count", "seed"});
        if (e.is_object()) {
            std::uint64_t tmp = 0;
            if (v.unsigned_int(e, "ensemble", "count", tmp)) cfg.ensemble_count = tmp;
            v.unsigned_int(e, "ensemble", "seed", cfg.seed);
        }
    }

    if (root.contains("events")) {
        if (!root["events"].is_array()) {
            v.complain("events", "expected an array");
        } else {
            for (std::size_t i = 0; i < root["events"].size(); ++i)
                cfg.events.push_back(
                    parse_event(root["events"][i], "events[" + std::to_string(i) + "]", cfg.t0, v));
        }
        if (!cfg.events.empty() && cfg.multi_particle())
            v.complain("events", "switching events are not supported for multi-particle runs");
    }

    if (root.contains("grid")) {
        const json& g = root["grid"];
        v.check_keys(g, "grid", {"x_min", "x_max", "points", "time_points"});
        if (g.is_object()) {
            v.number(g, "grid", "x_min", cfg.grid.x_min);
            v.number(g, "grid", "x_max", cfg.grid.x_max);
            if (cfg.grid.x_max < cfg.grid.x_min) v.complain("grid.x_max", "must be >= x_min");
            std::uint64_t tmp = 0;
            if (v.unsigned_int(g, "grid", "points", tmp)) {
                cfg.grid.points = tmp;
                if (cfg.grid.points < 2) v.complain("grid.points", "must be >= 2");
            }
            if (v.unsigned_int(g, "grid", "time_points", tmp)) {
                cfg.grid.time_points = tmp;
                if (cfg.grid.time_points < 2) v.complain("grid.time_points", "must be >= 2");
            }
        }
    }

    if (root.contains("screen")) {
        const json& s = root["screen"];
        v.check_keys(s, "screen", {"bins"});
        if (s.is_object()) {
            std::uint64_t tmp = 0;
            if (v.unsigned_int(s, "screen", "bins", tmp)) {
                cfg.screen_bins = tmp;
                if (cfg.screen_bins < 1) v.complain("screen.bins", "must be >= 1");
            }
        }
    }

    if (root.contains("outputs")) {
        const json& o = root["outputs"];
        v.check_keys(o, "outputs",
                     {"directory", "emit_fields", "trajectory_count", "sample_stride"});
        if (o.is_object()) {
            v.text(o, "outputs", "directory", cfg.outputs.directory);
            v.boolean(o, "outputs", "emit_fields", cfg.outputs.emit_fields);
            std::uint64_t tmp = 0;
            if (v.unsigned_int(o, "outputs", "trajectory_count", tmp))
                cfg.outputs.trajectory_count = tmp;
            if (v.unsigned_int(o, "outputs", "sample_stride", tmp)) {
                cfg.outputs.sample_stride = static_cast<int>(tmp);
                if (cfg.outputs.sample_stride < 1)
                    v.complain("outputs.sample_stride", "must be >= 1");
            }
        }
    }

    // Events must be applicable in order (a close_slit index has to exist).
    if (v.problems.empty() && !cfg.events.empty()) {
        try {
            make_state(cfg);
        } catch (const std::invalid_argument& e) {
            v.complain("events", e.what());
        }
    }

    if (!v.problems.empty()) throw ConfigError(std::move(v.problems));
    return cfg;
}

namespace {

json slit_to_json(const GaussianSlitMode& m) {
    return json{{"center", m.center},
                {"sigma0", m.sigma0},
                {"v0", m.v0},
                {"phase_offset", m.phase_offset}};
}

}  // namespace

std::string serialize_config(const ExperimentConfig& cfg) {
    json root;
    root["units"] = {{"hbar", cfg.units.hbar}, {"mass", cfg.units.mass},
                     {"omega", cfg.units.omega}};
    root["time"] = {{"t0", cfg.t0}, {"t_screen", cfg.t_screen}};
    if (!cfg.particles.empty()) {
        json arr = json::array();
        for (const auto& p : cfg.particles) {
            json pj;
            pj["mass"] = p.mass;
            pj["slits"] = json::array();
            for (const auto& s : p.slits) pj["slits"].push_back(slit_to_json(s));
            arr.push_back(pj);
        }
        root["particles"] = arr;
    } else {
        root["slits"] = json::array();
        for (const auto& s : cfg.slits) root["slits"].push_back(slit_to_json(s));
    }
    root["integrator"] = {{"dt", cfg.integrator.dt},
                          {"fringe_fraction", cfg.integrator.fringe_fraction},
                          {"max_substeps", cfg.integrator.max_substeps},
                          {"node_retry_factor", cfg.integrator.node_retry_factor}};
    root["ensemble"] = {{"count", cfg.ensemble_count}, {"seed", cfg.seed}};
    if (!cfg.events.empty()) {
        json arr = json::array();
        for (const auto& ev : cfg.events) {
            json ej;
            ej["time"] = ev.time;
            if (ev.action == SwitchingEvent::Action::open_slit) {
                ej["action"] = "open_slit";
                ej["slit"] = slit_to_json(ev.mode);
            } else {
                ej["action"] = "close_slit";
                ej["slit_index"] = ev.slit_index;
            }
            ej["policy"] = ev.policy == SwitchingEvent::RebirthPolicy::fresh_width
                               ? "fresh_width"
                               : "evolved_from_t0";
            arr.push_back(ej);
        }
        root["events"] = arr;
    }
    root["grid"] = {{"x_min", cfg.grid.x_min},
                    {"x_max", cfg.grid.x_max},
                    {"points", cfg.grid.points},
                    {"time_points", cfg.grid.time_points}};
    root["screen"] = {{"bins", cfg.screen_bins}};
    root["outputs"] = {{"directory", cfg.outputs.directory},
                       {"emit_fields", cfg.outputs.emit_fields},
                       {"trajectory_count", cfg.outputs.trajectory_count},
                       {"sample_stride", cfg.outputs.sample_stride}};
    return root.dump(2) + "\n";
}

WavefieldState make_state(const ExperimentConfig& cfg) {
    if (cfg.multi_particle())
        throw std::invalid_argument("make_state: multi-particle config, use particle_state");
    double valid_to = cfg.t_screen;
    for (const SwitchingEvent& ev : cfg.events) valid_to = std::max(valid_to, ev.time);
    return WavefieldState(cfg.slits, cfg.events, cfg.t0, valid_to);
}

WavefieldState particle_state(const ExperimentConfig& cfg, std::size_t j) {
    if (!cfg.multi_particle()) {
        if (j != 0) throw std::out_of_range("particle_state: single-particle config");
        return make_state(cfg);
    }
    if (j >= cfg.particles.size()) throw std::out_of_range("particle_state: bad particle index");
    return WavefieldState(cfg.particles[j].slits, {}, cfg.t0, cfg.t_screen);
}

Units particle_units(const ExperimentConfig& cfg, std::size_t j) {
    Units u = cfg.units;
    if (cfg.multi_particle()) {
        if (j >= cfg.particles.size())
            throw std::out_of_range("particle_units: bad particle index");
        u.mass = cfg.particles[j].mass;
    }
    return u;
}

namespace {

struct Preset {
    const char* name;
    const char* description;
    const char* text;
};

// Geometry note: the two-slit presets put Gaussian apertures at +-2.5 with
// widths chosen so the packets overlap well before the screen. "fig3" spreads
// fast (sigma0 = 0.5, v0 = 0): trajectories fan out and channel along the
// interference fringes. "fig2" spreads slowly (sigma0 = 1.1) with opposite
// launch velocities v0 = -+0.6, so the beams converge and cross the
// interference zone mid-flight.
constexpr Preset kPresets[] = {
    {"single-slit", "one free Gaussian slit, spreading packet baseline",
     R"({
  "slits": [{"center": 0.0, "sigma0": 0.5, "v0": 0.0, "phase_offset": 0.0}],
  "time": {"t0": 0.0, "t_screen": 4.0},
  "integrator": {"dt": 0.004},
  "ensemble": {"count": 20000, "seed": 20181},
  "grid": {"x_min": -14.0, "x_max": 14.0, "points": 512, "time_points": 96},
  "screen": {"bins": 101},
  "outputs": {"directory": "out", "trajectory_count": 120, "sample_stride": 8}
})"},
    {"fig3", "two slits, large dispersion, v0 = 0 for both: fringe-channeling trajectories",
     R"({
  "slits": [{"center": -2.5, "sigma0": 0.5, "v0": 0.0, "phase_offset": 0.0},
            {"center": 2.5, "sigma0": 0.5, "v0": 0.0, "phase_offset": 0.0}],
  "time": {"t0": 0.0, "t_screen": 6.0},
  "integrator": {"dt": 0.004},
  "ensemble": {"count": 100000, "seed": 90210},
  "grid": {"x_min": -30.0, "x_max": 30.0, "points": 768, "time_points": 128},
  "screen": {"bins": 161},
  "outputs": {"directory": "out", "trajectory_count": 160, "sample_stride": 8}
})"},
    {"fig2", "two slits, small dispersion, v0_1 = -v0_2: converging-beam interference",
     R"({
  "slits": [{"center": 2.5, "sigma0": 1.1, "v0": -0.6, "phase_offset": 0.0},
            {"center": -2.5, "sigma0": 1.1, "v0": 0.6, "phase_offset": 0.0}],
  "time": {"t0": 0.0, "t_screen": 6.0},
  "integrator": {"dt": 0.004},
  "ensemble": {"count": 100000, "seed": 90211},
  "grid": {"x_min": -16.0, "x_max": 16.0, "points": 768, "time_points": 128},
  "screen": {"bins": 161},
  "outputs": {"directory": "out", "trajectory_count": 160, "sample_stride": 8}
})"},
    {"triple-slit", "three equal slits, symmetric fringe pattern",
     R"({
  "slits": [{"center": -4.0, "sigma0": 0.5, "v0": 0.0, "phase_offset": 0.0},
            {"center": 0.0, "sigma0": 0.5, "v0": 0.0, "phase_offset": 0.0},
            {"center": 4.0, "sigma0": 0.5, "v0": 0.0, "phase_offset": 0.0}],
  "time": {"t0": 0.0, "t_screen": 5.0},
  "integrator": {"dt": 0.004},
  "ensemble": {"count": 50000, "seed": 31415},
  "grid": {"x_min": -28.0, "x_max": 28.0, "points": 768, "time_points": 128},
  "screen": {"bins": 161},
  "outputs": {"directory": "out", "trajectory_count": 160, "sample_stride": 8}
})"},
    {"switching", "start with one slit, open the second mid-flight (fresh width)",
     R"({
  "slits": [{"center": 1.0, "sigma0": 0.4, "v0": 0.0, "phase_offset": 0.0}],
  "time": {"t0": 0.0, "t_screen": 4.0},
  "integrator": {"dt": 0.004},
  "ensemble": {"count": 100000, "seed": 77001},
  "events": [{"time": 1.5, "action": "open_slit", "policy": "fresh_width",
              "slit": {"center": -1.0, "sigma0": 0.4, "v0": 0.0, "phase_offset": 0.0}}],
  "grid": {"x_min": -20.0, "x_max": 20.0, "points": 768, "time_points": 128},
  "screen": {"bins": 161},
  "outputs": {"directory": "out", "trajectory_count": 160, "sample_stride": 8}
})"},
    {"two-particle", "two independent particles, each in its own double slit (product state)",
     R"({
  "particles": [
    {"mass": 1.0,
     "slits": [{"center": -2.5, "sigma0": 0.5, "v0": 0.0, "phase_offset": 0.0},
               {"center": 2.5, "sigma0": 0.5, "v0": 0.0, "phase_offset": 0.0}]},
    {"mass": 1.0,
     "slits": [{"center": -2.0, "sigma0": 0.6, "v0": 0.0, "phase_offset": 0.0},
               {"center": 2.0, "sigma0": 0.6, "v0": 0.0, "phase_offset": 0.0}]}
  ],
  "time": {"t0": 0.0, "t_screen": 4.0},
  "integrator": {"dt": 0.004},
  "ensemble": {"count": 20000, "seed": 55555},
  "grid": {"x_min": -22.0, "x_max": 22.0, "points": 512, "time_points": 96},
  "screen": {"bins": 121},
  "outputs": {"directory": "out", "trajectory_count": 120, "sample_stride": 8}
})"},
};

}  // namespace

std::vector<PresetInfo> list_presets() {
    std::vector<PresetInfo> out;
    for (const Preset& p : kPresets) out.push_back({p.name, p.description});
    return out;
}

std::string preset_text(const std::string& name) {
    for (const Preset& p : kPresets)
        if (name == p.name) return p.text;
    throw ConfigError({"preset: unknown preset \"" + name + "\""});
}

ExperimentConfig preset_config(const std::string& name) { return parse_config(preset_text(name)); }

}  // namespace nslit
