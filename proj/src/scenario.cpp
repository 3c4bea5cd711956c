#include "nslit/scenario.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <limits>
#include <span>
#include <sstream>

#include <json.hpp>

#include "nslit/channels.hpp"
#include "nslit/diagnostics.hpp"
#include "nslit/oracle.hpp"
#include "nslit/stats.hpp"

namespace nslit {

namespace fs = std::filesystem;
using nlohmann::json;

std::string version_string() { return "0.1.0"; }

namespace {

// Locale-independent shortest round-trip formatting keeps artifacts
// byte-stable across runs and thread counts.
std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

class ArtifactWriter {
  public:
    explicit ArtifactWriter(fs::path dir) : dir_(std::move(dir)) {
        std::error_code ec;
        fs::create_directories(dir_, ec);
        if (ec || !fs::is_directory(dir_))
            throw ConfigError({"outputs.directory: cannot create \"" + dir_.string() + "\""});
    }

    void write(const std::string& name, const std::string& content) {
        std::ofstream os(dir_ / name, std::ios::binary);
        if (!os) throw ConfigError({"outputs.directory: cannot write \"" + name + "\""});
        os << content;
        os.close();
        char hex[24];
        std::snprintf(hex, sizeof(hex), "%016llx",
                      static_cast<unsigned long long>(fnv1a64(content)));
        entries_.push_back({name, content.size(), hex});
    }

    const std::vector<ArtifactEntry>& entries() const { return entries_; }
    const fs::path& dir() const { return dir_; }

  private:
    fs::path dir_;
    std::vector<ArtifactEntry> entries_;
};

fs::path resolve_out_dir(const ExperimentConfig& cfg, const RunOptions& opt) {
    if (!opt.out_dir.empty()) return opt.out_dir;
    if (const char* env = std::getenv("NSLIT_OUT_DIR"); env && *env)
        return fs::path(env) / cfg.outputs.directory;
    return cfg.outputs.directory;
}

std::string trajectories_csv(const std::vector<Trajectory>& paths) {
    std::string out = "trajectory_id,t,x\n";
    for (const Trajectory& traj : paths) {
        const std::string id = std::to_string(traj.stream_id);
        for (const TrajectorySample& s : traj.samples)
            out += id + "," + fmt(s.t) + "," + fmt(s.x) + "\n";
    }
    return out;
}

std::string histogram_csv(const ScreenHistogram& h) {
    std::string out = "bin_lo,bin_hi,count\n";
    for (std::size_t i = 0; i < h.counts.size(); ++i)
        out += fmt(h.edges[i]) + "," + fmt(h.edges[i + 1]) + "," +
               std::to_string(h.counts[i]) + "\n";
    return out;
}

std::string fields_csv(const std::vector<double>& grid, std::span<const double> times,
                       std::span<const double> xs) {
    std::string out = "t,x,P_tot\n";
    for (std::size_t r = 0; r < times.size(); ++r)
        for (std::size_t c = 0; c < xs.size(); ++c)
            out += fmt(times[r]) + "," + fmt(xs[c]) + "," + fmt(grid[r * xs.size() + c]) + "\n";
    return out;
}

std::string kicks_csv(const std::vector<std::vector<EventMomentum>>& kicks) {
    std::string out = "trajectory_id,event_time,p_before,p_after\n";
    for (std::size_t i = 0; i < kicks.size(); ++i)
        for (const EventMomentum& em : kicks[i]) {
            if (!em.valid) continue;
            out += std::to_string(i) + "," + fmt(em.time) + "," + fmt(em.p_before) + "," +
                   fmt(em.p_after) + "\n";
        }
    return out;
}

struct GridAxes {
    std::vector<double> xs;
    std::vector<double> ts;
};

GridAxes make_axes(const ExperimentConfig& cfg, const WavefieldState& state) {
    GridAxes axes;
    double lo = cfg.grid.x_min, hi = cfg.grid.x_max;
    if (!(hi > lo)) {
        lo = std::numeric_limits<double>::infinity();
        hi = -lo;
        for (const auto& m : state.modes_at(cfg.t_screen)) {
            const double c = m.center + m.v0 * (cfg.t_screen - m.birth_time);
            const double w = mode_width(m, cfg.t_screen, cfg.units);
            lo = std::min(lo, c - 6.0 * w);
            hi = std::max(hi, c + 6.0 * w);
        }
    }
    axes.xs.resize(cfg.grid.points);
    for (std::size_t i = 0; i < cfg.grid.points; ++i)
        axes.xs[i] = lo + (hi - lo) * static_cast<double>(i) /
                              static_cast<double>(cfg.grid.points - 1);
    axes.ts.resize(cfg.grid.time_points);
    for (std::size_t i = 0; i < cfg.grid.time_points; ++i)
        axes.ts[i] = cfg.t0 + (cfg.t_screen - cfg.t0) * static_cast<double>(i) /
                                  static_cast<double>(cfg.grid.time_points - 1);
    return axes;
}

// Max |v_channels - v_grid| over the central 99% mass, for each static epoch
// of the field, restarted from the analytic state at the epoch start. When
// `density_dump` is given, the evolved |psi|^2 grids are appended to it as
// t,x,P rows for plotting.
double oracle_guard(const ExperimentConfig& cfg, const WavefieldState& state,
                    std::string* density_dump) {
    const Units& units = cfg.units;
    std::vector<double> epoch_starts{cfg.t0};
    for (double te : state.event_times_between(cfg.t0, cfg.t_screen))
        if (te < cfg.t_screen) epoch_starts.push_back(te);

    double worst = 0.0;
    for (std::size_t e = 0; e < epoch_starts.size(); ++e) {
        const double ta = epoch_starts[e];
        const double tb = (e + 1 < epoch_starts.size()) ? epoch_starts[e + 1] : cfg.t_screen;
        if (!(tb > ta)) continue;

        // Domain sized so the support stays far from the periodic boundary.
        double lo = std::numeric_limits<double>::infinity(), hi = -lo;
        for (const auto& m : state.modes_at(tb)) {
            const double c0 = m.center + m.v0 * (ta - std::min(m.birth_time, ta));
            const double c1 = m.center + m.v0 * (tb - m.birth_time);
            const double w = mode_width(m, tb, units);
            lo = std::min({lo, c0 - 12.0 * w, c1 - 12.0 * w});
            hi = std::max({hi, c0 + 12.0 * w, c1 + 12.0 * w});
        }
        // If another event fires exactly at tb, compare just before it; the
        // grid evolved the pre-event field.
        double t_cmp = tb;
        for (const SwitchingEvent& ev : state.events())
            if (ev.time == tb) t_cmp = tb - 1e-6 * (tb - ta);

        constexpr std::size_t n = 2048;
        oracle::GridWavefunction g0 = oracle::grid_from_state(state, units, lo, hi, n, ta);
        const double span = t_cmp - ta;
        const std::size_t steps = std::max<std::size_t>(64, static_cast<std::size_t>(span / 1e-3));
        const oracle::GridWavefunction g1 = oracle::split_operator_evolve(
            g0, [](double) { return 0.0; }, span / static_cast<double>(steps), steps, units);
        const auto v_grid = oracle::bohm_velocity_from_grid(g1, units);

        std::vector<double> P(n);
        for (std::size_t i = 0; i < n; ++i) P[i] = std::norm(g1.values[i]);
        const IndexRange region = central_mass_region(P, 0.99);
        for (std::size_t i = region.first; i <= region.last; ++i) {
            if (!v_grid[i]) continue;
            const PointFlow f = point_flow(state, g1.x_at(i), g1.time, units);
            if (!f.v) continue;
            worst = std::max(worst, std::abs(*f.v - *v_grid[i]));
        }
        if (density_dump)
            for (std::size_t i = 0; i < n; ++i)
                *density_dump +=
                    fmt(g1.time) + "," + fmt(g1.x_at(i)) + "," + fmt(P[i]) + "\n";
    }
    return worst;
}

struct DiagnosticsReport {
    std::string csv;
    double hj_norm = 0.0;
    double continuity_norm = 0.0;
    double hj_order = 0.0;
    double continuity_order = 0.0;
    double qp_identity_dev = 0.0;
};

DiagnosticsReport diagnostics_report(const ExperimentConfig& cfg, const WavefieldState& state,
                                     const GridAxes& axes, const Units& units) {
    DiagnosticsReport rep;
    const diagnostics::AnalyticWave wave = diagnostics::make_wave(state, units);
    auto V0 = [](double) { return 0.0; };
    const double t_mid = 0.5 * (cfg.t0 + cfg.t_screen);
    const double dt = 1e-4;
    const double h = (axes.xs.back() - axes.xs.front()) / static_cast<double>(axes.xs.size());

    std::string csv = "table,x,value\n";
    std::vector<double> P(axes.xs.size());
    for (std::size_t i = 0; i < axes.xs.size(); ++i)
        P[i] = point_flow(state, axes.xs[i], t_mid, units).P;
    const IndexRange region = central_mass_region(P, 0.99);
    double pmax = 0.0;
    for (double p : P) pmax = std::max(pmax, p);

    double qp_dev = 0.0;
    for (std::size_t i = region.first; i <= region.last; ++i) {
        const double x = axes.xs[i];
        if (!(P[i] > 1e-12 * pmax)) continue;
        const double r_hj = diagnostics::hj_residual(wave, V0, units, x, t_mid, dt);
        const double r_ct = diagnostics::continuity_residual(wave, units, x, t_mid, dt, h);
        csv += "hj_residual," + fmt(x) + "," + fmt(r_hj) + "\n";
        csv += "continuity_residual," + fmt(x) + "," + fmt(r_ct) + "\n";

        // quantum potential identity spread (grad vs R vs u form)
        const Superposition s = superpose(state, x, t_mid, units);
        const double R = std::abs(s.psi);
        const double gradR = std::real(std::conj(s.psi) * s.dpsi) / R;
        const double lapR =
            (std::norm(s.dpsi) + std::real(std::conj(s.psi) * s.d2psi) - gradR * gradR) / R;
        const double lapP = 2.0 * (gradR * gradR + R * lapR);
        const double u = -(units.hbar / units.mass) * gradR / R;
        const double divu = -(units.hbar / units.mass) * (lapR / R - gradR * gradR / (R * R));
        const double ug = diagnostics::quantum_potential_grad_form(P[i], s.gradP, lapP, units);
        const double ur = diagnostics::quantum_potential_R_form(R, lapR, units);
        const double uu = diagnostics::quantum_potential_u_form(u, divu, units);
        const double scale = std::max({std::abs(ug), std::abs(ur), std::abs(uu), 1e-300});
        qp_dev = std::max(qp_dev, std::max(std::abs(ug - ur), std::abs(ur - uu)) / scale);
        csv += "quantum_potential," + fmt(x) + "," + fmt(ur) + "\n";
    }
    rep.qp_identity_dev = qp_dev;
    rep.hj_norm = diagnostics::hj_residual_norm(wave, V0, units, axes.xs, t_mid, dt);
    rep.continuity_norm =
        diagnostics::continuity_residual_norm(wave, units, axes.xs, t_mid, dt, h);
    const double hj2 = diagnostics::hj_residual_norm(wave, V0, units, axes.xs, t_mid, 2.0 * dt);
    const double ct2 =
        diagnostics::continuity_residual_norm(wave, units, axes.xs, t_mid, 2.0 * dt, 2.0 * h);
    rep.hj_order = (rep.hj_norm > 0.0) ? std::log2(hj2 / rep.hj_norm) : 0.0;
    rep.continuity_order =
        (rep.continuity_norm > 0.0) ? std::log2(ct2 / rep.continuity_norm) : 0.0;
    rep.csv = std::move(csv);
    return rep;
}

json manifest_json(const RunManifest& m) {
    json j;
    j["tool"] = m.tool;
    j["version"] = m.version;
    j["seed"] = m.seed;
    j["threads"] = m.threads;
    j["config"] = json::parse(m.config_echo);
    j["flags"] = {
        {"phase_sign_convention", "phi = (S2 - S1)/hbar"},
        {"rebirth_policy_default", "fresh_width"},
        {"node_threshold", "1e-12 of local max intensity"},
        {"integrator", "rk4 fixed step, fringe-limited substepping"},
    };
    j["assumptions"] = {
        "preset slit separations, widths and time horizons are chosen to reproduce "
        "the documented fringe structure; they are not unique",
    };
    json arts = json::array();
    for (const ArtifactEntry& a : m.artifacts)
        arts.push_back({{"name", a.name}, {"bytes", a.bytes}, {"fnv1a64", a.fnv1a64_hex}});
    j["artifacts"] = arts;
    json diag;
    diag["flagged_trajectories"] = m.flagged_trajectories;
    diag["hj_residual_norm"] = m.hj_residual_norm;
    diag["continuity_residual_norm"] = m.continuity_residual_norm;
    if (m.oracle_velocity_deviation >= 0.0)
        diag["oracle_velocity_deviation"] = m.oracle_velocity_deviation;
    if (!m.momentum_kick_summary.empty()) diag["momentum_kicks"] = m.momentum_kick_summary;
    j["diagnostics"] = diag;
    j["elapsed_seconds"] = m.elapsed_seconds;
    return j;
}

}  // namespace

RunManifest run_scenario(const ExperimentConfig& cfg, const RunOptions& opt) {
    const auto wall_start = std::chrono::steady_clock::now();

    ExperimentConfig run_cfg = cfg;
    if (opt.has_seed) run_cfg.seed = opt.seed;
    if (opt.emit_fields) run_cfg.outputs.emit_fields = true;

    RunManifest manifest;
    manifest.version = version_string();
    manifest.seed = run_cfg.seed;
    manifest.threads = opt.threads;
    manifest.config_echo = serialize_config(run_cfg);

    ArtifactWriter writer(resolve_out_dir(run_cfg, opt));

    const std::size_t n_particles = run_cfg.multi_particle() ? run_cfg.particles.size() : 1;
    for (std::size_t p = 0; p < n_particles; ++p) {
        const WavefieldState state = particle_state(run_cfg, p);
        const Units units = particle_units(run_cfg, p);
        const std::string suffix =
            run_cfg.multi_particle() ? "_p" + std::to_string(p) : std::string{};

        EnsembleSettings es;
        es.count = run_cfg.ensemble_count;
        es.seed = run_cfg.seed + p;  // independent particle, independent stream family
        es.threads = opt.threads;
        es.keep_paths = run_cfg.outputs.trajectory_count;
        es.histogram_bins = run_cfg.screen_bins;
        if (run_cfg.grid.x_max > run_cfg.grid.x_min) {
            es.histogram_min = run_cfg.grid.x_min;
            es.histogram_max = run_cfg.grid.x_max;
        }
        IntegratorSettings is = run_cfg.integrator;
        is.sample_stride = run_cfg.outputs.sample_stride;

        const EnsembleResult result =
            run_ensemble(state, units, run_cfg.t0, run_cfg.t_screen, is, es);
        manifest.flagged_trajectories += result.flagged_count;

        writer.write("trajectories" + suffix + ".csv", trajectories_csv(result.kept_paths));
        writer.write("histogram" + suffix + ".csv", histogram_csv(result.histogram));

        if (!state.events().empty()) {
            writer.write("momentum_kicks" + suffix + ".csv", kicks_csv(result.kicks));
            // per-event mean shift and standard error
            for (double te : state.event_times_between(run_cfg.t0, run_cfg.t_screen)) {
                double sum = 0.0, sum2 = 0.0;
                std::size_t m = 0;
                for (const auto& traj_kicks : result.kicks)
                    for (const EventMomentum& em : traj_kicks) {
                        if (!em.valid || em.time != te) continue;
                        const double dp = em.p_after - em.p_before;
                        sum += dp;
                        sum2 += dp * dp;
                        ++m;
                    }
                if (m < 2) continue;
                const double mean = sum / static_cast<double>(m);
                const double var =
                    (sum2 - sum * sum / static_cast<double>(m)) / static_cast<double>(m - 1);
                const double se = std::sqrt(std::max(var, 0.0) / static_cast<double>(m));
                std::ostringstream os;
                os << "event t=" << fmt(te) << ": mean dp=" << fmt(mean) << " se=" << fmt(se)
                   << " n=" << m;
                manifest.momentum_kick_summary.push_back(os.str());
            }
        }

        const GridAxes axes = make_axes(run_cfg, state);
        if (run_cfg.outputs.emit_fields) {
            const std::vector<double> grid =
                intensity_grid(state, units, axes.ts, axes.xs, opt.threads);
            writer.write("fields" + suffix + ".csv", fields_csv(grid, axes.ts, axes.xs));
        }

        if (p == 0) {
            const DiagnosticsReport rep = diagnostics_report(run_cfg, state, axes, units);
            writer.write("diagnostics.csv", rep.csv);
            manifest.hj_residual_norm = rep.hj_norm;
            manifest.continuity_residual_norm = rep.continuity_norm;
        }

        if (opt.check_oracle) {
            std::string dump = "t,x,P_grid\n";
            const double dev = oracle_guard(run_cfg, state, &dump);
            writer.write("oracle_density" + suffix + ".csv", dump);
            manifest.oracle_velocity_deviation =
                std::max(manifest.oracle_velocity_deviation, dev);
            if (dev > 1e-6)
                throw GuardError("oracle guard: channel/grid velocity deviation " + fmt(dev) +
                                 " exceeds 1e-6");
        }
    }

    manifest.artifacts = writer.entries();
    manifest.elapsed_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - wall_start).count();

    std::ofstream os(writer.dir() / "manifest.json", std::ios::binary);
    os << manifest_json(manifest).dump(2) << "\n";
    return manifest;
}

std::string run_diagnostics(const ExperimentConfig& cfg, const RunOptions& opt) {
    const WavefieldState state = particle_state(cfg, 0);
    const GridAxes axes = make_axes(cfg, state);
    const DiagnosticsReport rep = diagnostics_report(cfg, state, axes, particle_units(cfg, 0));

    ArtifactWriter writer(resolve_out_dir(cfg, opt));
    writer.write("diagnostics.csv", rep.csv);

    std::ostringstream os;
    os << "diagnostics summary\n";
    os << "  hj_residual_norm          " << fmt(rep.hj_norm) << "\n";
    os << "  continuity_residual_norm  " << fmt(rep.continuity_norm) << "\n";
    os << "  hj_convergence_order      " << fmt(rep.hj_order) << "\n";
    os << "  continuity_order          " << fmt(rep.continuity_order) << "\n";
    os << "  qp_identity_max_rel_dev   " << fmt(rep.qp_identity_dev) << "\n";
    return os.str();
}

}  // namespace nslit
