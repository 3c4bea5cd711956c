#include "nslit/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "nslit/stats.hpp"

namespace nslit {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

struct StepOutcome {
    double x = 0.0;
    bool ok = false;
};

// One RK4 step of width h starting from (x, t); fails if any stage velocity
// is undefined (node). Field queries are capped at t_field_max: a segment
// that ends on a switching event must integrate the pre-event (left-limit)
// field all the way to the boundary, while the epoch lookup would already
// serve the post-event field at exactly the event time.
StepOutcome rk4_step(const WavefieldState& state, const Units& units, double x, double t,
                     double h, double t_field_max) {
    const auto flow = [&](double xx, double tt) {
        return point_flow(state, xx, std::min(tt, t_field_max), units);
    };
    const PointFlow f1 = flow(x, t);
    if (!f1.v) return {};
    const double k1 = *f1.v;
    const PointFlow f2 = flow(x + 0.5 * h * k1, t + 0.5 * h);
    if (!f2.v) return {};
    const double k2 = *f2.v;
    const PointFlow f3 = flow(x + 0.5 * h * k2, t + 0.5 * h);
    if (!f3.v) return {};
    const double k3 = *f3.v;
    const PointFlow f4 = flow(x + h * k3, t + h);
    if (!f4.v) return {};
    const double k4 = *f4.v;
    return {x + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4), true};
}

// Advance across [t, t + h] with n_sub equal RK4 substeps.
StepOutcome advance(const WavefieldState& state, const Units& units, double x, double t,
                    double h, int n_sub, double t_field_max) {
    const double hs = h / static_cast<double>(n_sub);
    double xs = x;
    for (int s = 0; s < n_sub; ++s) {
        const StepOutcome o = rk4_step(state, units, xs, t + s * hs, hs, t_field_max);
        if (!o.ok) return {};
        xs = o.x;
    }
    return {xs, true};
}

}  // namespace

Trajectory integrate_trajectory(const WavefieldState& state, const Units& units, double x0,
                                double t0, double t1, const IntegratorSettings& settings,
                                std::vector<EventMomentum>* kicks) {
    if (!(t1 > t0)) throw std::invalid_argument("integrate_trajectory: t1 must exceed t0");
    if (!std::isfinite(x0)) throw std::invalid_argument("integrate_trajectory: x0 must be finite");
    if (!(settings.dt > 0.0)) throw std::invalid_argument("integrate_trajectory: dt must be > 0");

    Trajectory traj;
    traj.initial_position = x0;
    traj.dt = settings.dt;
    traj.samples.push_back({t0, x0});

    // Steps never straddle a switching event: the field is discontinuous in
    // time there, so each event time becomes a segment boundary.
    struct Boundary {
        double t;
        bool event;
    };
    std::vector<Boundary> boundaries;
    for (double te : state.event_times_between(t0, t1)) boundaries.push_back({te, true});
    if (boundaries.empty() || boundaries.back().t != t1) boundaries.push_back({t1, false});

    double x = x0;
    double t = t0;
    long step_index = 0;
    for (const Boundary& b : boundaries) {
        const double seg_start = t;
        const double field_cap = b.event ? std::nextafter(b.t, seg_start)
                                         : std::numeric_limits<double>::infinity();
        long seg_step = 0;
        while (t < b.t) {
            // Step targets are computed from the segment start, not
            // accumulated, so t never drifts and lands exactly on b.t.
            const double target =
                std::min(seg_start + static_cast<double>(seg_step + 1) * settings.dt, b.t);
            const double h = target - t;
            const PointFlow flow = point_flow(state, x, t, units);
            int n_sub = 1;
            if (flow.v && std::isfinite(flow.fringe_scale)) {
                const double travel = std::abs(*flow.v) * h;
                const double limit = settings.fringe_fraction * flow.fringe_scale;
                if (travel > limit)
                    n_sub = static_cast<int>(
                        std::min<double>(settings.max_substeps, std::ceil(travel / limit)));
            }
            StepOutcome o = advance(state, units, x, t, h, n_sub, field_cap);
            if (!o.ok) {
                // node retry with a finer partition before giving up
                const int retry = std::min(settings.max_substeps * settings.node_retry_factor,
                                           n_sub * settings.node_retry_factor);
                o = advance(state, units, x, t, h, retry, field_cap);
                if (!o.ok) {
                    traj.undefined_velocity = true;
                    return traj;
                }
                n_sub = retry;
            }
            traj.max_substeps_used = std::max(traj.max_substeps_used, n_sub);
            x = o.x;
            t = target;
            ++seg_step;
            ++step_index;
            if (step_index % settings.sample_stride == 0 || t == b.t)
                traj.samples.push_back({t, x});
        }
        if (kicks && b.event) {
            EventMomentum em;
            em.time = b.t;
            em.x = x;
            const double probe = settings.dt;
            const PointFlow before = point_flow(state, x, b.t - probe, units);
            const PointFlow after = point_flow(state, x, b.t + probe, units);
            if (before.v && after.v) {
                em.p_before = units.mass * *before.v;
                em.p_after = units.mass * *after.v;
                em.valid = true;
            }
            kicks->push_back(em);
        }
    }
    return traj;
}

std::vector<double> sample_initial_positions(const WavefieldState& state, const Units& units,
                                             double t0, std::size_t n, std::uint64_t seed) {
    if (n == 0) return {};
    const auto& modes = state.modes_at(t0);
    if (modes.empty())
        throw std::invalid_argument("sample_initial_positions: no modes active at t0");

    double lo = std::numeric_limits<double>::infinity();
    double hi = -std::numeric_limits<double>::infinity();
    for (const auto& m : modes) {
        const double c = m.center + m.v0 * (t0 - m.birth_time);
        const double w = mode_width(m, t0, units);
        lo = std::min(lo, c - 10.0 * w);
        hi = std::max(hi, c + 10.0 * w);
    }

    constexpr std::size_t kTable = 1 << 14;
    std::vector<double> xs(kTable), dens(kTable);
    const double dx = (hi - lo) / static_cast<double>(kTable - 1);
    for (std::size_t i = 0; i < kTable; ++i) {
        xs[i] = lo + static_cast<double>(i) * dx;
        dens[i] = point_flow(state, xs[i], t0, units).P;
    }
    const CdfTable table(std::move(xs), dens);  // throws if not normalizable

    std::vector<double> out(n);
    for (std::size_t k = 0; k < n; ++k) out[k] = table.quantile(substream_uniform(seed, k));
    return out;
}

ScreenHistogram make_histogram(std::span<const double> positions, double x_min, double x_max,
                               std::size_t bins, double screen_time) {
    if (bins == 0 || !(x_max > x_min))
        throw std::invalid_argument("make_histogram: need bins >= 1 and x_max > x_min");
    ScreenHistogram h;
    h.screen_time = screen_time;
    h.edges.resize(bins + 1);
    const double w = (x_max - x_min) / static_cast<double>(bins);
    for (std::size_t i = 0; i <= bins; ++i)
        h.edges[i] = x_min + static_cast<double>(i) * w;
    h.counts.assign(bins, 0);
    for (double x : positions) {
        if (std::isnan(x)) continue;
        auto idx = static_cast<long>(std::floor((x - x_min) / w));
        idx = std::clamp<long>(idx, 0, static_cast<long>(bins) - 1);
        ++h.counts[static_cast<std::size_t>(idx)];
        ++h.total;
    }
    return h;
}

namespace {

EnsembleResult run_ensemble_impl(const WavefieldState& state, const Units& units, double t0,
                                 double t_screen, const IntegratorSettings& integrator,
                                 const EnsembleSettings& ensemble, bool parallel) {
    const std::vector<double> x0 =
        sample_initial_positions(state, units, t0, ensemble.count, ensemble.seed);
    const std::size_t n = x0.size();

    EnsembleResult res;
    res.final_positions.assign(n, kNaN);
    res.flagged.assign(n, 0);
    res.kicks.assign(n, {});

    // Thin the retained full paths; every trajectory still contributes its
    // endpoint and momentum records.
    const std::size_t keep = std::min(ensemble.keep_paths, n);
    const std::size_t keep_stride = (keep > 0) ? std::max<std::size_t>(1, n / keep) : n + 1;
    std::vector<Trajectory> paths(n > 0 && keep > 0 ? (n - 1) / keep_stride + 1 : 0);

    auto body = [&](std::size_t i) {
        const bool kept = keep > 0 && i % keep_stride == 0;
        IntegratorSettings local = integrator;
        if (!kept) local.sample_stride = std::numeric_limits<int>::max();
        std::vector<EventMomentum> kicks;
        Trajectory traj = integrate_trajectory(state, units, x0[i], t0, t_screen, local, &kicks);
        traj.stream_id = i;
        res.flagged[i] = traj.undefined_velocity ? 1 : 0;
        if (!traj.undefined_velocity) res.final_positions[i] = traj.samples.back().x;
        res.kicks[i] = std::move(kicks);
        if (kept) paths[i / keep_stride] = std::move(traj);
    };

    if (parallel) {
#ifdef _OPENMP
        const int nthreads = ensemble.threads > 0 ? ensemble.threads : omp_get_max_threads();
#pragma omp parallel for schedule(dynamic, 16) num_threads(nthreads)
        for (long long i = 0; i < static_cast<long long>(n); ++i)
            body(static_cast<std::size_t>(i));
#else
        for (std::size_t i = 0; i < n; ++i) body(i);
#endif
    } else {
        for (std::size_t i = 0; i < n; ++i) body(i);
    }

    res.kept_paths = std::move(paths);
    for (std::size_t i = 0; i < n; ++i)
        if (res.flagged[i]) ++res.flagged_count;

    double hmin = ensemble.histogram_min, hmax = ensemble.histogram_max;
    if (!(hmax > hmin)) {
        // deterministic fallback range from the mode geometry at screen time
        double lo = std::numeric_limits<double>::infinity(), hi = -lo;
        for (const auto& m : state.modes_at(t_screen)) {
            const double c = m.center + m.v0 * (t_screen - m.birth_time);
            const double w = mode_width(m, t_screen, units);
            lo = std::min(lo, c - 6.0 * w);
            hi = std::max(hi, c + 6.0 * w);
        }
        hmin = lo;
        hmax = hi;
    }
    res.histogram = make_histogram(res.final_positions, hmin, hmax,
                                   std::max<std::size_t>(1, ensemble.histogram_bins), t_screen);
    return res;
}

}  // namespace

EnsembleResult run_ensemble(const WavefieldState& state, const Units& units, double t0,
                            double t_screen, const IntegratorSettings& integrator,
                            const EnsembleSettings& ensemble) {
    return run_ensemble_impl(state, units, t0, t_screen, integrator, ensemble, true);
}

EnsembleResult run_ensemble_serial(const WavefieldState& state, const Units& units, double t0,
                                   double t_screen, const IntegratorSettings& integrator,
                                   const EnsembleSettings& ensemble) {
    return run_ensemble_impl(state, units, t0, t_screen, integrator, ensemble, false);
}

std::vector<double> intensity_grid(const WavefieldState& state, const Units& units,
                                   std::span<const double> times, std::span<const double> xs,
                                   int threads) {
    std::vector<double> out(times.size() * xs.size());
#ifdef _OPENMP
    const int nthreads = threads > 0 ? threads : omp_get_max_threads();
#pragma omp parallel for schedule(static) num_threads(nthreads)
#else
    (void)threads;
#endif
    for (long long r = 0; r < static_cast<long long>(times.size()); ++r)
        for (std::size_t c = 0; c < xs.size(); ++c)
            out[static_cast<std::size_t>(r) * xs.size() + c] =
                point_flow(state, xs[c], times[static_cast<std::size_t>(r)], units).P;
    return out;
}

std::vector<double> intensity_grid_serial(const WavefieldState& state, const Units& units,
                                          std::span<const double> times,
                                          std::span<const double> xs) {
    std::vector<double> out(times.size() * xs.size());
    for (std::size_t r = 0; r < times.size(); ++r)
        for (std::size_t c = 0; c < xs.size(); ++c)
            out[r * xs.size() + c] = point_flow(state, xs[c], times[r], units).P;
    return out;
}

}  // namespace nslit
