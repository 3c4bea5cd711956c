#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "nslit/channels.hpp"
#include "nslit/units.hpp"
#include "nslit/wavefield.hpp"

namespace nslit {

// Fixed-step 4th-order integration of dx/dt = v_tot with two refinements:
// substepping where a step would cross a sizable fraction of the local
// interference fringe, and a node retry (8x substeps) before a trajectory is
// flagged and truncated. Fixed step keeps runs reproducible.
struct IntegratorSettings {
    double dt = 1e-3;
    double fringe_fraction = 0.1;  // max |v| dt per substep, in fringe scales
    int max_substeps = 64;
    int node_retry_factor = 8;
    int sample_stride = 1;  // record every k-th accepted step
};

struct TrajectorySample {
    double t = 0.0;
    double x = 0.0;
};

struct Trajectory {
    std::vector<TrajectorySample> samples;  // strictly increasing t
    double initial_position = 0.0;
    std::uint64_t stream_id = 0;            // RNG substream index of the initial draw
    double dt = 0.0;
    int max_substeps_used = 1;
    bool undefined_velocity = false;        // hit an unresolvable node; truncated
};

// Transverse momentum m*v_tot at a trajectory's position just before and
// just after a switching event (probed at event_time -+ dt).
struct EventMomentum {
    double time = 0.0;
    double x = 0.0;
    double p_before = 0.0;
    double p_after = 0.0;
    bool valid = false;
};

Trajectory integrate_trajectory(const WavefieldState& state, const Units& units, double x0,
                                double t0, double t1, const IntegratorSettings& settings,
                                std::vector<EventMomentum>* kicks = nullptr);

// n draws from the intensity profile P_tot(., t0) by inverse-CDF lookup on a
// trapezoid cumulative table. Draw k uses substream (seed, k), so the result
// is independent of evaluation order. Throws std::invalid_argument when the
// field is zero or not normalizable on its support.
std::vector<double> sample_initial_positions(const WavefieldState& state, const Units& units,
                                             double t0, std::size_t n, std::uint64_t seed);

struct ScreenHistogram {
    std::vector<double> edges;          // bins + 1 entries
    std::vector<std::uint64_t> counts;  // positions outside the range land in the end bins
    std::uint64_t total = 0;            // == ensemble size - flagged trajectories
    double screen_time = 0.0;
};

ScreenHistogram make_histogram(std::span<const double> positions, double x_min, double x_max,
                               std::size_t bins, double screen_time);

struct EnsembleSettings {
    std::size_t count = 1000;
    std::uint64_t seed = 1;
    int threads = 0;              // 0: library default
    std::size_t keep_paths = 200; // full (t, x) paths retained, evenly spaced by index
    std::size_t histogram_bins = 128;
    double histogram_min = 0.0;   // ignored unless histogram_max > histogram_min
    double histogram_max = 0.0;
};

struct EnsembleResult {
    std::vector<double> final_positions;            // indexed by trajectory, NaN if flagged
    std::vector<std::uint8_t> flagged;              // per trajectory
    std::vector<Trajectory> kept_paths;             // thinned subset with full samples
    std::vector<std::vector<EventMomentum>> kicks;  // per trajectory, one entry per event
    ScreenHistogram histogram;
    std::size_t flagged_count = 0;
};

// OpenMP-parallel ensemble integration. Trajectories are independent work
// units writing to their own slots, so the result is bit-identical for any
// thread count.
EnsembleResult run_ensemble(const WavefieldState& state, const Units& units, double t0,
                            double t_screen, const IntegratorSettings& integrator,
                            const EnsembleSettings& ensemble);

// Serial reference implementation, kept for testing and benchmarking the
// parallel kernel against.
EnsembleResult run_ensemble_serial(const WavefieldState& state, const Units& units, double t0,
                                   double t_screen, const IntegratorSettings& integrator,
                                   const EnsembleSettings& ensemble);

// P_tot on a (time x space) grid, row-major, parallel over rows.
std::vector<double> intensity_grid(const WavefieldState& state, const Units& units,
                                   std::span<const double> times, std::span<const double> xs,
                                   int threads = 0);
std::vector<double> intensity_grid_serial(const WavefieldState& state, const Units& units,
                                          std::span<const double> times,
                                          std::span<const double> xs);

}  // namespace nslit
