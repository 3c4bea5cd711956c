// Benchmark: OpenMP ensemble integration and grid evaluation against the
// serial reference kernels.
//
//   ./bench_ensemble [trajectories] [t_screen]

#include <chrono>
#include <cstdio>
#include <cstdlib>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "nslit/dynamics.hpp"

using namespace nslit;

namespace {

template <typename F>
double time_seconds(F&& f) {
    const auto t0 = std::chrono::steady_clock::now();
    f();
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

}  // namespace

int main(int argc, char** argv) {
    const std::size_t count = argc > 1 ? std::strtoull(argv[1], nullptr, 10) : 4000;
    const double t_screen = argc > 2 ? std::strtod(argv[2], nullptr) : 4.0;

    const Units units;
    const WavefieldState state({GaussianSlitMode{-2.5, 0.5, 0.0, 0.0, 0.0},
                                GaussianSlitMode{2.5, 0.5, 0.0, 0.0, 0.0}});
    IntegratorSettings integrator;
    integrator.dt = 4e-3;
    EnsembleSettings ensemble;
    ensemble.count = count;
    ensemble.seed = 7;
    ensemble.keep_paths = 0;

#ifdef _OPENMP
    const int max_threads = omp_get_max_threads();
#else
    const int max_threads = 1;
#endif

    std::printf("double slit, %zu trajectories to t = %.2f (dt = %.0e)\n", count, t_screen,
                integrator.dt);

    EnsembleResult serial_result;
    const double t_serial = time_seconds([&] {
        serial_result = run_ensemble_serial(state, units, 0.0, t_screen, integrator, ensemble);
    });
    std::printf("  %-28s %8.3f s\n", "serial reference", t_serial);

    for (int threads = 1; threads <= max_threads; threads *= 2) {
        ensemble.threads = threads;
        EnsembleResult parallel_result;
        const double t_par = time_seconds([&] {
            parallel_result = run_ensemble(state, units, 0.0, t_screen, integrator, ensemble);
        });
        const bool identical = parallel_result.final_positions == serial_result.final_positions;
        std::printf("  openmp %-2d thread%s            %8.3f s   speedup %5.2fx   %s\n", threads,
                    threads == 1 ? " " : "s", t_par, t_serial / t_par,
                    identical ? "bit-identical" : "MISMATCH");
        if (!identical) return 1;
    }

    const auto xs = [] {
        std::vector<double> v(1024);
        for (std::size_t i = 0; i < v.size(); ++i)
            v[i] = -25.0 + 50.0 * static_cast<double>(i) / 1023.0;
        return v;
    }();
    const auto ts = [&] {
        std::vector<double> v(256);
        for (std::size_t i = 0; i < v.size(); ++i)
            v[i] = t_screen * static_cast<double>(i + 1) / 256.0;
        return v;
    }();

    std::printf("intensity grid, %zu x %zu points\n", ts.size(), xs.size());
    std::vector<double> g_serial;
    const double tg_serial =
        time_seconds([&] { g_serial = intensity_grid_serial(state, units, ts, xs); });
    std::printf("  %-28s %8.3f s\n", "serial reference", tg_serial);
    for (int threads = 1; threads <= max_threads; threads *= 2) {
        std::vector<double> g;
        const double tg =
            time_seconds([&] { g = intensity_grid(state, units, ts, xs, threads); });
        std::printf("  openmp %-2d thread%s            %8.3f s   speedup %5.2fx   %s\n", threads,
                    threads == 1 ? " " : "s", tg, tg_serial / tg,
                    g == g_serial ? "bit-identical" : "MISMATCH");
        if (g != g_serial) return 1;
    }
    return 0;
}
