#pragma once

#include <cmath>
#include <random>
#include <vector>

#include "nslit/units.hpp"
#include "nslit/wavefield.hpp"

namespace nslit::test {

inline std::vector<double> linspace(double lo, double hi, std::size_t n) {
    std::vector<double> xs(n);
    for (std::size_t i = 0; i < n; ++i)
        xs[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1);
    return xs;
}

inline double rel_err(double got, double want, double floor = 1e-300) {
    return std::abs(got - want) / std::max(std::abs(want), floor);
}

// Central finite differences; the analytic derivatives must beat these.
template <typename F>
double central_diff(F&& f, double x, double h) {
    return (f(x + h) - f(x - h)) / (2.0 * h);
}

template <typename F>
double central_diff2(F&& f, double x, double h) {
    return (f(x + h) - 2.0 * f(x) + f(x - h)) / (h * h);
}

inline WavefieldState double_slit_state(double separation = 5.0, double sigma0 = 0.5,
                                        double v0 = 0.0) {
    return WavefieldState({GaussianSlitMode{-0.5 * separation, sigma0, v0, 0.0, 0.0},
                           GaussianSlitMode{0.5 * separation, sigma0, -v0, 0.0, 0.0}});
}

inline WavefieldState nslit_state(int n, double spacing = 4.0, double sigma0 = 0.55) {
    std::vector<GaussianSlitMode> modes;
    for (int i = 0; i < n; ++i) {
        const double c = (static_cast<double>(i) - 0.5 * static_cast<double>(n - 1)) * spacing;
        modes.push_back(GaussianSlitMode{c, sigma0, 0.0, 0.0, 0.0});
    }
    return WavefieldState(std::move(modes));
}

}  // namespace nslit::test
