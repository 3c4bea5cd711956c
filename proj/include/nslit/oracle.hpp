#pragma once

#include <complex>
#include <functional>
#include <optional>
#include <vector>

#include "nslit/units.hpp"
#include "nslit/wavefield.hpp"

namespace nslit {
namespace oracle {

// Independent verification backend: a Strang-split spectral integrator for
// the 1D Schroedinger equation on a periodic grid, plus spectral Bohm
// velocity extraction. Deliberately shares no derivative code with the
// analytic wavefield or the channel machinery.

struct GridWavefunction {
    double x_min = -1.0;
    double x_max = 1.0;
    std::vector<std::complex<double>> values;  // size must be a power of two
    double time = 0.0;
    bool boundary_warning = false;  // support reached the periodic boundary

    std::size_t n() const { return values.size(); }
    double dx() const { return (x_max - x_min) / static_cast<double>(values.size()); }
    double x_at(std::size_t i) const { return x_min + static_cast<double>(i) * dx(); }
    double norm() const;  // sum |psi|^2 dx
};

// Samples the analytic superposition onto a grid at time t.
GridWavefunction grid_from_state(const WavefieldState& state, const Units& units, double x_min,
                                 double x_max, std::size_t n, double t);

// Strang splitting: half potential kick, full kinetic step in Fourier space,
// half potential kick (chained). Exactly unitary up to rounding; with V == 0
// the kinetic step is exact in time. Throws std::invalid_argument unless the
// grid size is a power of two. Sets boundary_warning when the evolved
// support touches the domain edge (periodic wraparound corrupts comparisons).
GridWavefunction split_operator_evolve(const GridWavefunction& psi0,
                                       const std::function<double(double)>& V, double dt,
                                       std::size_t steps, const Units& units);

// Bohm velocity v = (hbar/m) Im(dPsi/dx / Psi) via spectral differentiation.
// Entries are empty where |psi|^2 <= 1e-12 * max |psi|^2.
std::vector<std::optional<double>> bohm_velocity_from_grid(const GridWavefunction& psi,
                                                           const Units& units);

// Radix-2 in-place FFT (forward: exp(-ikx) convention). Exposed for tests.
void fft_inplace(std::vector<std::complex<double>>& a, bool inverse);

}  // namespace oracle
}  // namespace nslit
