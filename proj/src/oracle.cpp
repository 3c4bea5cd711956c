#include "nslit/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace nslit {
namespace oracle {

namespace {

bool is_power_of_two(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

// Signed wavenumber for FFT bin j on a domain of length L.
double fft_wavenumber(std::size_t j, std::size_t n, double length) {
    const double k0 = 2.0 * std::numbers::pi / length;
    const auto half = n / 2;
    const double idx = (j < half) ? static_cast<double>(j)
                                  : static_cast<double>(j) - static_cast<double>(n);
    return k0 * idx;
}

}  // namespace

namespace {

// Tabulated twiddles, one exact sin/cos per entry: a multiplied-up recurrence
// w *= wlen loses ~len*eps per stage, which a long evolution run turns into
// visible norm drift.
std::vector<std::complex<double>> make_twiddles(std::size_t n, bool inverse) {
    std::vector<std::complex<double>> twiddle(n / 2);
    const double sign = inverse ? 1.0 : -1.0;
    for (std::size_t j = 0; j < n / 2; ++j) {
        const double ang =
            sign * 2.0 * std::numbers::pi * static_cast<double>(j) / static_cast<double>(n);
        twiddle[j] = std::complex<double>(std::cos(ang), std::sin(ang));
    }
    return twiddle;
}

void fft_with_tables(std::vector<std::complex<double>>& a,
                     const std::vector<std::complex<double>>& twiddle, bool inverse) {
    const std::size_t n = a.size();
    // bit-reversal permutation
    for (std::size_t i = 1, j = 0; i < n; ++i) {
        std::size_t bit = n >> 1;
        for (; j & bit; bit >>= 1) j ^= bit;
        j ^= bit;
        if (i < j) std::swap(a[i], a[j]);
    }
    for (std::size_t len = 2; len <= n; len <<= 1) {
        const std::size_t stride = n / len;
        for (std::size_t i = 0; i < n; i += len) {
            for (std::size_t j = 0; j < len / 2; ++j) {
                const std::complex<double> u = a[i + j];
                const std::complex<double> v = a[i + j + len / 2] * twiddle[j * stride];
                a[i + j] = u + v;
                a[i + j + len / 2] = u - v;
            }
        }
    }
    if (inverse) {
        const double inv_n = 1.0 / static_cast<double>(n);
        for (auto& c : a) c *= inv_n;
    }
}

}  // namespace

void fft_inplace(std::vector<std::complex<double>>& a, bool inverse) {
    if (!is_power_of_two(a.size()))
        throw std::invalid_argument("fft: size must be a power of two");
    fft_with_tables(a, make_twiddles(a.size(), inverse), inverse);
}

double GridWavefunction::norm() const {
    double s = 0.0;
    for (const auto& c : values) s += std::norm(c);
    return s * dx();
}

GridWavefunction grid_from_state(const WavefieldState& state, const Units& units, double x_min,
                                 double x_max, std::size_t n, double t) {
    if (!is_power_of_two(n))
        throw std::invalid_argument("grid_from_state: n must be a power of two");
    GridWavefunction g;
    g.x_min = x_min;
    g.x_max = x_max;
    g.time = t;
    g.values.resize(n);
    for (std::size_t i = 0; i < n; ++i) g.values[i] = superpose(state, g.x_at(i), t, units).psi;
    return g;
}

GridWavefunction split_operator_evolve(const GridWavefunction& psi0,
                                       const std::function<double(double)>& V, double dt,
                                       std::size_t steps, const Units& units) {
    const std::size_t n = psi0.n();
    if (!is_power_of_two(n))
        throw std::invalid_argument("split_operator_evolve: grid size must be a power of two");
    GridWavefunction g = psi0;
    if (steps == 0) return g;

    const double length = g.x_max - g.x_min;

    // Per-run phase tables (no shared mutable state across runs).
    std::vector<std::complex<double>> kinetic(n), pot_half(n);
    for (std::size_t j = 0; j < n; ++j) {
        const double k = fft_wavenumber(j, n, length);
        const double phase = -units.hbar * k * k / (2.0 * units.mass) * dt;
        kinetic[j] = std::complex<double>(std::cos(phase), std::sin(phase));
    }
    for (std::size_t i = 0; i < n; ++i) {
        const double phase = -V(g.x_at(i)) * 0.5 * dt / units.hbar;
        pot_half[i] = std::complex<double>(std::cos(phase), std::sin(phase));
    }

    const std::vector<std::complex<double>> tw_fwd = make_twiddles(n, false);
    const std::vector<std::complex<double>> tw_inv = make_twiddles(n, true);
    auto kick_half = [&] {
        for (std::size_t i = 0; i < n; ++i) g.values[i] *= pot_half[i];
    };
    auto drift_full = [&] {
        fft_with_tables(g.values, tw_fwd, false);
        for (std::size_t j = 0; j < n; ++j) g.values[j] *= kinetic[j];
        fft_with_tables(g.values, tw_inv, true);
    };

    kick_half();
    for (std::size_t s = 0; s + 1 < steps; ++s) {
        drift_full();
        kick_half();
        kick_half();  // merged interior full kick
    }
    drift_full();
    kick_half();
    g.time += dt * static_cast<double>(steps);

    double pmax = 0.0;
    for (const auto& c : g.values) pmax = std::max(pmax, std::norm(c));
    const std::size_t edge = std::max<std::size_t>(2, n / 256);
    double pedge = 0.0;
    for (std::size_t i = 0; i < edge; ++i) {
        pedge = std::max(pedge, std::norm(g.values[i]));
        pedge = std::max(pedge, std::norm(g.values[n - 1 - i]));
    }
    if (pedge > 1e-10 * pmax) g.boundary_warning = true;
    return g;
}

std::vector<std::optional<double>> bohm_velocity_from_grid(const GridWavefunction& psi,
                                                           const Units& units) {
    const std::size_t n = psi.n();
    if (!is_power_of_two(n))
        throw std::invalid_argument("bohm_velocity_from_grid: grid size must be a power of two");
    std::vector<std::complex<double>> d = psi.values;
    fft_inplace(d, false);
    const double length = psi.x_max - psi.x_min;
    for (std::size_t j = 0; j < n; ++j)
        d[j] *= std::complex<double>(0.0, fft_wavenumber(j, n, length));
    fft_inplace(d, true);

    double pmax = 0.0;
    for (const auto& c : psi.values) pmax = std::max(pmax, std::norm(c));
    std::vector<std::optional<double>> v(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double p = std::norm(psi.values[i]);
        if (p > 1e-12 * pmax)
            v[i] = units.hbar / units.mass * std::imag(d[i] / psi.values[i]);
    }
    return v;
}

}  // namespace oracle
}  // namespace nslit
