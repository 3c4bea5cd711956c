#pragma once

#include <complex>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "nslit/units.hpp"
#include "nslit/wavefield.hpp"

namespace nslit {
namespace diagnostics {

// Forward/osmotic split of the local momentum field.
struct VelocityDecomposition {
    double v_forward = 0.0;  // gradS / m
    double u_osmotic = 0.0;  // -(hbar/m) gradR/R == -(hbar/2m) gradP/P
    double delta_p = 0.0;    // m * u_osmotic
};

VelocityDecomposition decompose_from_amplitude(double R, double gradR, double gradS,
                                               const Units& units);
VelocityDecomposition decompose_from_density(double P, double gradP, double gradS,
                                             const Units& units);

// Quantum potential, three algebraically equivalent pointwise forms.
//
//   grad form: U = (hbar^2/4m) [ (gradP/P)^2 / 2 - lapP/P ]
//   R form:    U = -(hbar^2/2m) lapR / R
//   u form:    U = (hbar/2) div u - (m/2) u^2,  u = -(hbar/m) gradR/R
//
// Sign check for the u form: on the harmonic ground state it must give
// U = hbar omega/2 - m omega^2 x^2 / 2 (so U(0) > 0 for a Gaussian peak).
double quantum_potential_grad_form(double P, double gradP, double lapP, const Units& units);
double quantum_potential_R_form(double R, double lapR, const Units& units);
double quantum_potential_u_form(double u, double divu, const Units& units);

// Heat exchanged with the zero-point background, relative to a reference
// density: deltaQ = -hbar omega ln(P_t / P_0). The instantaneous heat
// potential q_inst = -hbar omega ln P_t (additive constant irrelevant) obeys
// grad q_inst = 2 omega m u, so grad deltaQ = 2 omega m (u_t - u_ref); both
// gradients are stored analytically when density gradients are supplied.
struct HeatField {
    std::vector<double> x;             // uniform grid
    std::vector<double> delta_q;
    std::vector<double> q_inst;
    std::vector<double> grad_delta_q;  // empty unless gradients were supplied
    std::vector<double> grad_q_inst;
    double omega = 1.0;
};

HeatField heat_field(std::vector<double> x, std::span<const double> P_t,
                     std::span<const double> P_0, double omega, const Units& units);
HeatField heat_field(std::vector<double> x, std::span<const double> P_t,
                     std::span<const double> P_0, std::span<const double> gradP_t,
                     std::span<const double> gradP_0, double omega, const Units& units);

// Pointwise heat exchange; throws std::domain_error on nonpositive densities.
double heat_delta(double P_t, double P_0, double omega, const Units& units);

// Osmotic velocity recovered from the instantaneous heat potential,
// u = grad q_inst / (2 omega m). Requires analytic gradients in `heat`.
std::vector<double> osmotic_velocity_from_heat(const HeatField& heat, const Units& units);

// Thermodynamic form of the quantum potential,
//   U = (hbar^2/4m) [ lapQ/(hbar omega) - ((gradQ/(hbar omega))^2)/2 ],
// evaluated with central finite differences of q_inst on the grid. Boundary
// entries are NaN.
std::vector<double> quantum_potential_heat_form(const HeatField& heat, const Units& units);

// Analytic wavefunction bundle: psi and its first two spatial derivatives as
// callables of (x, t). Time derivatives are always finite-differenced.
struct AnalyticWave {
    std::function<std::complex<double>(double, double)> psi;
    std::function<std::complex<double>(double, double)> dpsi;
    std::function<std::complex<double>(double, double)> d2psi;
};

AnalyticWave make_wave(const WavefieldState& state, const Units& units);

// Residual of the modified Hamilton-Jacobi equation
//   dS/dt + (gradS)^2/(2m) + V + U
// with dS/dt = hbar Im[(psi(t+dt) - psi(t-dt)) / (2 dt psi(t))] and U from the
// R form with analytic spatial derivatives. NaN where |psi| vanishes.
double hj_residual(const AnalyticWave& wave, const std::function<double(double)>& V,
                   const Units& units, double x, double t, double dt);

// Residual of the continuity equation dP/dt + dJ/dx, with central differences
// of step dt in time and h in space (both second order).
double continuity_residual(const AnalyticWave& wave, const Units& units, double x, double t,
                           double dt, double h);

// Max |residual| over the smallest window of `xs` holding `mass` probability,
// node points (P below 1e-12 of the window max) excluded.
double hj_residual_norm(const AnalyticWave& wave, const std::function<double(double)>& V,
                        const Units& units, std::span<const double> xs, double t, double dt,
                        double mass = 0.99);
double continuity_residual_norm(const AnalyticWave& wave, const Units& units,
                                std::span<const double> xs, double t, double dt, double h,
                                double mass = 0.99);

}  // namespace diagnostics
}  // namespace nslit
