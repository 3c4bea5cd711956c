#include "nslit/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "nslit/stats.hpp"

namespace nslit {
namespace diagnostics {

namespace {
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

void check_positive(std::span<const double> v, const char* what) {
    for (double p : v)
        if (!(p > 0.0)) throw std::domain_error(std::string(what) + " must be > 0 pointwise");
}
}  // namespace

VelocityDecomposition decompose_from_amplitude(double R, double gradR, double gradS,
                                               const Units& units) {
    if (!(R > 0.0)) throw std::domain_error("velocity decomposition needs R > 0");
    VelocityDecomposition d;
    d.v_forward = gradS / units.mass;
    d.u_osmotic = -(units.hbar / units.mass) * gradR / R;
    d.delta_p = units.mass * d.u_osmotic;
    return d;
}

VelocityDecomposition decompose_from_density(double P, double gradP, double gradS,
                                             const Units& units) {
    if (!(P > 0.0)) throw std::domain_error("velocity decomposition needs P > 0");
    VelocityDecomposition d;
    d.v_forward = gradS / units.mass;
    d.u_osmotic = -(units.hbar / (2.0 * units.mass)) * gradP / P;
    d.delta_p = units.mass * d.u_osmotic;
    return d;
}

double quantum_potential_grad_form(double P, double gradP, double lapP, const Units& units) {
    if (!(P > 0.0)) throw std::domain_error("quantum potential needs P > 0");
    const double g = gradP / P;
    return units.hbar * units.hbar / (4.0 * units.mass) * (0.5 * g * g - lapP / P);
}

double quantum_potential_R_form(double R, double lapR, const Units& units) {
    if (!(R > 0.0)) throw std::domain_error("quantum potential needs R > 0");
    return -units.hbar * units.hbar / (2.0 * units.mass) * lapR / R;
}

double quantum_potential_u_form(double u, double divu, const Units& units) {
    return 0.5 * units.hbar * divu - 0.5 * units.mass * u * u;
}

double heat_delta(double P_t, double P_0, double omega, const Units& units) {
    if (!(P_t > 0.0) || !(P_0 > 0.0)) throw std::domain_error("heat_delta needs P > 0");
    return -units.hbar * omega * std::log(P_t / P_0);
}

HeatField heat_field(std::vector<double> x, std::span<const double> P_t,
                     std::span<const double> P_0, double omega, const Units& units) {
    if (x.size() != P_t.size() || x.size() != P_0.size())
        throw std::invalid_argument("heat_field: grid/density size mismatch");
    check_positive(P_t, "heat_field: P_t");
    check_positive(P_0, "heat_field: P_0");
    HeatField h;
    h.omega = omega;
    h.x = std::move(x);
    h.delta_q.reserve(h.x.size());
    h.q_inst.reserve(h.x.size());
    for (std::size_t i = 0; i < h.x.size(); ++i) {
        h.delta_q.push_back(-units.hbar * omega * std::log(P_t[i] / P_0[i]));
        h.q_inst.push_back(-units.hbar * omega * std::log(P_t[i]));
    }
    return h;
}

HeatField heat_field(std::vector<double> x, std::span<const double> P_t,
                     std::span<const double> P_0, std::span<const double> gradP_t,
                     std::span<const double> gradP_0, double omega, const Units& units) {
    if (gradP_t.size() != P_t.size() || gradP_0.size() != P_0.size())
        throw std::invalid_argument("heat_field: gradient size mismatch");
    HeatField h = heat_field(std::move(x), P_t, P_0, omega, units);
    h.grad_delta_q.reserve(h.x.size());
    h.grad_q_inst.reserve(h.x.size());
    for (std::size_t i = 0; i < h.x.size(); ++i) {
        const double gt = gradP_t[i] / P_t[i];
        const double g0 = gradP_0[i] / P_0[i];
        h.grad_q_inst.push_back(-units.hbar * omega * gt);
        h.grad_delta_q.push_back(-units.hbar * omega * (gt - g0));
    }
    return h;
}

std::vector<double> osmotic_velocity_from_heat(const HeatField& heat, const Units& units) {
    if (heat.grad_q_inst.empty())
        throw std::invalid_argument("osmotic_velocity_from_heat: heat field lacks gradients");
    std::vector<double> u;
    u.reserve(heat.grad_q_inst.size());
    for (double g : heat.grad_q_inst) u.push_back(g / (2.0 * heat.omega * units.mass));
    return u;
}

std::vector<double> quantum_potential_heat_form(const HeatField& heat, const Units& units) {
    const std::size_t n = heat.x.size();
    std::vector<double> out(n, kNaN);
    if (n < 3) return out;
    const double dx = heat.x[1] - heat.x[0];
    const double hw = units.hbar * heat.omega;
    for (std::size_t i = 1; i + 1 < n; ++i) {
        const double grad_q = (heat.q_inst[i + 1] - heat.q_inst[i - 1]) / (2.0 * dx);
        const double lap_q =
            (heat.q_inst[i + 1] - 2.0 * heat.q_inst[i] + heat.q_inst[i - 1]) / (dx * dx);
        const double gq = grad_q / hw;
        out[i] = units.hbar * units.hbar / (4.0 * units.mass) * (lap_q / hw - 0.5 * gq * gq);
    }
    return out;
}

AnalyticWave make_wave(const WavefieldState& state, const Units& units) {
    AnalyticWave w;
    w.psi = [state, units](double x, double t) { return superpose(state, x, t, units).psi; };
    w.dpsi = [state, units](double x, double t) { return superpose(state, x, t, units).dpsi; };
    w.d2psi = [state, units](double x, double t) { return superpose(state, x, t, units).d2psi; };
    return w;
}

double hj_residual(const AnalyticWave& wave, const std::function<double(double)>& V,
                   const Units& units, double x, double t, double dt) {
    const std::complex<double> psi0 = wave.psi(x, t);
    const double R = std::abs(psi0);
    if (!(R > 0.0)) return kNaN;

    const std::complex<double> dpsi_dt = (wave.psi(x, t + dt) - wave.psi(x, t - dt)) / (2.0 * dt);
    const double dS_dt = units.hbar * std::imag(dpsi_dt / psi0);

    const std::complex<double> d1 = wave.dpsi(x, t);
    const std::complex<double> d2 = wave.d2psi(x, t);
    const double gradS = units.hbar * std::imag(d1 / psi0);
    const double gradR = std::real(std::conj(psi0) * d1) / R;
    const double lapR =
        (std::norm(d1) + std::real(std::conj(psi0) * d2) - gradR * gradR) / R;
    const double U = quantum_potential_R_form(R, lapR, units);
    return dS_dt + gradS * gradS / (2.0 * units.mass) + V(x) + U;
}

double continuity_residual(const AnalyticWave& wave, const Units& units, double x, double t,
                           double dt, double h) {
    auto P = [&](double xx, double tt) { return std::norm(wave.psi(xx, tt)); };
    auto J = [&](double xx, double tt) {
        return units.hbar / units.mass *
               std::imag(std::conj(wave.psi(xx, tt)) * wave.dpsi(xx, tt));
    };
    const double dP_dt = (P(x, t + dt) - P(x, t - dt)) / (2.0 * dt);
    const double dJ_dx = (J(x + h, t) - J(x - h, t)) / (2.0 * h);
    return dP_dt + dJ_dx;
}

namespace {

template <typename ResidualAt>
double residual_norm_impl(const AnalyticWave& wave, std::span<const double> xs, double t,
                          double mass, ResidualAt&& residual_at) {
    std::vector<double> P(xs.size());
    double pmax = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        P[i] = std::norm(wave.psi(xs[i], t));
        pmax = std::max(pmax, P[i]);
    }
    const IndexRange region = central_mass_region(P, mass);
    double worst = 0.0;
    for (std::size_t i = region.first; i <= region.last; ++i) {
        if (!(P[i] > 1e-12 * pmax)) continue;  // nodes excluded
        const double r = residual_at(xs[i]);
        if (std::isfinite(r)) worst = std::max(worst, std::abs(r));
    }
    return worst;
}

}  // namespace

double hj_residual_norm(const AnalyticWave& wave, const std::function<double(double)>& V,
                        const Units& units, std::span<const double> xs, double t, double dt,
                        double mass) {
    return residual_norm_impl(wave, xs, t, mass, [&](double x) {
        return hj_residual(wave, V, units, x, t, dt);
    });
}

double continuity_residual_norm(const AnalyticWave& wave, const Units& units,
                                std::span<const double> xs, double t, double dt, double h,
                                double mass) {
    return residual_norm_impl(wave, xs, t, mass, [&](double x) {
        return continuity_residual(wave, units, x, t, dt, h);
    });
}

}  // namespace diagnostics
}  // namespace nslit
