#include "nslit/wavefield.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace nslit {

namespace {

std::vector<GaussianSlitMode> apply_event_to_modes(std::vector<GaussianSlitMode> modes,
                                                   const SwitchingEvent& ev) {
    if (ev.action == SwitchingEvent::Action::open_slit) {
        GaussianSlitMode m = ev.mode;
        if (ev.policy == SwitchingEvent::RebirthPolicy::fresh_width) m.birth_time = ev.time;
        modes.push_back(m);
    } else {
        if (ev.slit_index < 0 || ev.slit_index >= static_cast<int>(modes.size()))
            throw std::invalid_argument("close_slit: no slit with index " +
                                        std::to_string(ev.slit_index) + " at t=" +
                                        std::to_string(ev.time));
        modes.erase(modes.begin() + ev.slit_index);
    }
    return modes;
}

}  // namespace

WavefieldState::WavefieldState(std::vector<GaussianSlitMode> modes,
                               std::vector<SwitchingEvent> events,
                               double valid_from, double valid_to)
    : events_(std::move(events)), valid_from_(valid_from), valid_to_(valid_to) {
    for (const auto& m : modes)
        if (!(m.sigma0 > 0.0)) throw std::invalid_argument("slit sigma0 must be > 0");
    std::stable_sort(events_.begin(), events_.end(),
                     [](const SwitchingEvent& a, const SwitchingEvent& b) { return a.time < b.time; });
    epoch_start_.push_back(-std::numeric_limits<double>::infinity());
    epoch_modes_.push_back(std::move(modes));
    for (const auto& ev : events_) {
        if (ev.time < valid_from_ || ev.time > valid_to_)
            throw std::invalid_argument("switching event at t=" + std::to_string(ev.time) +
                                        " outside validity window");
        epoch_start_.push_back(ev.time);
        epoch_modes_.push_back(apply_event_to_modes(epoch_modes_.back(), ev));
    }
}

const std::vector<GaussianSlitMode>& WavefieldState::modes_at(double t) const {
    // last epoch whose start <= t
    auto it = std::upper_bound(epoch_start_.begin(), epoch_start_.end(), t);
    return epoch_modes_[static_cast<size_t>(it - epoch_start_.begin()) - 1];
}

std::vector<double> WavefieldState::event_times_between(double t_lo, double t_hi) const {
    std::vector<double> out;
    for (const auto& ev : events_)
        if (ev.time > t_lo && ev.time <= t_hi) out.push_back(ev.time);
    return out;
}

WavefieldState apply_switching_event(const WavefieldState& state, const SwitchingEvent& event) {
    std::vector<SwitchingEvent> events = state.events();
    events.push_back(event);
    // The constructor re-resolves epochs and validates the schedule.
    return WavefieldState(state.base_modes(), std::move(events),
                          state.valid_from(), state.valid_to());
}

double mode_width(const GaussianSlitMode& mode, double t, const Units& units) {
    const double tau = t - mode.birth_time;
    const double a = units.hbar * tau / (2.0 * units.mass * mode.sigma0 * mode.sigma0);
    return mode.sigma0 * std::sqrt(1.0 + a * a);
}

FieldSample evaluate_mode(const GaussianSlitMode& mode, double x, double t, const Units& units) {
    if (t < mode.birth_time) throw std::domain_error("mode not yet born (t < birth_time)");

    const double hbar = units.hbar;
    const double m = units.mass;
    const double s0 = mode.sigma0;
    const double tau = t - mode.birth_time;
    const double a = hbar * tau / (2.0 * m * s0 * s0);  // dimensionless spreading parameter
    const double st2 = s0 * s0 * (1.0 + a * a);         // sigma_t^2
    const double xi = x - mode.center - mode.v0 * tau;

    FieldSample out;
    out.R = std::pow(2.0 * std::numbers::pi * st2, -0.25) * std::exp(-xi * xi / (4.0 * st2));
    out.S = hbar * (a * xi * xi / (4.0 * st2) - 0.5 * std::atan(a) + mode.phase_offset) +
            m * mode.v0 * (xi + 0.5 * mode.v0 * tau);
    out.gradR = -out.R * xi / (2.0 * st2);
    out.gradS = hbar * a * xi / (2.0 * st2) + m * mode.v0;
    out.lapR = out.R * (xi * xi / (4.0 * st2 * st2) - 1.0 / (2.0 * st2));
    out.lapS = hbar * a / (2.0 * st2);

    // Independent complex route through the principal branch; arg(s_t^2) stays
    // in [0, pi) for tau >= 0, so the branch is continuous.
    const std::complex<double> i1(0.0, 1.0);
    const std::complex<double> st = s0 * (1.0 + i1 * a);
    const std::complex<double> pref = std::pow(2.0 * std::numbers::pi * st * st, -0.25);
    const std::complex<double> expo =
        -xi * xi / (4.0 * s0 * st) +
        i1 * (m * mode.v0 * (xi + 0.5 * mode.v0 * tau) / hbar + mode.phase_offset);
    out.psi = pref * std::exp(expo);
    return out;
}

Superposition superpose(const WavefieldState& state, double x, double t, const Units& units) {
    const double hbar = units.hbar;
    Superposition out;
    for (const auto& mode : state.modes_at(t)) {
        const FieldSample s = evaluate_mode(mode, x, t, units);
        const double theta = s.S / hbar;
        const std::complex<double> phase(std::cos(theta), std::sin(theta));
        const std::complex<double> ih(0.0, 1.0 / hbar);
        out.psi += s.R * phase;
        out.dpsi += (s.gradR + ih * s.R * s.gradS) * phase;
        out.d2psi += (s.lapR + ih * (2.0 * s.gradR * s.gradS + s.R * s.lapS) -
                      s.R * s.gradS * s.gradS / (hbar * hbar)) *
                     phase;
        out.sumR += s.R;
    }
    out.P = std::norm(out.psi);
    out.gradP = 2.0 * std::real(std::conj(out.psi) * out.dpsi);
    out.J = hbar / units.mass * std::imag(std::conj(out.psi) * out.dpsi);
    out.node_threshold = kNodeRelThreshold * out.sumR * out.sumR;
    if (out.P > out.node_threshold) out.v_bohm = out.J / out.P;
    return out;
}

}  // namespace nslit
