#pragma once

#include <complex>
#include <limits>
#include <optional>
#include <vector>

#include "nslit/units.hpp"

namespace nslit {

// One slit's emitted wavepacket: a normalized free Gaussian mode
//
//   psi(x,t) = (2 pi s_t^2)^(-1/4)
//              * exp[ -xi^2/(4 sigma0 s_t) + i m v0 (xi + v0 tau/2)/hbar + i phase_offset ],
//   xi  = x - center - v0 tau,   tau = t - birth_time,
//   s_t = sigma0 (1 + i hbar tau / (2 m sigma0^2)).
//
// The real width |s_t| grows monotonically; at tau = 0 the intensity is a
// Gaussian of standard deviation sigma0 centered on `center`.
struct GaussianSlitMode {
    double center = 0.0;
    double sigma0 = 1.0;   // initial width, > 0
    double v0 = 0.0;       // transverse group velocity
    double phase_offset = 0.0;  // radians
    double birth_time = 0.0;
};

// Pointwise Madelung data of a single mode: psi = R exp(i S / hbar) plus the
// closed-form spatial derivatives (nothing here is finite-differenced).
// `psi` is evaluated through the complex exponential route, independently of
// the (R, S) pair, so R * exp(i S/hbar) == psi is a meaningful consistency
// check rather than a tautology.
struct FieldSample {
    std::complex<double> psi;
    double R = 0.0;      // amplitude |psi|
    double S = 0.0;      // action, smooth branch (S/hbar == arg psi mod 2pi)
    double gradR = 0.0;
    double gradS = 0.0;
    double lapR = 0.0;
    double lapS = 0.0;
};

// A slit opening or closing at a fixed time. `open_slit` inserts a new mode;
// `close_slit` removes the mode at `slit_index` (index into the mode list
// active just before the event). With the fresh_width policy the opened mode
// is re-born at the event time with its configured sigma0; evolved_from_t0
// keeps the mode's own birth_time, as if it had been evolving all along.
struct SwitchingEvent {
    enum class Action { open_slit, close_slit };
    enum class RebirthPolicy { fresh_width, evolved_from_t0 };

    double time = 0.0;
    Action action = Action::open_slit;
    GaussianSlitMode mode;   // used by open_slit
    int slit_index = 0;      // used by close_slit
    RebirthPolicy policy = RebirthPolicy::fresh_width;
};

// Immutable mode collection with a switching schedule. The active mode list
// at query time t reflects every event with time <= t; the event schedule is
// resolved into epochs at construction so field queries stay cheap and the
// state can be shared freely across threads.
class WavefieldState {
  public:
    WavefieldState() : WavefieldState(std::vector<GaussianSlitMode>{}) {}
    WavefieldState(std::vector<GaussianSlitMode> modes,
                   std::vector<SwitchingEvent> events = {},
                   double valid_from = 0.0,
                   double valid_to = std::numeric_limits<double>::infinity());

    const std::vector<GaussianSlitMode>& modes_at(double t) const;
    const std::vector<GaussianSlitMode>& base_modes() const { return epoch_modes_.front(); }
    const std::vector<SwitchingEvent>& events() const { return events_; }
    double valid_from() const { return valid_from_; }
    double valid_to() const { return valid_to_; }

    // Event times in (t_lo, t_hi], ascending; used to split integration steps.
    std::vector<double> event_times_between(double t_lo, double t_hi) const;

  private:
    std::vector<SwitchingEvent> events_;
    std::vector<double> epoch_start_;                      // epoch_start_[0] == -inf
    std::vector<std::vector<GaussianSlitMode>> epoch_modes_;
    double valid_from_ = 0.0;
    double valid_to_ = std::numeric_limits<double>::infinity();
};

// Returns a copy of `state` with `event` inserted into the schedule.
// Throws std::invalid_argument if the event time is outside the state's
// validity window or if it closes a slit that does not exist at that time.
WavefieldState apply_switching_event(const WavefieldState& state, const SwitchingEvent& event);

// Analytic evaluation of one mode. Throws std::domain_error if t < birth_time.
FieldSample evaluate_mode(const GaussianSlitMode& mode, double x, double t, const Units& units);

// Real width sigma_t = sigma0 sqrt(1 + (hbar tau / (2 m sigma0^2))^2).
double mode_width(const GaussianSlitMode& mode, double t, const Units& units);

// Superposition Psi = sum_a R_a exp(i S_a/hbar) assembled from the per-mode
// Madelung data, with analytic first and second spatial derivatives.
struct Superposition {
    std::complex<double> psi{0.0, 0.0};
    std::complex<double> dpsi{0.0, 0.0};   // d/dx
    std::complex<double> d2psi{0.0, 0.0};  // d^2/dx^2
    double P = 0.0;                        // |Psi|^2
    double gradP = 0.0;
    double J = 0.0;                        // (hbar/m) Im(Psi* dPsi)
    std::optional<double> v_bohm;          // J/P, empty below the node threshold
    double sumR = 0.0;                     // sum of mode amplitudes at this point
    double node_threshold = 0.0;           // 1e-12 * (sum R)^2
};

Superposition superpose(const WavefieldState& state, double x, double t, const Units& units);

// Node cutoff: velocities are meaningless where P falls below this fraction
// of the largest intensity the local mode amplitudes could produce.
inline constexpr double kNodeRelThreshold = 1e-12;

}  // namespace nslit
