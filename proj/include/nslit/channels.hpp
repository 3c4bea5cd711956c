#pragma once

#include <optional>
#include <span>
#include <vector>

#include "nslit/units.hpp"
#include "nslit/wavefield.hpp"

namespace nslit {

// Velocity-channel decomposition of an n-slit wavefield at one point.
//
// Each slit contributes three channels: the forward (phase-gradient) channel
// and an osmotic pair tied to the amplitude gradient. A channel carries a
// nonnegative amplitude, a unit vector w_hat in an abstract phase plane, and
// a transverse velocity w. The reference construction, with theta = S/hbar,
// v = gradS/m, u = -(hbar/m) gradR/R:
//
//   forward        amplitude R      w_hat at theta          velocity  v
//   osmotic_plus   amplitude R/2    w_hat at theta + pi/2   velocity +u
//   osmotic_minus  amplitude R/2    w_hat at theta - pi/2   velocity -u
//
// The osmotic pair is antiparallel with equal amplitudes, so it cancels in
// the amplitude vector sum but contributes to the current. This is the unique
// pairing (up to relabeling) whose total current reproduces the quantum
// mechanical current (hbar/m) Im(Psi* grad Psi).

enum class ChannelKind { forward, osmotic_plus, osmotic_minus };

struct Vec2 {
    double x = 0.0;
    double y = 0.0;
};

struct Channel {
    int slit_index = 0;
    ChannelKind kind = ChannelKind::forward;
    double amplitude = 0.0;  // >= 0
    double angle = 0.0;      // radians
    Vec2 w_hat{1.0, 0.0};    // unit vector; stored so osmotic pairs negate exactly
    double velocity = 0.0;
    bool angle_indeterminate = false;  // amplitude 0, excluded by zero weight

    static Channel make(int slit_index, ChannelKind kind, double amplitude, double angle,
                        double velocity);
};

// Immutable channel collection with the cached amplitude vector sum
// W = sum_i w_hat_i * amplitude_i. Osmotic plus/minus pairs that share a slit
// index are combined first when accumulating W, so an exactly antiparallel
// equal-amplitude pair contributes exactly zero.
class ChannelSystem {
  public:
    ChannelSystem() = default;
    explicit ChannelSystem(std::vector<Channel> channels, double node_threshold = 0.0);

    std::span<const Channel> channels() const { return channels_; }
    const Vec2& amplitude_sum() const { return wsum_; }
    double node_threshold() const { return node_threshold_; }

  private:
    std::vector<Channel> channels_;
    Vec2 wsum_;
    double node_threshold_ = 0.0;
};

// Builds the 3n reference channels for the field at (x, t). Slits whose
// amplitude underflows to zero contribute zero-amplitude channels flagged
// angle_indeterminate (a closed or far-away slit must not poison the sums).
ChannelSystem build_channels(const WavefieldState& state, double x, double t, const Units& units);

// Relational intensity P(w_i) = amplitude_i * (w_hat_i . W). Signed: an
// individual channel's projection may be negative; only the total is a
// probability density. Throws std::out_of_range on a bad index.
double relational_intensity(const ChannelSystem& sys, std::size_t i);

// P_tot = sum_i P(w_i) = |W|^2  (nonnegative by construction).
double total_intensity(const ChannelSystem& sys);

// J_tot = sum_i velocity_i * P(w_i).
double total_current(const ChannelSystem& sys);

// v_tot = J_tot / P_tot; empty when P_tot is at or below the node threshold.
std::optional<double> emergent_velocity(const ChannelSystem& sys);

// Double-slit closed form
//
//   v_tot = [R1^2 v1 + R2^2 v2 + R1 R2 (v1+v2) cos phi + R1 R2 (u1-u2) sin phi]
//           / [R1^2 + R2^2 + 2 R1 R2 cos phi]
//
// Under the sign convention phi = (S2 - S1)/hbar this equals the emergent
// velocity of the six-channel system (the sin cross term flips sign with the
// opposite phase-difference convention; the even cos terms do not care).
// Empty when the denominator is at or below `node_threshold`.
std::optional<double> double_slit_closed_form(double R1, double R2, double v1, double v2,
                                              double u1, double u2, double phi,
                                              double node_threshold = 0.0);

// n-slit intensity P = sum_i (R_i^2 + sum_{i'>i} 2 R_i R_i' cos(phi_i - phi_i')).
// Throws std::invalid_argument when the spans disagree in length.
double nslit_intensity(std::span<const double> amplitudes, std::span<const double> phases);

// Per-particle flux-line velocities for N independent (product-state)
// particles, each with its own channel system evaluated at its own
// coordinate. Equals each particle's own emergent velocity.
std::vector<std::optional<double>> emergent_velocity_nparticle(
    std::span<const ChannelSystem> systems);

// Aggregated N-particle ratio sum_j J_j / sum_j P_j. Diagnostic only: it is a
// single number, not the per-particle guidance law.
std::optional<double> aggregated_velocity_nparticle(std::span<const ChannelSystem> systems);

// Allocation-free evaluation of the channel construction at one point, for
// hot loops (trajectory integration, grid sweeps). Algebraically identical to
// build_channels + total_* on the same mode data.
struct PointFlow {
    double P = 0.0;             // total intensity
    double J = 0.0;             // total current
    std::optional<double> v;    // emergent velocity, empty at nodes
    double node_threshold = 0.0;
    double fringe_scale = std::numeric_limits<double>::infinity();
    int active_slits = 0;
};

PointFlow point_flow(const WavefieldState& state, double x, double t, const Units& units);

}  // namespace nslit
