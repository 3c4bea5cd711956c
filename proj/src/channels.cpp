#include "nslit/channels.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace nslit {

Channel Channel::make(int slit_index, ChannelKind kind, double amplitude, double angle,
                      double velocity) {
    Channel c;
    c.slit_index = slit_index;
    c.kind = kind;
    c.amplitude = amplitude;
    c.angle = angle;
    c.w_hat = Vec2{std::cos(angle), std::sin(angle)};
    c.velocity = velocity;
    return c;
}

ChannelSystem::ChannelSystem(std::vector<Channel> channels, double node_threshold)
    : channels_(std::move(channels)), node_threshold_(node_threshold) {
    // Combine each slit's osmotic pair before folding into the running sum;
    // exactly antiparallel equal-amplitude pairs then cancel to exactly 0.
    std::vector<char> used(channels_.size(), 0);
    for (std::size_t i = 0; i < channels_.size(); ++i) {
        if (used[i]) continue;
        const Channel& a = channels_[i];
        if (a.kind == ChannelKind::forward) {
            wsum_.x += a.amplitude * a.w_hat.x;
            wsum_.y += a.amplitude * a.w_hat.y;
            continue;
        }
        const ChannelKind partner_kind = (a.kind == ChannelKind::osmotic_plus)
                                             ? ChannelKind::osmotic_minus
                                             : ChannelKind::osmotic_plus;
        std::size_t partner = channels_.size();
        for (std::size_t j = i + 1; j < channels_.size(); ++j) {
            if (!used[j] && channels_[j].kind == partner_kind &&
                channels_[j].slit_index == a.slit_index) {
                partner = j;
                break;
            }
        }
        if (partner == channels_.size()) {
            wsum_.x += a.amplitude * a.w_hat.x;
            wsum_.y += a.amplitude * a.w_hat.y;
        } else {
            const Channel& b = channels_[partner];
            used[partner] = 1;
            wsum_.x += a.amplitude * a.w_hat.x + b.amplitude * b.w_hat.x;
            wsum_.y += a.amplitude * a.w_hat.y + b.amplitude * b.w_hat.y;
        }
    }
}

ChannelSystem build_channels(const WavefieldState& state, double x, double t,
                             const Units& units) {
    const auto& modes = state.modes_at(t);
    std::vector<Channel> channels;
    channels.reserve(3 * modes.size());
    double sumR = 0.0;
    for (int i = 0; i < static_cast<int>(modes.size()); ++i) {
        const FieldSample s = evaluate_mode(modes[i], x, t, units);
        if (!(s.R > 0.0)) {
            for (ChannelKind k : {ChannelKind::forward, ChannelKind::osmotic_plus,
                                  ChannelKind::osmotic_minus}) {
                Channel c;
                c.slit_index = i;
                c.kind = k;
                c.angle_indeterminate = true;
                channels.push_back(c);
            }
            continue;
        }
        sumR += s.R;
        const double theta = s.S / units.hbar;
        const double ct = std::cos(theta);
        const double st = std::sin(theta);
        const double v = s.gradS / units.mass;
        const double u = -(units.hbar / units.mass) * s.gradR / s.R;
        constexpr double half_pi = std::numbers::pi / 2.0;

        Channel fwd;
        fwd.slit_index = i;
        fwd.kind = ChannelKind::forward;
        fwd.amplitude = s.R;
        fwd.angle = theta;
        fwd.w_hat = Vec2{ct, st};
        fwd.velocity = v;
        channels.push_back(fwd);

        Channel plus;
        plus.slit_index = i;
        plus.kind = ChannelKind::osmotic_plus;
        plus.amplitude = 0.5 * s.R;
        plus.angle = theta + half_pi;
        plus.w_hat = Vec2{-st, ct};  // rotation by +pi/2, exact antipode of the minus channel
        plus.velocity = u;
        channels.push_back(plus);

        Channel minus;
        minus.slit_index = i;
        minus.kind = ChannelKind::osmotic_minus;
        minus.amplitude = 0.5 * s.R;
        minus.angle = theta - half_pi;
        minus.w_hat = Vec2{st, -ct};
        minus.velocity = -u;
        channels.push_back(minus);
    }
    return ChannelSystem(std::move(channels), kNodeRelThreshold * sumR * sumR);
}

double relational_intensity(const ChannelSystem& sys, std::size_t i) {
    if (i >= sys.channels().size()) throw std::out_of_range("channel index out of range");
    const Channel& c = sys.channels()[i];
    const Vec2& w = sys.amplitude_sum();
    return c.amplitude * (c.w_hat.x * w.x + c.w_hat.y * w.y);
}

double total_intensity(const ChannelSystem& sys) {
    const Vec2& w = sys.amplitude_sum();
    return w.x * w.x + w.y * w.y;
}

double total_current(const ChannelSystem& sys) {
    const Vec2& w = sys.amplitude_sum();
    double j = 0.0;
    for (const Channel& c : sys.channels())
        j += c.velocity * (c.amplitude * (c.w_hat.x * w.x + c.w_hat.y * w.y));
    return j;
}

std::optional<double> emergent_velocity(const ChannelSystem& sys) {
    const double p = total_intensity(sys);
    if (!(p > sys.node_threshold()) || p == 0.0) return std::nullopt;
    return total_current(sys) / p;
}

std::optional<double> double_slit_closed_form(double R1, double R2, double v1, double v2,
                                              double u1, double u2, double phi,
                                              double node_threshold) {
    const double c = std::cos(phi);
    const double s = std::sin(phi);
    const double den = R1 * R1 + R2 * R2 + 2.0 * R1 * R2 * c;
    if (!(den > node_threshold) || den == 0.0) return std::nullopt;
    const double num = R1 * R1 * v1 + R2 * R2 * v2 + R1 * R2 * (v1 + v2) * c +
                       R1 * R2 * (u1 - u2) * s;
    return num / den;
}

double nslit_intensity(std::span<const double> amplitudes, std::span<const double> phases) {
    if (amplitudes.size() != phases.size())
        throw std::invalid_argument("nslit_intensity: amplitude/phase count mismatch");
    double p = 0.0;
    for (std::size_t i = 0; i < amplitudes.size(); ++i) {
        p += amplitudes[i] * amplitudes[i];
        for (std::size_t j = i + 1; j < amplitudes.size(); ++j)
            p += 2.0 * amplitudes[i] * amplitudes[j] * std::cos(phases[i] - phases[j]);
    }
    return p;
}

std::vector<std::optional<double>> emergent_velocity_nparticle(
    std::span<const ChannelSystem> systems) {
    std::vector<std::optional<double>> out;
    out.reserve(systems.size());
    for (const ChannelSystem& sys : systems) out.push_back(emergent_velocity(sys));
    return out;
}

std::optional<double> aggregated_velocity_nparticle(std::span<const ChannelSystem> systems) {
    double p = 0.0, j = 0.0, thr = 0.0;
    for (const ChannelSystem& sys : systems) {
        p += total_intensity(sys);
        j += total_current(sys);
        thr += sys.node_threshold();
    }
    if (!(p > thr) || p == 0.0) return std::nullopt;
    return j / p;
}

PointFlow point_flow(const WavefieldState& state, double x, double t, const Units& units) {
    const auto& modes = state.modes_at(t);
    const std::size_t n = modes.size();

    struct ModeTerm {
        double R, c, s, v, u;
    };
    // Fixed scratch covers any realistic slit count without touching the heap.
    constexpr std::size_t kStack = 16;
    ModeTerm stack_terms[kStack];
    std::vector<ModeTerm> heap_terms;
    ModeTerm* terms = stack_terms;
    if (n > kStack) {
        heap_terms.resize(n);
        terms = heap_terms.data();
    }

    PointFlow out;
    double wx = 0.0, wy = 0.0, sumR = 0.0;
    double vmin = 0.0, vmax = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const FieldSample s = evaluate_mode(modes[i], x, t, units);
        if (!(s.R > 0.0)) {
            terms[i] = ModeTerm{0.0, 0.0, 0.0, 0.0, 0.0};
            continue;
        }
        const double theta = s.S / units.hbar;
        const ModeTerm m{s.R, std::cos(theta), std::sin(theta), s.gradS / units.mass,
                         -(units.hbar / units.mass) * s.gradR / s.R};
        terms[i] = m;
        wx += m.R * m.c;
        wy += m.R * m.s;
        sumR += m.R;
        if (out.active_slits == 0) {
            vmin = vmax = m.v;
        } else {
            vmin = std::min(vmin, m.v);
            vmax = std::max(vmax, m.v);
        }
        ++out.active_slits;
    }

    out.P = wx * wx + wy * wy;
    out.node_threshold = kNodeRelThreshold * sumR * sumR;
    double j = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const ModeTerm& m = terms[i];
        if (m.R == 0.0) continue;
        const double p_fwd = m.R * (m.c * wx + m.s * wy);
        const double p_plus = 0.5 * m.R * (-m.s * wx + m.c * wy);
        // osmotic pair: velocities +-u against projections +-p_plus
        j += m.v * p_fwd + 2.0 * m.u * p_plus;
    }
    out.J = j;
    if (out.P > out.node_threshold && out.P > 0.0) out.v = out.J / out.P;

    // Local fringe scale 2 pi hbar / (m * max|v_i - v_j|): the beat length of
    // the fastest pair of interfering phase gradients.
    if (out.active_slits >= 2 && vmax > vmin)
        out.fringe_scale = 2.0 * std::numbers::pi * units.hbar / (units.mass * (vmax - vmin));
    return out;
}

}  // namespace nslit
