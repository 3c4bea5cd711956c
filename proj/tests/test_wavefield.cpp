// Analytic Gaussian mode fields checked against independent oracles:
// central finite differences for every gradient, trapezoid quadrature for
// normalization, and the closed-form spreading law sigma_t.

#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "nslit/stats.hpp"
#include "nslit/wavefield.hpp"
#include "support.hpp"

using namespace nslit;
using namespace nslit::test;

TEST_CASE("initial peak of a resting mode: R = (2 pi sigma0^2)^(-1/4), S = 0, gradS = 0") {
    const Units units;
    const GaussianSlitMode mode{1.25, 0.7, 0.0, 0.0, 0.0};
    const FieldSample s = evaluate_mode(mode, mode.center, mode.birth_time, units);
    CHECK(s.R == doctest::Approx(std::pow(2.0 * std::numbers::pi * 0.49, -0.25)).epsilon(1e-14));
    CHECK(s.S == doctest::Approx(0.0));
    CHECK(s.gradS == doctest::Approx(0.0));
    CHECK(s.gradR == doctest::Approx(0.0));
}

TEST_CASE("spreading law: sigma_t = sqrt(2) at t = 2 for sigma0 = 1 (hbar = m = 1)") {
    const Units units;
    const GaussianSlitMode mode{0.0, 1.0, 0.0, 0.0, 0.0};
    CHECK(mode_width(mode, 2.0, units) == doctest::Approx(std::sqrt(2.0)).epsilon(1e-14));
    // and generally sigma_t = sigma0 sqrt(1 + (hbar t / 2 m sigma0^2)^2)
    for (double t : {0.0, 0.5, 1.7, 4.0}) {
        const double a = t / 2.0;
        CHECK(mode_width(mode, t, units) ==
              doctest::Approx(std::sqrt(1.0 + a * a)).epsilon(1e-14));
    }
}

TEST_CASE("mode not yet born raises a domain error") {
    const Units units;
    const GaussianSlitMode mode{0.0, 1.0, 0.0, 0.0, 1.5};
    CHECK_THROWS_AS(evaluate_mode(mode, 0.0, 1.0, units), std::domain_error);
    CHECK_NOTHROW(evaluate_mode(mode, 0.0, 1.5, units));
}

TEST_CASE("analytic derivatives match central differences at second order") {
    Units units;
    units.hbar = 0.8;
    units.mass = 1.3;
    const GaussianSlitMode mode{0.4, 0.9, 0.35, 0.6, 0.1};
    std::mt19937_64 rng(1234);
    std::uniform_real_distribution<double> ux(-2.0, 3.0), ut(0.2, 3.0);

    for (int trial = 0; trial < 25; ++trial) {
        const double x = ux(rng);
        const double t = mode.birth_time + ut(rng);
        const FieldSample s = evaluate_mode(mode, x, t, units);
        auto Rf = [&](double xx) { return evaluate_mode(mode, xx, t, units).R; };
        auto Sf = [&](double xx) { return evaluate_mode(mode, xx, t, units).S; };

        // second-order convergence: error ratio ~ 4 when h halves
        const double h1 = 1e-3, h2 = 5e-4;
        const double eS1 = std::abs(central_diff(Sf, x, h1) - s.gradS);
        const double eS2 = std::abs(central_diff(Sf, x, h2) - s.gradS);
        if (eS1 > 1e-12) CHECK(eS2 < 0.4 * eS1);

        CHECK(rel_err(central_diff(Rf, x, 1e-5), s.gradR, 1e-9) < 1e-6);
        CHECK(rel_err(central_diff(Sf, x, 1e-5), s.gradS, 1e-9) < 1e-6);
        CHECK(rel_err(central_diff2(Rf, x, 1e-4), s.lapR, 1e-9) < 1e-5);
        CHECK(rel_err(central_diff(Sf, x + 1e-4, 1e-4) - central_diff(Sf, x - 1e-4, 1e-4),
                      2e-4 * s.lapS, 1e-12) < 1e-4);
    }
}

TEST_CASE("phase consistency: R exp(iS/hbar) reproduces the complex-route psi to 1e-12") {
    Units units;
    units.hbar = 1.7;
    units.mass = 0.6;
    const GaussianSlitMode mode{-0.8, 1.2, -0.4, 1.1, 0.25};
    std::mt19937_64 rng(99);
    std::uniform_real_distribution<double> ux(-6.0, 6.0), ut(0.0, 5.0);
    for (int trial = 0; trial < 200; ++trial) {
        const double x = ux(rng);
        const double t = mode.birth_time + ut(rng);
        const FieldSample s = evaluate_mode(mode, x, t, units);
        if (!(s.R > 1e-290)) continue;
        const std::complex<double> polar =
            s.R * std::exp(std::complex<double>(0.0, s.S / units.hbar));
        CHECK(std::abs(polar - s.psi) / s.R < 1e-12);
        CHECK(s.R == doctest::Approx(std::abs(s.psi)).epsilon(1e-12));
    }
}

TEST_CASE("unit normalization: integral of R^2 dx = 1 under quadrature") {
    const Units units;
    for (double t : {0.0, 1.0, 3.5}) {
        const GaussianSlitMode mode{0.7, 0.8, 0.3, 0.0, 0.0};
        const double w = mode_width(mode, t, units);
        const double c = mode.center + mode.v0 * t;
        const auto xs = linspace(c - 12.0 * w, c + 12.0 * w, 4001);
        std::vector<double> p(xs.size());
        for (std::size_t i = 0; i < xs.size(); ++i) {
            const double R = evaluate_mode(mode, xs[i], t, units).R;
            p[i] = R * R;
        }
        CHECK(std::abs(trapezoid(p, xs[1] - xs[0]) - 1.0) < 1e-8);
    }
}

TEST_CASE("superpose: single mode gives P = R^2 and v = gradS/m") {
    Units units;
    units.mass = 1.4;
    const WavefieldState state({GaussianSlitMode{0.3, 0.8, 0.2, 0.0, 0.0}});
    const Superposition sp = superpose(state, 1.1, 0.9, units);
    const FieldSample s = evaluate_mode(state.base_modes()[0], 1.1, 0.9, units);
    CHECK(rel_err(sp.P, s.R * s.R) < 1e-13);
    REQUIRE(sp.v_bohm.has_value());
    CHECK(rel_err(*sp.v_bohm, s.gradS / units.mass) < 1e-12);
}

TEST_CASE("superpose: two coincident equal-phase modes quadruple the intensity") {
    const Units units;
    const GaussianSlitMode mode{0.0, 1.0, 0.0, 0.0, 0.0};
    const WavefieldState one({mode});
    const WavefieldState two({mode, mode});
    for (double x : {0.0, 0.8, -1.7}) {
        const double p1 = superpose(one, x, 1.2, units).P;
        const double p4 = superpose(two, x, 1.2, units).P;
        CHECK(rel_err(p4, 4.0 * p1) < 1e-13);
    }
}

TEST_CASE("superpose: two-slit current matches its Madelung expansion") {
    // J = R1^2 v1 + R2^2 v2 + R1 R2 (v1+v2) cos phi
    //     + (hbar/m)(R2 gradR1 - R1 gradR2) sin phi,  phi = (S1 - S2)/hbar
    Units units;
    units.hbar = 0.9;
    units.mass = 1.2;
    const WavefieldState state = double_slit_state(4.0, 0.6, 0.15);
    std::mt19937_64 rng(2024);
    std::uniform_real_distribution<double> ux(-5.0, 5.0), ut(0.1, 4.0);
    for (int trial = 0; trial < 100; ++trial) {
        const double x = ux(rng), t = ut(rng);
        const auto& modes = state.modes_at(t);
        const FieldSample a = evaluate_mode(modes[0], x, t, units);
        const FieldSample b = evaluate_mode(modes[1], x, t, units);
        const double phi = (a.S - b.S) / units.hbar;
        const double v1 = a.gradS / units.mass, v2 = b.gradS / units.mass;
        const double expected = a.R * a.R * v1 + b.R * b.R * v2 +
                                a.R * b.R * (v1 + v2) * std::cos(phi) +
                                units.hbar / units.mass *
                                    (b.R * a.gradR - a.R * b.gradR) * std::sin(phi);
        const Superposition sp = superpose(state, x, t, units);
        CHECK(std::abs(sp.J - expected) <= 1e-12 * std::max(std::abs(expected), sp.P));
    }
}

TEST_CASE("superpose flags the velocity as undefined at a perfect node") {
    const Units units;
    // two coincident modes in antiphase cancel everywhere
    const WavefieldState state({GaussianSlitMode{0.0, 1.0, 0.0, 0.0, 0.0},
                                GaussianSlitMode{0.0, 1.0, 0.0, std::numbers::pi, 0.0}});
    const Superposition sp = superpose(state, 0.4, 0.0, units);
    CHECK(sp.P < 1e-25);
    CHECK_FALSE(sp.v_bohm.has_value());
}

TEST_CASE("switching events resolve into epochs by query time") {
    const GaussianSlitMode base{2.5, 0.5, 0.0, 0.0, 0.0};
    SwitchingEvent open;
    open.time = 1.5;
    open.action = SwitchingEvent::Action::open_slit;
    open.mode = GaussianSlitMode{-2.5, 0.5, 0.0, 0.0, 0.0};
    const WavefieldState state({base}, {open}, 0.0, 6.0);

    CHECK(state.modes_at(0.0).size() == 1);
    CHECK(state.modes_at(1.4999).size() == 1);
    CHECK(state.modes_at(1.5).size() == 2);
    CHECK(state.modes_at(6.0).size() == 2);
    // fresh_width: the opened mode is born at the event time
    CHECK(state.modes_at(2.0)[1].birth_time == doctest::Approx(1.5));

    SUBCASE("evolved_from_t0 keeps the configured birth time") {
        SwitchingEvent ev = open;
        ev.policy = SwitchingEvent::RebirthPolicy::evolved_from_t0;
        const WavefieldState st({base}, {ev}, 0.0, 6.0);
        CHECK(st.modes_at(2.0)[1].birth_time == doctest::Approx(0.0));
    }

    SUBCASE("closing a nonexistent slit is a configuration error") {
        SwitchingEvent bad;
        bad.time = 2.0;
        bad.action = SwitchingEvent::Action::close_slit;
        bad.slit_index = 7;
        CHECK_THROWS_AS(apply_switching_event(state, bad), std::invalid_argument);
    }

    SUBCASE("apply_switching_event returns a state with the extra epoch") {
        SwitchingEvent close;
        close.time = 3.0;
        close.action = SwitchingEvent::Action::close_slit;
        close.slit_index = 0;
        const WavefieldState st = apply_switching_event(state, close);
        CHECK(st.modes_at(2.0).size() == 2);
        CHECK(st.modes_at(3.0).size() == 1);
        CHECK(st.modes_at(3.0)[0].center == doctest::Approx(-2.5));
    }
}
