// Config parsing: defaults, validation with key paths, unknown-key
// rejection, round-trip idempotence, and the preset registry.

#include <doctest.h>

#include <algorithm>

#include "nslit/config.hpp"
#include "support.hpp"

using namespace nslit;

namespace {

const char* kMinimalTwoSlit = R"({
  "slits": [{"center": -2.0, "sigma0": 0.5},
            {"center": 2.0, "sigma0": 0.5}],
  "time": {"t_screen": 4.0}
})";

}  // namespace

TEST_CASE("minimal two-slit config parses with documented defaults") {
    const ExperimentConfig cfg = parse_config(kMinimalTwoSlit);
    CHECK(cfg.slits.size() == 2);
    CHECK(cfg.units.hbar == 1.0);
    CHECK(cfg.units.mass == 1.0);
    CHECK(cfg.t0 == 0.0);
    CHECK(cfg.t_screen == 4.0);
    CHECK(cfg.integrator.dt == 1e-3);
    CHECK(cfg.ensemble_count == 1000);
    CHECK(cfg.seed == 1);
    CHECK(cfg.slits[0].v0 == 0.0);
    CHECK(cfg.slits[0].phase_offset == 0.0);
    CHECK(cfg.slits[0].birth_time == 0.0);
}

TEST_CASE("violations are reported together with their key paths") {
    const char* bad = R"({
      "slits": [{"center": 0.0, "sigma0": 0.0}],
      "time": {"t0": 2.0, "t_screen": 1.0},
      "units": {"hbar": -1.0},
      "integrator": {"dt": -0.5}
    })";
    try {
        parse_config(bad);
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        const auto& v = e.violations();
        auto mentions = [&](const std::string& needle) {
            return std::any_of(v.begin(), v.end(), [&](const std::string& s) {
                return s.find(needle) != std::string::npos;
            });
        };
        CHECK(mentions("slits[0].sigma0"));
        CHECK(mentions("time.t_screen"));
        CHECK(mentions("units.hbar"));
        CHECK(mentions("integrator.dt"));
        CHECK(v.size() >= 4);
    }
}

TEST_CASE("unknown keys are rejected by path") {
    const char* bad = R"({
      "slits": [{"center": 0.0, "sigma0": 0.5, "wobble": 1}],
      "time": {"t_screen": 1.0},
      "extra_section": {}
    })";
    try {
        parse_config(bad);
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        const std::string all = e.what();
        CHECK(all.find("slits[0].wobble") != std::string::npos);
        CHECK(all.find("extra_section") != std::string::npos);
    }
}

TEST_CASE("malformed JSON is a configuration error") {
    CHECK_THROWS_AS(parse_config("{ not json"), ConfigError);
}

TEST_CASE("slits and particles are mutually exclusive, one required") {
    CHECK_THROWS_AS(parse_config(R"({"time": {"t_screen": 1.0}})"), ConfigError);
    CHECK_THROWS_AS(parse_config(R"({
        "slits": [{"center": 0.0, "sigma0": 1.0}],
        "particles": [{"slits": [{"center": 0.0, "sigma0": 1.0}]}],
        "time": {"t_screen": 1.0}})"),
                    ConfigError);
}

TEST_CASE("event validation: no events before t0, close index must exist") {
    const char* before_t0 = R"({
      "slits": [{"center": 0.0, "sigma0": 0.5}],
      "time": {"t0": 1.0, "t_screen": 2.0},
      "events": [{"time": 0.5, "action": "open_slit",
                  "slit": {"center": 1.0, "sigma0": 0.5}}]
    })";
    CHECK_THROWS_AS(parse_config(before_t0), ConfigError);

    // after the screen is fine: the event is simply never reached
    const char* after_screen = R"({
      "slits": [{"center": 0.0, "sigma0": 0.5}],
      "time": {"t_screen": 2.0},
      "events": [{"time": 3.0, "action": "open_slit",
                  "slit": {"center": 1.0, "sigma0": 0.5}}]
    })";
    CHECK_NOTHROW(parse_config(after_screen));

    const char* bad_close = R"({
      "slits": [{"center": 0.0, "sigma0": 0.5}],
      "time": {"t_screen": 2.0},
      "events": [{"time": 1.0, "action": "close_slit", "slit_index": 4}]
    })";
    CHECK_THROWS_AS(parse_config(bad_close), ConfigError);

    const char* good = R"({
      "slits": [{"center": 0.0, "sigma0": 0.5}],
      "time": {"t_screen": 2.0},
      "events": [{"time": 1.0, "action": "open_slit",
                  "slit": {"center": 1.0, "sigma0": 0.5}},
                 {"time": 1.5, "action": "close_slit", "slit_index": 0}]
    })";
    const ExperimentConfig cfg = parse_config(good);
    const WavefieldState state = make_state(cfg);
    CHECK(state.modes_at(0.5).size() == 1);
    CHECK(state.modes_at(1.2).size() == 2);
    CHECK(state.modes_at(1.8).size() == 1);
    CHECK(state.modes_at(1.8)[0].center == doctest::Approx(1.0));
}

TEST_CASE("round trip: serialize(parse(text)) is semantically idempotent") {
    for (const auto& info : list_presets()) {
        const ExperimentConfig a = preset_config(info.name);
        const std::string text = serialize_config(a);
        const ExperimentConfig b = parse_config(text);
        CHECK(serialize_config(b) == text);
    }
    const ExperimentConfig a = parse_config(kMinimalTwoSlit);
    const ExperimentConfig b = parse_config(serialize_config(a));
    CHECK(serialize_config(a) == serialize_config(b));
}

TEST_CASE("preset registry") {
    const auto presets = list_presets();
    CHECK(presets.size() >= 6);
    for (const char* name :
         {"fig2", "fig3", "single-slit", "triple-slit", "switching", "two-particle"}) {
        CHECK(std::any_of(presets.begin(), presets.end(),
                          [&](const PresetInfo& p) { return p.name == name; }));
        CHECK_NOTHROW(preset_config(name));
    }
    CHECK_THROWS_AS(preset_config("no-such-preset"), ConfigError);

    SUBCASE("fig3 launches both slits with v0 = 0") {
        const ExperimentConfig cfg = preset_config("fig3");
        REQUIRE(cfg.slits.size() == 2);
        CHECK(cfg.slits[0].v0 == 0.0);
        CHECK(cfg.slits[1].v0 == 0.0);
    }

    SUBCASE("fig2 uses opposite launch velocities and smaller dispersion") {
        const ExperimentConfig f2 = preset_config("fig2");
        const ExperimentConfig f3 = preset_config("fig3");
        REQUIRE(f2.slits.size() == 2);
        CHECK(f2.slits[0].v0 == -f2.slits[1].v0);
        CHECK(f2.slits[0].v0 != 0.0);
        // slower spreading: larger sigma0
        CHECK(f2.slits[0].sigma0 > f3.slits[0].sigma0);
        // geometry is otherwise comparable: same separation magnitude
        CHECK(std::abs(std::abs(f2.slits[0].center - f2.slits[1].center) -
                       std::abs(f3.slits[0].center - f3.slits[1].center)) < 1e-12);
    }

    SUBCASE("switching preset opens the second slit mid-flight") {
        const ExperimentConfig cfg = preset_config("switching");
        REQUIRE(cfg.events.size() == 1);
        CHECK(cfg.events[0].action == SwitchingEvent::Action::open_slit);
        CHECK(cfg.events[0].time > cfg.t0);
        CHECK(cfg.events[0].time < cfg.t_screen);
    }

    SUBCASE("two-particle preset builds independent states") {
        const ExperimentConfig cfg = preset_config("two-particle");
        REQUIRE(cfg.multi_particle());
        REQUIRE(cfg.particles.size() == 2);
        const WavefieldState s0 = particle_state(cfg, 0);
        const WavefieldState s1 = particle_state(cfg, 1);
        CHECK(s0.base_modes().size() == 2);
        CHECK(s1.base_modes().size() == 2);
        CHECK_THROWS_AS(make_state(cfg), std::invalid_argument);
    }
}
