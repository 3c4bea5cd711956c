#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "nslit/dynamics.hpp"
#include "nslit/units.hpp"
#include "nslit/wavefield.hpp"

namespace nslit {

// Configuration error carrying every violation found, each prefixed with the
// offending key path. Mapped to exit code 1 by the CLI.
class ConfigError : public std::runtime_error {
  public:
    explicit ConfigError(std::vector<std::string> violations);
    const std::vector<std::string>& violations() const { return violations_; }

  private:
    std::vector<std::string> violations_;
};

struct GridSpec {
    double x_min = 0.0;   // x_min == x_max: derive the range from the slits
    double x_max = 0.0;
    std::size_t points = 512;
    std::size_t time_points = 64;
};

struct OutputSpec {
    std::string directory = "out";
    bool emit_fields = false;
    std::size_t trajectory_count = 200;  // full paths written to trajectories.csv
    int sample_stride = 4;               // every k-th integrator step recorded
};

// One independent particle of a product state: its own slits and mass.
struct ParticleSpec {
    std::vector<GaussianSlitMode> slits;
    double mass = 1.0;
};

struct ExperimentConfig {
    Units units;
    std::vector<GaussianSlitMode> slits;     // single-particle runs
    std::vector<ParticleSpec> particles;     // multi-particle runs (excludes `slits`)
    double t0 = 0.0;
    double t_screen = 1.0;
    IntegratorSettings integrator;
    std::size_t ensemble_count = 1000;
    std::uint64_t seed = 1;
    std::vector<SwitchingEvent> events;
    GridSpec grid;
    std::size_t screen_bins = 128;
    OutputSpec outputs;

    bool multi_particle() const { return !particles.empty(); }
};

// Parses and fully validates a JSON config document. Unknown keys, malformed
// text, and out-of-range values are all reported together in one ConfigError.
ExperimentConfig parse_config(const std::string& text);

// Canonical JSON serialization; parse(serialize(parse(text))) is idempotent.
std::string serialize_config(const ExperimentConfig& config);

// Wavefield (modes + events over [t0, t_screen]) described by the config.
// For multi-particle configs use particle_state(config, j).
WavefieldState make_state(const ExperimentConfig& config);
WavefieldState particle_state(const ExperimentConfig& config, std::size_t j);
Units particle_units(const ExperimentConfig& config, std::size_t j);

struct PresetInfo {
    std::string name;
    std::string description;
};

// Built-in scenario presets (each parses through parse_config unchanged).
std::vector<PresetInfo> list_presets();
ExperimentConfig preset_config(const std::string& name);  // throws ConfigError if unknown
std::string preset_text(const std::string& name);

}  // namespace nslit
