#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "nslit/config.hpp"

namespace nslit {

// Raised when the oracle-divergence guard trips; mapped to exit code 2.
class GuardError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

struct RunOptions {
    std::string out_dir;       // overrides config.outputs.directory when nonempty
    bool has_seed = false;
    std::uint64_t seed = 0;    // overrides config seed when has_seed
    int threads = 0;           // 0: library default
    bool check_oracle = false; // abort (exit 2) on channel/oracle disagreement
    bool emit_fields = false;  // in addition to config.outputs.emit_fields
};

struct ArtifactEntry {
    std::string name;
    std::uint64_t bytes = 0;
    std::string fnv1a64_hex;
};

struct RunManifest {
    std::string tool = "nslit";
    std::string version;
    std::uint64_t seed = 0;
    int threads = 0;
    std::vector<ArtifactEntry> artifacts;
    std::string config_echo;       // canonical serialization of the resolved config
    double elapsed_seconds = 0.0;  // excluded from reproducibility comparisons

    // summary statistics (filled per run)
    std::size_t flagged_trajectories = 0;
    double hj_residual_norm = 0.0;
    double continuity_residual_norm = 0.0;
    double oracle_velocity_deviation = -1.0;  // -1: guard not run
    std::vector<std::string> momentum_kick_summary;
};

// Runs the configured scenario: samples the ensemble, integrates it,
// writes trajectories.csv / histogram.csv (+ fields.csv, momentum_kicks.csv,
// diagnostics.csv) and manifest.json into the output directory. Data
// artifacts are byte-reproducible for a fixed config and seed, independent of
// thread count. Throws ConfigError for configuration problems and GuardError
// when --check-oracle trips.
RunManifest run_scenario(const ExperimentConfig& config, const RunOptions& options = {});

// Diagnostics report for a config without running an ensemble: residual and
// quantum-potential tables (diagnostics.csv) plus a printed summary block.
// Returns the summary text.
std::string run_diagnostics(const ExperimentConfig& config, const RunOptions& options = {});

std::string version_string();

}  // namespace nslit
