#pragma once

// Experiment runner behind the ckmlab command-line tool: JSON run
// configurations, frozen presets, and CSV/JSON artifact emission.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "ckm/cherry.hpp"
#include "ckm/integrator.hpp"
#include "ckm/sync.hpp"

namespace ckm::lab {

using json = nlohmann::json;

inline constexpr int schema_version = 1;

enum class Mode { simulate, period, equilibria, flowfield, blowup_demo, sweep, classify };

[[nodiscard]] const char *to_string(Mode m) noexcept;
/// Throws InvalidInput on an unknown name.
[[nodiscard]] Mode mode_from_string(const std::string &name);

/// Uniform random initial phases, x then y, each drawn from its range.
struct RandomInitial {
    std::pair<double, double> x_range{0.0, 0.0};
    std::pair<double, double> y_range{0.0, 0.0};
};

struct Grid {
    std::pair<double, double> x_range{0.0, 0.0};
    std::pair<double, double> y_range{0.0, 0.0};
    std::size_t nx = 0;
    std::size_t ny = 0;
    /// "cherry" samples (xdot, ydot); "homoclinic-invariant" samples the pair invariant.
    std::string field = "cherry";
};

struct RunConfig {
    Mode mode = Mode::simulate;
    std::string name;

    // Ensemble (simulate, classify).
    std::vector<double> omegas;
    // Frequency gap for the pair and Cherry reductions.
    double omega = 0.0;
    double lambda = 0.0;

    std::vector<double> x0;
    std::vector<double> y0;
    std::optional<RandomInitial> random_initial;
    std::uint64_t seed = 0;

    double horizon = 0.0;
    /// Integrate relative to the conserved mean phase (simulate).
    bool centered = true;
    ode::IntegratorConfig integrator;
    SyncThresholds thresholds;

    Grid grid;
    std::vector<double> sweep_lambdas;
    /// Trajectory CSV read by classify.
    std::string input;
};

/// Parses and validates a configuration document. Unknown keys, a missing or
/// wrong schema_version and inconsistent sizes throw InvalidInput.
[[nodiscard]] RunConfig parse_config(const json &doc);
[[nodiscard]] RunConfig load_config(const std::filesystem::path &path);
[[nodiscard]] json to_json(const RunConfig &cfg);

/// Mode-specific consistency checks; throws InvalidInput.
void validate(const RunConfig &cfg);

[[nodiscard]] std::vector<std::string> preset_names();
/// Throws InvalidInput for an unknown name.
[[nodiscard]] RunConfig preset(const std::string &name);

/// Initial phases (x, y) of an ensemble run: explicit, or drawn from the
/// seeded mt19937_64 stream as a + (b - a) * (u >> 11) * 2^-53.
[[nodiscard]] std::pair<std::vector<double>, std::vector<double>> initial_phases(const RunConfig &cfg);

struct RunOptions {
    std::filesystem::path out_dir = ".";
    unsigned workers = 1;
};

struct RunResult {
    std::vector<std::filesystem::path> artifacts;
    /// The main JSON report that was written.
    json report;
};

/// Executes the configuration and writes its artifacts into out_dir.
[[nodiscard]] RunResult run(const RunConfig &cfg, const RunOptions &options = {});

// Serialization shared with the tests.

[[nodiscard]] json to_json(const SyncReport &r);
[[nodiscard]] SyncReport sync_report_from_json(const json &j);
[[nodiscard]] json to_json(const cherry::EquilibriumRecord &r);

/// Writes header then one row per node, 17 significant digits.
void write_csv(const std::filesystem::path &path, const std::vector<std::string> &header,
               const std::vector<std::vector<double>> &rows);

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<double>> rows;
};

/// Reads a numeric CSV with a header line. Throws InvalidInput on ragged or
/// non-numeric rows, naming the line and column.
[[nodiscard]] CsvTable read_csv(const std::filesystem::path &path);

/// Columns t, x_1..x_N, y_1..y_N.
void write_trajectory_csv(const std::filesystem::path &path, const ode::Trajectory &traj);
/// Inverse of write_trajectory_csv; the result carries no derivatives and has
/// status completed at the last time.
[[nodiscard]] ode::Trajectory read_trajectory_csv(const std::filesystem::path &path);

[[nodiscard]] std::string format_double(double v);

} // namespace ckm::lab
