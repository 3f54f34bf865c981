#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "billiard_thermo/chamber.hpp"
#include "billiard_thermo/engine.hpp"
#include "billiard_thermo/heatflow.hpp"
#include "billiard_thermo/parallelogram.hpp"

namespace bt::cli {

enum class ExperimentKind { chamber, parallelogram, thermostat, op, heatflow, engine, engine_sweep, hemisphere };

std::string_view kind_name(ExperimentKind kind) noexcept;
std::optional<ExperimentKind> parse_kind(std::string_view name) noexcept;
const std::vector<ExperimentKind>& all_kinds() noexcept;

struct ChamberSettings {
    billiard::ChamberGeometry geometry;
    std::int64_t entries = 1000000;
    std::int64_t expansion_particles = 0;  // 0 skips the ensemble run
    double t_max = 200.0;
    double sample_dt = 1.0;
    bool scattering_line = false;  // expansion model
};

struct ParallelogramSettings {
    billiard::ParallelogramGeometry geometry;
    std::int64_t crossings = 1000000;
    bool random_jumps = true;
    double vx = 0.54;  // initial direction, normalized on use
    double vy = 0.84;
};

struct ThermostatSettings {
    double wall_mass = 100.0;  // γ = 0.1 with unit gas mass
    double gas_mass = 1.0;
    double sigma2 = 1.0;
    std::int64_t steps = 1000000;
    std::int64_t burn_in = 1000;
    double initial_speed = 1.0;  // reduced speed
};

struct OperatorSettings {
    double wall_mass = 100.0;
    double gas_mass = 1.0;
    double sigma2 = 1.0;
    std::int64_t cells = 200;
    std::int64_t samples_per_row = 10000;
    std::int64_t steps = 50;
    double initial_speed = 3.0;  // point mass start, in units of σ
};

struct HeatflowSettings {
    heat::HeatFlowConfig run;
    std::vector<double> linearity_grid;  // σ²_hot values; empty skips the sweep
    std::int64_t linearity_collisions = 300000;
    double temperature_shift = 0.0;
};

struct EngineSettings {
    engine::EngineConfig run;
    EngineSettings() { run.sample_every = 1000; }
};

struct SweepSettings {
    engine::EngineConfig base;
    std::vector<double> forces;
    std::int64_t runs_per_force = 2000;
    SweepSettings();
};

struct HemisphereSettings {
    int dimension = 200;
    double sigma = 1.0;
    std::int64_t samples = 100000;
};

struct ExperimentConfig {
    ExperimentKind kind = ExperimentKind::engine;
    std::uint64_t seed = 1;
    std::int64_t replicas = 1;
    std::filesystem::path out = "out";
    unsigned threads = 0;  // 0: BT_THREADS or hardware concurrency

    ChamberSettings chamber;
    ParallelogramSettings parallelogram;
    ThermostatSettings thermostat;
    OperatorSettings op;
    HeatflowSettings heatflow;
    EngineSettings engine;
    SweepSettings sweep;
    HemisphereSettings hemisphere;

    /// Seed of replica r: the base seed for a single replica, derive_seed(seed, r) otherwise.
    std::uint64_t replica_seed(std::int64_t r) const noexcept;
};

/// Parses TOML text. Top-level keys: kind, seed, replicas, out, threads, plus
/// one table named after the experiment kind. When `expected` is given the
/// file's kind (if any) must agree with it. Every problem found is collected
/// into one ConfigError; syntax errors carry `source:line:column`.
ExperimentConfig parse_config_text(std::string_view text, std::string_view source,
                                   std::optional<ExperimentKind> expected = std::nullopt);
ExperimentConfig parse_config(const std::filesystem::path& path, std::optional<ExperimentKind> expected = std::nullopt);

/// Defaults for `kind` with nothing read from a file.
ExperimentConfig default_config(ExperimentKind kind);

/// All checks that do not depend on the file format. Returns the violations.
std::vector<std::string> validate(const ExperimentConfig& config);

/// Canonical TOML rendering of the settings that apply to `config.kind`,
/// defaults included.
std::string echo_config(const ExperimentConfig& config);

/// 64-bit FNV-1a.
std::uint64_t fnv1a64(std::string_view bytes) noexcept;

}  // namespace bt::cli
