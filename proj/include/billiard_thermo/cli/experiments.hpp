#pragma once

#include <cstdint>
#include <filesystem>
#include <ostream>
#include <vector>

#include "billiard_thermo/cli/config.hpp"
#include "billiard_thermo/cli/csv.hpp"

namespace bt::cli {

inline constexpr int kCsvSchemaVersion = 1;

struct ExperimentResult {
    std::vector<std::filesystem::path> files;  // CSVs, in write order
    Metadata summary;                          // replica-prefixed when replicas > 1
    std::vector<std::uint64_t> replica_seeds;
    std::filesystem::path manifest;
    double wall_seconds = 0.0;
    unsigned threads = 1;
};

/// Runs every replica of `config` and writes its CSVs plus `manifest.toml`
/// into `config.out`. Replica r writes `<name>.csv` when there is a single
/// replica and `<name>_r<r>.csv` otherwise. CSV bytes depend only on the
/// resolved config and seed; timing goes to the manifest alone.
/// Throws ConfigError for invalid configs and propagates module errors.
ExperimentResult run_experiment(const ExperimentConfig& config, std::ostream* log = nullptr);

}  // namespace bt::cli
