#pragma once

#include <cstdint>
#include <vector>

#include "billiard_thermo/random_stream.hpp"
#include "billiard_thermo/stats.hpp"
#include "billiard_thermo/thermostat.hpp"

namespace bt::heat {

enum class Wall { hot, cold };

/// A gas molecule bouncing between a hot and a cold thermostat wall. Both
/// walls have mass `wall_mass`; temperatures are wall_mass·σ².
struct HeatFlowConfig {
    double wall_mass = 10.0;
    double gas_mass = 1.0;
    double sigma2_hot = 20.0;
    double sigma2_cold = 1.0;
    std::int64_t n_collisions = 1000000;
    std::uint64_t seed = 1;
    bool keep_records = false;

    /// Throws std::invalid_argument (non-positive values, odd or tiny
    /// collision count, γ ≥ 1/√3).
    void validate() const;
    double temperature_hot() const noexcept { return wall_mass * sigma2_hot; }
    double temperature_cold() const noexcept { return wall_mass * sigma2_cold; }
};

struct HeatRecord {
    Wall wall = Wall::hot;
    double heat = 0.0;   // ½ m_g (u'² - u²)
    double speed = 0.0;  // gas speed after the collision
};

struct HeatFlowRun {
    std::vector<HeatRecord> records;  // only with keep_records
    std::vector<double> heat_hot;     // per hot collision, in order
    std::vector<double> heat_cold;
    stat::RunningStats speed_from_hot;  // leaving the hot wall
    stat::RunningStats speed_to_hot;    // leaving the cold wall, heading to the hot one
    stat::Histogram speed_hist_from_hot;
    stat::Histogram speed_hist_to_hot;
    double energy_start = 0.0;
    double energy_end = 0.0;

    double mean_hot() const;
    double mean_cold() const;
    /// Batch-means standard errors (20 batches).
    double se_hot() const;
    double se_cold() const;
    double total_heat() const;
};

/// Collisions alternate hot, cold, hot, ... The first one is with the hot
/// wall, and the incoming speed is drawn from the cold wall's stationary law.
/// Speed histograms span [0, 6·σ_hot/γ) in 60 bins.
HeatFlowRun run_heatflow(const HeatFlowConfig& config);

struct LinearityPoint {
    double sigma2_hot = 0.0;
    double delta_t = 0.0;  // T_hot - T_cold
    double mean_hot = 0.0;
    double se_hot = 0.0;
};

struct LinearityResult {
    double gamma = 0.0;
    std::vector<LinearityPoint> points;
    stat::LinearFit fit;  // mean Q^hot against ΔT
};

/// One chain per grid value of σ²_hot, chain i seeded with derive_seed(seed, i).
/// `temperature_shift` is added to both temperatures (σ² += shift / M_w).
/// Throws std::invalid_argument for fewer than 5 grid points or repeated values.
LinearityResult heat_linearity(double wall_mass, double gas_mass, double sigma2_cold,
                               const std::vector<double>& sigma2_hot_grid, std::int64_t n_per_point,
                               std::uint64_t seed, double temperature_shift = 0.0, unsigned threads = 1);

}  // namespace bt::heat
