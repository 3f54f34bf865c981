#include "billiard_thermo/heatflow.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "billiard_thermo/parallel.hpp"

namespace bt::heat {

namespace {

constexpr std::size_t kBatches = 20;
constexpr std::size_t kSpeedBins = 60;

double mean_of(const std::vector<double>& xs) {
    if (xs.empty()) return 0.0;
    return std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
}

}  // namespace

void HeatFlowConfig::validate() const {
    if (!(wall_mass > 0.0) || !(gas_mass > 0.0)) throw std::invalid_argument("heatflow: masses must be positive");
    if (!(sigma2_hot > 0.0) || !(sigma2_cold > 0.0))
        throw std::invalid_argument("heatflow: wall variances must be positive");
    if (n_collisions < 2 * static_cast<std::int64_t>(kBatches) || n_collisions % 2 != 0)
        throw std::invalid_argument("heatflow: n_collisions must be even and at least 40");
    (void)thermo::coefficients(std::sqrt(gas_mass / wall_mass));
}

double HeatFlowRun::mean_hot() const { return mean_of(heat_hot); }
double HeatFlowRun::mean_cold() const { return mean_of(heat_cold); }
double HeatFlowRun::se_hot() const { return stat::batch_means_se(heat_hot, kBatches); }
double HeatFlowRun::se_cold() const { return stat::batch_means_se(heat_cold, kBatches); }
double HeatFlowRun::total_heat() const {
    return std::accumulate(heat_hot.begin(), heat_hot.end(), 0.0) +
           std::accumulate(heat_cold.begin(), heat_cold.end(), 0.0);
}

HeatFlowRun run_heatflow(const HeatFlowConfig& config) {
    config.validate();
    const thermo::ThermostatParams hot(config.wall_mass, config.gas_mass, config.sigma2_hot);
    const thermo::ThermostatParams cold(config.wall_mass, config.gas_mass, config.sigma2_cold);
    const double gamma = hot.gamma();
    const double top = 6.0 * std::sqrt(std::max(config.sigma2_hot, config.sigma2_cold)) / gamma;

    HeatFlowRun run{.records = {},
                    .heat_hot = {},
                    .heat_cold = {},
                    .speed_from_hot = {},
                    .speed_to_hot = {},
                    .speed_hist_from_hot = stat::Histogram::uniform(0.0, top, kSpeedBins),
                    .speed_hist_to_hot = stat::Histogram::uniform(0.0, top, kSpeedBins)};
    const auto half = static_cast<std::size_t>(config.n_collisions / 2);
    run.heat_hot.reserve(half);
    run.heat_cold.reserve(half);
    if (config.keep_records) run.records.reserve(static_cast<std::size_t>(config.n_collisions));

    stat::RandomStream stream(config.seed);
    // Reduced speed v = γ·u, so ½ m_g u² = ½ M_w v².
    double v = cold.sigma() * std::sqrt(-2.0 * std::log(stream.next_open_unit()));
    const double half_m = 0.5 * config.wall_mass;
    run.energy_start = half_m * v * v;
    for (std::int64_t i = 0; i < config.n_collisions; ++i) {
        const bool at_hot = i % 2 == 0;
        const double v_new = thermo::thermostat_step(stream, v, at_hot ? hot : cold);
        const double q = half_m * (v_new * v_new - v * v);
        const double u = v_new / gamma;
        if (at_hot) {
            run.heat_hot.push_back(q);
            run.speed_from_hot.add(u);
            run.speed_hist_from_hot.add(u);
        } else {
            run.heat_cold.push_back(q);
            run.speed_to_hot.add(u);
            run.speed_hist_to_hot.add(u);
        }
        if (config.keep_records) run.records.push_back({at_hot ? Wall::hot : Wall::cold, q, u});
        v = v_new;
    }
    run.energy_end = half_m * v * v;
    return run;
}

LinearityResult heat_linearity(double wall_mass, double gas_mass, double sigma2_cold,
                               const std::vector<double>& sigma2_hot_grid, std::int64_t n_per_point,
                               std::uint64_t seed, double temperature_shift, unsigned threads) {
    if (sigma2_hot_grid.size() < 5) throw std::invalid_argument("heat_linearity: need at least 5 grid points");
    std::vector<double> sorted = sigma2_hot_grid;
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
        throw std::invalid_argument("heat_linearity: repeated grid values");
    if (!(wall_mass > 0.0)) throw std::invalid_argument("heat_linearity: masses must be positive");

    const double shift = temperature_shift / wall_mass;
    LinearityResult out;
    out.gamma = std::sqrt(gas_mass / wall_mass);
    out.points.resize(sigma2_hot_grid.size());
    parallel_for(static_cast<std::int64_t>(sigma2_hot_grid.size()), threads, [&](std::int64_t i) {
        HeatFlowConfig c;
        c.wall_mass = wall_mass;
        c.gas_mass = gas_mass;
        c.sigma2_cold = sigma2_cold + shift;
        c.sigma2_hot = sigma2_hot_grid[static_cast<std::size_t>(i)] + shift;
        c.n_collisions = n_per_point;
        c.seed = stat::RandomStream::derive_seed(seed, static_cast<std::uint64_t>(i));
        const HeatFlowRun run = run_heatflow(c);
        LinearityPoint& p = out.points[static_cast<std::size_t>(i)];
        p.sigma2_hot = sigma2_hot_grid[static_cast<std::size_t>(i)];
        p.delta_t = c.temperature_hot() - c.temperature_cold();
        p.mean_hot = run.mean_hot();
        p.se_hot = run.se_hot();
    });
    std::vector<double> x, y;
    for (const auto& p : out.points) {
        x.push_back(p.delta_t);
        y.push_back(p.mean_hot);
    }
    out.fit = stat::fit_line(x, y);
    return out;
}

}  // namespace bt::heat
