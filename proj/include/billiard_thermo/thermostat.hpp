#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "billiard_thermo/random_stream.hpp"

namespace bt::thermo {

/// Upper bound on gamma = sqrt(m_gas / m_wall): 1/sqrt(3).
inline constexpr double kGammaMax = 0.57735026918962576451;

struct MapCoefficients {
    double a = 1.0;
    double b = 0.0;
    double abar = 1.0;
    double bbar = 0.0;
};

/// a = (1-γ²)/(1+γ²), b = 2γ/(1+γ²), ā = (1-6γ²+γ⁴)/(1+γ²)², b̄ = 4γ(1-γ²)/(1+γ²)².
/// Throws std::invalid_argument unless 0 < γ < 1/√3.
MapCoefficients coefficients(double gamma);

/// One thermostat wall and its gas partner.
///
/// Speeds handled by the map are in reduced units: v = γ·(gas speed), so that
/// the gas kinetic energy is ½·m_wall·v². Wall velocities w are physical and
/// distributed N(0, σ²). The stationary law of v is then 1 - exp(-v²/2σ²).
class ThermostatParams {
public:
    /// Throws std::invalid_argument on non-positive inputs or γ ≥ 1/√3.
    ThermostatParams(double wall_mass, double gas_mass, double sigma2, double length = 1.0);
    static ThermostatParams from_temperature(double wall_mass, double gas_mass, double temperature,
                                             double length = 1.0);

    double wall_mass() const noexcept { return wall_mass_; }
    double gas_mass() const noexcept { return gas_mass_; }
    double gamma() const noexcept { return gamma_; }
    double alpha() const noexcept { return alpha_; }
    double sigma2() const noexcept { return sigma2_; }
    double sigma() const noexcept { return sigma_; }
    double temperature() const noexcept { return wall_mass_ * sigma2_; }
    double length() const noexcept { return length_; }
    /// l·sqrt(m_gas/(m_wall + m_gas)).
    double reduced_length() const noexcept;
    const MapCoefficients& coeffs() const noexcept { return coeffs_; }

    double to_reduced(double gas_speed) const noexcept { return gamma_ * gas_speed; }
    double to_gas_speed(double reduced) const noexcept { return reduced / gamma_; }

private:
    double wall_mass_;
    double gas_mass_;
    double gamma_;
    double alpha_;
    double sigma2_;
    double sigma_;
    double length_;
    MapCoefficients coeffs_;
};

enum class Branch { F1 = 1, F2 = 2, F3 = 3 };

/// i with v/w_abs in (tan((i-1)α), tan(iα)] for i ≤ 3, otherwise 4.
int partition_index(double v, double w_abs, double alpha);

struct BranchProbabilities {
    double p = 0.0;
    double q = 0.0;
};

/// p = γ·|w|/v and q = 2(1-γ²)/(1+γ²) - (4γ/(1+γ²))·|w|/v, clamped into [0,1]
/// (and p+q ≤ 1 on I₃) when the excess is at most 1e-10. Throws
/// InvariantViolation for larger excursions on the partition cells where they
/// are used.
BranchProbabilities branch_probabilities(double v, double w_abs, double gamma, int partition);

double branch_value(Branch branch, double v, double w_abs, const MapCoefficients& c) noexcept;

struct BranchDraw {
    int partition = 0;  // 0 when w ≥ 0
    Branch branch = Branch::F1;
    double p = 0.0;
    double q = 0.0;
    double w = 0.0;
    double v_out = 0.0;
};

/// The random map F^w with its randomness made explicit: w is the wall
/// velocity and u ∈ [0,1) selects the branch (F1 if u < p, then F2 with
/// probability q on I₃, ...). Throws InvariantViolation if v' ≤ 0.
BranchDraw thermostat_map(double v, double w, double u, const ThermostatParams& params);

/// Draws w ~ N(0, σ²) and a uniform branch selector, then applies the map.
/// Always consumes the same number of random draws.
BranchDraw thermostat_draw(stat::RandomStream& stream, double v, const ThermostatParams& params);
double thermostat_step(stat::RandomStream& stream, double v, const ThermostatParams& params);

struct OracleResult {
    double v_out = 0.0;  // reduced units
    int collisions = 0;
    int wall_bounces = 0;
    double gas_energy_change = 0.0;
    double wall_energy_change = 0.0;
};

/// Deterministic two-mass interaction on [0, l]: the wall mass starts at
/// position r with velocity w and reflects at 0; the gas enters at l moving
/// left with reduced speed v and the run ends when the gas leaves through l.
/// Throws InvariantViolation after kOracleMaxCollisions collisions.
inline constexpr int kOracleMaxCollisions = 1000000;
OracleResult thermostat_oracle(double v, double w, double r, const ThermostatParams& params);

/// r ~ U[0, l), w ~ N(0, σ²), then the deterministic oracle.
double thermostat_step_oracle(stat::RandomStream& stream, double v, const ThermostatParams& params);

/// Row-stochastic approximation of the Markov operator on a speed grid.
struct TransitionMatrix {
    std::vector<double> edges;  // cells + 1 ascending values
    std::vector<double> prob;   // row-major cells × cells
    std::int64_t samples_per_row = 0;

    std::size_t cells() const noexcept { return edges.empty() ? 0 : edges.size() - 1; }
    double operator()(std::size_t i, std::size_t j) const { return prob[i * cells() + j]; }
    double midpoint(std::size_t i) const { return 0.5 * (edges[i] + edges[i + 1]); }
};

/// Grid of `cells` equal cells on [0, 5σ√2].
std::vector<double> default_speed_grid(double sigma, std::size_t cells = 200);

/// Row i: `samples_per_row` applications of the map from the midpoint of cell
/// i. Wall velocities are stratified, w_k = σ·Φ⁻¹((k + U_k)/n), and the branch
/// selectors are stratified over an independent random permutation; outputs
/// above the grid are counted in the last cell. Row i uses stream.substream(i).
TransitionMatrix finite_rank_operator(const ThermostatParams& params, const std::vector<double>& edges,
                                      std::int64_t samples_per_row, const stat::RandomStream& stream,
                                      unsigned threads = 1);

/// Cell masses of the stationary law on the grid; the last cell also carries
/// the tail beyond the grid, matching the operator's clamping.
std::vector<double> stationary_cell_masses(const std::vector<double>& edges, double sigma);

std::vector<double> apply_operator(const TransitionMatrix& m, std::span<const double> density);

struct DensityEvolution {
    std::vector<std::vector<double>> densities;  // step 0 .. n
    std::vector<double> tv_to_reference;
};

/// ρ_{k+1} = ρ_k·P for k < n_steps; TV measured against `reference`.
DensityEvolution evolve_density(const TransitionMatrix& m, std::span<const double> initial, std::int64_t n_steps,
                                std::span<const double> reference);

/// max_ij |μ_i P_ij - μ_j P_ji| and max_ij μ_i P_ij.
struct DetailedBalance {
    double max_residual = 0.0;
    double max_flux = 0.0;
};
DetailedBalance detailed_balance(const TransitionMatrix& m, std::span<const double> mu);

}  // namespace bt::thermo
