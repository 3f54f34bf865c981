#include "billiard_thermo/thermostat.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include <boost/math/special_functions/erf.hpp>

#include "billiard_thermo/distributions.hpp"
#include "billiard_thermo/errors.hpp"
#include "billiard_thermo/mechanics.hpp"
#include "billiard_thermo/parallel.hpp"
#include "billiard_thermo/stats.hpp"

namespace bt::thermo {

namespace {

constexpr double kClampSlack = 1e-10;

void check_gamma(double gamma) {
    if (!(gamma > 0.0 && gamma < kGammaMax)) {
        std::ostringstream os;
        os.precision(17);
        os << "thermostat: gamma = " << gamma << " outside (0, 1/sqrt(3))";
        throw std::invalid_argument(os.str());
    }
}

double clamp_unit(double x, const char* name, double v, double w_abs) {
    if (x >= 0.0 && x <= 1.0) return x;
    if (x > -kClampSlack && x < 1.0 + kClampSlack) return std::clamp(x, 0.0, 1.0);
    std::ostringstream os;
    os.precision(17);
    os << "thermostat: " << name << " = " << x << " out of [0,1] at v = " << v << ", |w| = " << w_abs;
    throw InvariantViolation(os.str());
}

}  // namespace

MapCoefficients coefficients(double gamma) {
    check_gamma(gamma);
    const double g2 = gamma * gamma;
    const double d = 1.0 + g2;
    MapCoefficients c;
    c.a = (1.0 - g2) / d;
    c.b = 2.0 * gamma / d;
    c.abar = (1.0 - 6.0 * g2 + g2 * g2) / (d * d);
    c.bbar = 4.0 * gamma * (1.0 - g2) / (d * d);
    return c;
}

ThermostatParams::ThermostatParams(double wall_mass, double gas_mass, double sigma2, double length)
    : wall_mass_(wall_mass), gas_mass_(gas_mass), sigma2_(sigma2), length_(length) {
    if (!(wall_mass > 0.0) || !(gas_mass > 0.0))
        throw std::invalid_argument("ThermostatParams: masses must be positive");
    if (!(sigma2 > 0.0) || !std::isfinite(sigma2))
        throw std::invalid_argument("ThermostatParams: sigma2 must be positive");
    if (!(length > 0.0) || !std::isfinite(length))
        throw std::invalid_argument("ThermostatParams: length must be positive");
    gamma_ = std::sqrt(gas_mass / wall_mass);
    check_gamma(gamma_);
    alpha_ = std::atan(gamma_);
    sigma_ = std::sqrt(sigma2);
    coeffs_ = coefficients(gamma_);
}

ThermostatParams ThermostatParams::from_temperature(double wall_mass, double gas_mass, double temperature,
                                                    double length) {
    if (!(wall_mass > 0.0)) throw std::invalid_argument("ThermostatParams: masses must be positive");
    return ThermostatParams(wall_mass, gas_mass, temperature / wall_mass, length);
}

double ThermostatParams::reduced_length() const noexcept {
    return length_ * std::sqrt(gas_mass_ / (wall_mass_ + gas_mass_));
}

int partition_index(double v, double w_abs, double alpha) {
    const double ratio = v / w_abs;
    for (int i = 1; i <= 3; ++i)
        if (ratio <= std::tan(i * alpha)) return i;
    return 4;
}

BranchProbabilities branch_probabilities(double v, double w_abs, double gamma, int partition) {
    const double g2 = gamma * gamma;
    const double ratio = w_abs / v;
    BranchProbabilities out;
    out.p = gamma * ratio;
    out.q = 2.0 * (1.0 - g2) / (1.0 + g2) - 4.0 * gamma / (1.0 + g2) * ratio;
    switch (partition) {
        case 1:
            out.p = 1.0;
            out.q = 0.0;
            break;
        case 2:
        case 4:
            out.p = clamp_unit(out.p, "p", v, w_abs);
            out.q = partition == 4 ? 1.0 - out.p : 0.0;
            break;
        case 3: {
            out.p = clamp_unit(out.p, "p", v, w_abs);
            out.q = clamp_unit(out.q, "q", v, w_abs);
            const double s = out.p + out.q;
            if (s > 1.0) {
                if (s > 1.0 + kClampSlack) clamp_unit(s, "p+q", v, w_abs);
                out.q = 1.0 - out.p;
            }
            break;
        }
        default:
            throw std::invalid_argument("branch_probabilities: partition must be 1..4");
    }
    return out;
}

double branch_value(Branch branch, double v, double w_abs, const MapCoefficients& c) noexcept {
    switch (branch) {
        case Branch::F1: return c.a * v + c.b * w_abs;
        case Branch::F2: return c.a * v - c.b * w_abs;
        case Branch::F3: return -c.abar * v + c.bbar * w_abs;
    }
    return 0.0;
}

BranchDraw thermostat_map(double v, double w, double u, const ThermostatParams& params) {
    if (!(v > 0.0) || !std::isfinite(v)) throw std::invalid_argument("thermostat_map: v must be positive");
    BranchDraw d;
    d.w = w;
    const double w_abs = std::abs(w);
    if (w >= 0.0) {
        d.partition = 0;
        d.p = 1.0;
        d.branch = Branch::F1;
    } else {
        d.partition = partition_index(v, w_abs, params.alpha());
        const BranchProbabilities pq = branch_probabilities(v, w_abs, params.gamma(), d.partition);
        d.p = pq.p;
        d.q = pq.q;
        if (u < pq.p) d.branch = Branch::F1;
        else if (d.partition == 3) d.branch = u < pq.p + pq.q ? Branch::F2 : Branch::F3;
        else if (d.partition == 4) d.branch = Branch::F2;
        else d.branch = Branch::F3;
    }
    d.v_out = branch_value(d.branch, v, w_abs, params.coeffs());
    if (!(d.v_out > 0.0)) {
        std::ostringstream os;
        os.precision(17);
        os << "thermostat: non-positive output " << d.v_out << " (v = " << v << ", w = " << w << ", u = " << u
           << ", partition " << d.partition << ", branch F" << static_cast<int>(d.branch) << ", gamma = "
           << params.gamma() << ")";
        throw InvariantViolation(os.str());
    }
    return d;
}

BranchDraw thermostat_draw(stat::RandomStream& stream, double v, const ThermostatParams& params) {
    const double w = stat::draw_gaussian(stream, 0.0, params.sigma());
    const double u = stream.next_unit();
    return thermostat_map(v, w, u, params);
}

double thermostat_step(stat::RandomStream& stream, double v, const ThermostatParams& params) {
    return thermostat_draw(stream, v, params).v_out;
}

OracleResult thermostat_oracle(double v, double w, double r, const ThermostatParams& params) {
    if (!(v > 0.0) || !std::isfinite(v)) throw std::invalid_argument("thermostat_oracle: v must be positive");
    const double l = params.length();
    if (!(r >= 0.0 && r < l)) throw std::invalid_argument("thermostat_oracle: r must lie in [0, l)");
    const mech::MassPair masses(params.wall_mass(), params.gas_mass());

    double x_wall = r, v_wall = w;
    double x_gas = l, v_gas = -params.to_gas_speed(v);
    const double gas_e0 = 0.5 * params.gas_mass() * v_gas * v_gas;
    const double wall_e0 = 0.5 * params.wall_mass() * v_wall * v_wall;
    constexpr double inf = std::numeric_limits<double>::infinity();

    OracleResult out;
    for (;;) {
        const double t_wall = v_wall < 0.0 ? -x_wall / v_wall : inf;
        const double t_coll = v_wall > v_gas ? (x_gas - x_wall) / (v_wall - v_gas) : inf;
        const double t_exit = v_gas > 0.0 ? (l - x_gas) / v_gas : inf;
        const double t = std::min({t_wall, t_coll, t_exit});
        if (t == inf) throw InvariantViolation("thermostat_oracle: no further events");
        if (t == t_exit && t_exit <= t_coll) break;
        x_wall += v_wall * t;
        x_gas += v_gas * t;
        if (t == t_wall && t_wall < t_coll) {
            x_wall = 0.0;
            v_wall = -v_wall;
            ++out.wall_bounces;
        } else {
            x_wall = x_gas;
            const mech::VelocityPair after = mech::elastic_collide(masses, v_wall, v_gas);
            v_wall = after.a;
            v_gas = after.b;
            if (++out.collisions >= kOracleMaxCollisions)
                throw InvariantViolation("thermostat_oracle: collision guard exceeded");
        }
    }
    out.v_out = params.to_reduced(v_gas);
    out.gas_energy_change = 0.5 * params.gas_mass() * v_gas * v_gas - gas_e0;
    out.wall_energy_change = 0.5 * params.wall_mass() * v_wall * v_wall - wall_e0;
    return out;
}

double thermostat_step_oracle(stat::RandomStream& stream, double v, const ThermostatParams& params) {
    const double r = stat::draw_uniform(stream, 0.0, params.length());
    const double w = stat::draw_gaussian(stream, 0.0, params.sigma());
    return thermostat_oracle(v, w, r, params).v_out;
}

std::vector<double> default_speed_grid(double sigma, std::size_t cells) {
    if (!(sigma > 0.0) || cells == 0) throw std::invalid_argument("default_speed_grid: need sigma > 0 and cells > 0");
    const double top = 5.0 * sigma * std::sqrt(2.0);
    std::vector<double> edges(cells + 1);
    for (std::size_t i = 0; i <= cells; ++i) edges[i] = top * static_cast<double>(i) / static_cast<double>(cells);
    return edges;
}

namespace {

void check_edges(const std::vector<double>& edges) {
    if (edges.size() < 2) throw std::invalid_argument("speed grid needs at least one cell");
    if (!(edges.front() >= 0.0)) throw std::invalid_argument("speed grid must start at a non-negative value");
    for (std::size_t i = 1; i < edges.size(); ++i)
        if (!(edges[i] > edges[i - 1])) throw std::invalid_argument("speed grid has an empty cell");
}

std::size_t cell_of(const std::vector<double>& edges, double v) {
    const auto it = std::upper_bound(edges.begin(), edges.end(), v);
    if (it == edges.begin()) return 0;
    return std::min<std::size_t>(static_cast<std::size_t>(it - edges.begin()) - 1, edges.size() - 2);
}

double inverse_normal(double p) { return -std::sqrt(2.0) * boost::math::erfc_inv(2.0 * p); }

}  // namespace

TransitionMatrix finite_rank_operator(const ThermostatParams& params, const std::vector<double>& edges,
                                      std::int64_t samples_per_row, const stat::RandomStream& stream,
                                      unsigned threads) {
    check_edges(edges);
    if (samples_per_row < 1) throw std::invalid_argument("finite_rank_operator: samples_per_row must be positive");
    TransitionMatrix m;
    m.edges = edges;
    m.samples_per_row = samples_per_row;
    const std::size_t n = m.cells();
    m.prob.assign(n * n, 0.0);
    const auto ns = static_cast<std::size_t>(samples_per_row);
    const double inv = 1.0 / static_cast<double>(samples_per_row);
    constexpr double kBelowOne = 1.0 - 0x1.0p-53;

    parallel_for(static_cast<std::int64_t>(n), threads, [&](std::int64_t row) {
        stat::RandomStream rs = stream.substream(static_cast<std::uint64_t>(row));
        std::vector<std::size_t> order(ns);
        std::iota(order.begin(), order.end(), std::size_t{0});
        for (std::size_t k = ns; k > 1; --k) {
            const auto j = static_cast<std::size_t>(rs.next_unit() * static_cast<double>(k));
            std::swap(order[k - 1], order[j]);
        }
        const double v = m.midpoint(static_cast<std::size_t>(row));
        std::vector<std::int64_t> counts(n, 0);
        for (std::size_t k = 0; k < ns; ++k) {
            const double pw = std::min((static_cast<double>(k) + rs.next_open_unit()) * inv, kBelowOne);
            const double w = params.sigma() * inverse_normal(pw);
            const double u = (static_cast<double>(order[k]) + rs.next_unit()) * inv;
            const BranchDraw d = thermostat_map(v, w, u, params);
            ++counts[cell_of(m.edges, d.v_out)];
        }
        double* out = &m.prob[static_cast<std::size_t>(row) * n];
        for (std::size_t j = 0; j < n; ++j) out[j] = static_cast<double>(counts[j]) * inv;
    });
    return m;
}

std::vector<double> stationary_cell_masses(const std::vector<double>& edges, double sigma) {
    check_edges(edges);
    std::vector<double> mu(edges.size() - 1);
    for (std::size_t i = 0; i < mu.size(); ++i)
        mu[i] = stat::cdf_mb_post_collision(edges[i + 1], sigma) - stat::cdf_mb_post_collision(edges[i], sigma);
    mu.back() = 1.0 - stat::cdf_mb_post_collision(edges[edges.size() - 2], sigma);
    return mu;
}

std::vector<double> apply_operator(const TransitionMatrix& m, std::span<const double> density) {
    const std::size_t n = m.cells();
    if (density.size() != n) throw std::invalid_argument("apply_operator: density does not match the grid");
    std::vector<double> out(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        const double di = density[i];
        if (di == 0.0) continue;
        const double* row = &m.prob[i * n];
        for (std::size_t j = 0; j < n; ++j) out[j] += di * row[j];
    }
    return out;
}

DensityEvolution evolve_density(const TransitionMatrix& m, std::span<const double> initial, std::int64_t n_steps,
                                std::span<const double> reference) {
    if (initial.size() != m.cells() || reference.size() != m.cells())
        throw std::invalid_argument("evolve_density: density does not match the grid");
    if (n_steps < 0) throw std::invalid_argument("evolve_density: n_steps must be non-negative");
    DensityEvolution ev;
    ev.densities.reserve(static_cast<std::size_t>(n_steps) + 1);
    ev.densities.emplace_back(initial.begin(), initial.end());
    ev.tv_to_reference.push_back(stat::tv_distance(initial, reference));
    for (std::int64_t k = 0; k < n_steps; ++k) {
        ev.densities.push_back(apply_operator(m, ev.densities.back()));
        ev.tv_to_reference.push_back(stat::tv_distance(ev.densities.back(), reference));
    }
    return ev;
}

DetailedBalance detailed_balance(const TransitionMatrix& m, std::span<const double> mu) {
    const std::size_t n = m.cells();
    if (mu.size() != n) throw std::invalid_argument("detailed_balance: mu does not match the grid");
    DetailedBalance db;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            const double fij = mu[i] * m(i, j);
            db.max_flux = std::max(db.max_flux, fij);
            if (j > i) db.max_residual = std::max(db.max_residual, std::abs(fij - mu[j] * m(j, i)));
        }
    }
    return db;
}

}  // namespace bt::thermo
