// Acceptance runs. One line per criterion:
//   [PASS] n name: measured ... (bound ...)
// Exit status is nonzero if any selected criterion fails.
//
//   acceptance                 all criteria 1..11
//   acceptance --criterion 7   only criterion 7 (repeatable)

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <functional>
#include <iostream>
#include <limits>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "billiard_thermo/chamber.hpp"
#include "billiard_thermo/distributions.hpp"
#include "billiard_thermo/engine.hpp"
#include "billiard_thermo/heatflow.hpp"
#include "billiard_thermo/parallel.hpp"
#include "billiard_thermo/parallelogram.hpp"
#include "billiard_thermo/random_stream.hpp"
#include "billiard_thermo/stats.hpp"
#include "billiard_thermo/thermostat.hpp"

namespace {

using namespace bt;
using stat::RandomStream;

constexpr std::uint64_t kSeed = 12345;

struct Outcome {
    bool pass = false;
    std::string detail;
};

std::uint64_t seed_for(int criterion) { return RandomStream::derive_seed(kSeed, static_cast<std::uint64_t>(criterion)); }

unsigned threads() { return worker_count(); }

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

Outcome cosine_law_entries() {
    const auto t0 = std::chrono::steady_clock::now();
    const billiard::ChamberGeometry g;
    RandomStream stream(seed_for(1));
    const auto run = billiard::run_divided_chamber(g, billiard::random_left_state(g, stream), 1000000, stream);
    std::vector<double> angles, offsets;
    for (const auto& e : run.entries) {
        angles.push_back(e.angle);
        offsets.push_back(e.offset);
    }
    const double ks_angle = stat::ks_statistic(angles, stat::cdf_cosine_law).statistic;
    const double ks_offset =
        stat::ks_statistic(offsets, [](double x) { return std::clamp(x, 0.0, 1.0); }).statistic;
    const double secs = seconds_since(t0);
    return {ks_angle <= 0.005 && ks_offset <= 0.005 && secs <= 600.0,
            fmt::format("entries {}, KS(angle) {:.5f}, KS(offset) {:.5f}, {:.1f} s (bounds 0.005, 0.005, 600 s)",
                        run.entries.size(), ks_angle, ks_offset, secs)};
}

Outcome thermostat_stationarity() {
    const thermo::ThermostatParams p(1.0, 0.01, 1.0);  // gamma = 0.1
    RandomStream stream(seed_for(2));
    double v = 1.0;
    for (int i = 0; i < 1000; ++i) v = thermo::thermostat_step(stream, v, p);
    std::vector<double> xs(1000000);
    stat::RunningStats m1, m2;
    for (auto& x : xs) {
        v = thermo::thermostat_step(stream, v, p);
        x = v;
        m1.add(v);
        m2.add(v * v);
    }
    const double ks = stat::ks_statistic(xs, [](double t) { return stat::cdf_mb_post_collision(t, 1.0); }).statistic;
    const double target1 = std::sqrt(stat::kPi / 2.0);
    const double rel1 = std::abs(m1.mean() / target1 - 1.0);
    const double rel2 = std::abs(m2.mean() / 2.0 - 1.0);
    return {ks <= 0.01 && rel1 <= 0.01 && rel2 <= 0.01,
            fmt::format("KS {:.5f}, E[v] {:.5f} (rel err {:.2e}), E[v^2] {:.5f} (rel err {:.2e}) "
                        "(bounds KS 0.01, rel err 0.01)",
                        ks, m1.mean(), rel1, m2.mean(), rel2)};
}

// Ratio v/|w| in the middle of partition cell i.
double ratio_in_cell(int i, double alpha) {
    if (i == 1) return 0.5 * std::tan(alpha);
    if (i == 4) return 2.0 * std::tan(3.0 * alpha) + 1.0;
    return 0.5 * (std::tan((i - 1) * alpha) + std::tan(i * alpha));
}

Outcome map_oracle_equivalence() {
    constexpr int n = 10000;
    const double gammas[] = {0.05, 0.15, 0.25, 0.35, 0.45};
    double worst_freq = 0.0, worst_value = 0.0;
    int cases = 0;
    bool cells_ok = true;
    for (double g : gammas) {
        const thermo::ThermostatParams p(1.0, g * g, 1.0);
        for (int cell = 1; cell <= 4; ++cell) {
            const double w = -0.8;
            const double v = ratio_in_cell(cell, p.alpha()) * std::abs(w);
            cells_ok = cells_ok && thermo::partition_index(v, std::abs(w), p.alpha()) == cell;
            const auto pq = thermo::branch_probabilities(v, std::abs(w), g, cell);
            double f[4] = {0.0, 0.0, 0.0, 0.0};
            for (int k = 0; k < n; ++k) {
                const double r = (k + 0.5) / n * p.length();
                const double got = thermo::thermostat_oracle(v, w, r, p).v_out;
                int best = 1;
                double err = std::numeric_limits<double>::infinity();
                for (int b = 1; b <= 3; ++b) {
                    const double e =
                        std::abs(got - thermo::branch_value(static_cast<thermo::Branch>(b), v, std::abs(w), p.coeffs()));
                    if (e < err) {
                        err = e;
                        best = b;
                    }
                }
                worst_value = std::max(worst_value, err);
                f[best] += 1.0 / n;
            }
            const double e1 = pq.p;
            const double e2 = cell == 2 ? 0.0 : pq.q;
            const double e3 = (cell == 2 || cell == 3) ? 1.0 - pq.p - pq.q : 0.0;
            worst_freq = std::max({worst_freq, std::abs(f[1] - e1), std::abs(f[2] - e2), std::abs(f[3] - e3)});
            ++cases;
        }
    }
    return {cells_ok && worst_freq <= 0.02 && worst_value <= 1e-9,
            fmt::format("{} cases, max branch frequency error {:.4f}, max value error {:.2e} (bounds 0.02, 1e-9)",
                        cases, worst_freq, worst_value)};
}

Outcome operator_reversibility() {
    const auto edges = thermo::default_speed_grid(1.0, 200);
    const auto m = thermo::finite_rank_operator(thermo::ThermostatParams(1.0, 0.01, 1.0), edges, 10000,
                                                RandomStream(seed_for(4)), threads());
    const auto mu = thermo::stationary_cell_masses(edges, 1.0);
    const auto db = thermo::detailed_balance(m, mu);
    const double ratio = db.max_residual / db.max_flux;

    std::vector<double> init(m.cells(), 0.0);
    std::size_t cell = 0;
    while (edges[cell + 1] <= 3.0) ++cell;
    init[cell] = 1.0;
    const auto ev = thermo::evolve_density(m, init, 60, mu);
    std::vector<double> x;
    for (std::size_t k = 0; k < ev.tv_to_reference.size(); ++k) x.push_back(static_cast<double>(k));
    const double slope = stat::log_linear_slope(x, ev.tv_to_reference);
    return {ratio <= 0.05 && slope < 0.0,
            fmt::format("detailed-balance residual / max flux {:.4f}, TV {:.4f} -> {:.4f} over 60 steps, "
                        "log-linear slope {:.4f} (bounds 0.05, slope < 0)",
                        ratio, ev.tv_to_reference.front(), ev.tv_to_reference.back(), slope)};
}

Outcome heat_flow() {
    heat::HeatFlowConfig c;  // m_wall 10, m_gas 1, sigma2 20 / 1
    c.n_collisions = 1000000;
    c.seed = seed_for(5);
    c.keep_records = true;
    const auto run = heat::run_heatflow(c);
    const double qh = run.mean_hot(), qc = run.mean_cold(), se = run.se_hot();
    const double mismatch = std::abs(qc + qh) / std::abs(qh);
    std::vector<double> from_hot, to_hot;
    for (const auto& r : run.records) (r.wall == heat::Wall::hot ? from_hot : to_hot).push_back(r.speed);
    const double gap = run.speed_from_hot.mean() - run.speed_to_hot.mean();
    const double gap_se = std::hypot(stat::batch_means_se(from_hot), stat::batch_means_se(to_hot));
    return {qh > 3.0 * se && mismatch <= 0.01 && gap > 3.0 * gap_se,
            fmt::format("mean Q_hot {:.4f} = {:.1f} SE, |Q_cold + Q_hot| / Q_hot {:.2e}, "
                        "speed from hot - speed to hot {:.4f} = {:.1f} SE (bounds 3 SE, 0.01, 3 SE)",
                        qh, qh / se, mismatch, gap, gap / gap_se)};
}

Outcome heat_linearity() {
    std::vector<double> grid;
    for (int s = 1; s <= 11; ++s) grid.push_back(s);
    bool ok = true;
    std::string parts;
    const double masses[] = {3.001, 5.001, 7.001};
    for (int i = 0; i < 3; ++i) {
        const auto r = heat::heat_linearity(masses[i], 1.0, 1.0, grid, 300000,
                                            RandomStream::derive_seed(seed_for(6), static_cast<std::uint64_t>(i)), 0.0,
                                            threads());
        const double z = std::abs(r.fit.intercept) / r.fit.intercept_se;
        ok = ok && r.fit.r_squared >= 0.99 && z <= 3.0 && r.fit.slope > 0.0;
        parts += fmt::format("{}M_w {}: R^2 {:.4f}, slope {:.4e}, |intercept| {:.2f} SE", parts.empty() ? "" : "; ",
                             masses[i], r.fit.r_squared, r.fit.slope, z);
    }
    return {ok, parts + " (bounds R^2 0.99, 3 SE, slope > 0)"};
}

engine::EngineConfig drift_template() {
    engine::EngineConfig c;  // m0 10, mb 100, mg 1, l 1e-4
    c.events = 1000000;
    return c;
}

bool same_run(const engine::EngineRun& a, const engine::EngineRun& b) {
    const auto& x = a.ledger;
    const auto& y = b.ledger;
    return x.q_hot == y.q_hot && x.q_cold == y.q_cold && x.work == y.work && x.energy_gas == y.energy_gas &&
           x.energy_b == y.energy_b && x.max_balance_residual == y.max_balance_residual &&
           a.final_state.t == b.final_state.t && a.final_state.x_b == b.final_state.x_b &&
           a.final_state.v_b == b.final_state.v_b && a.final_state.x_gas == b.final_state.x_gas &&
           a.final_state.v_gas == b.final_state.v_gas;
}

Outcome engine_exactness() {
    double worst = 0.0;
    bool identical = true;
    const double forces[] = {0.0, 3e4};
    for (int i = 0; i < 2; ++i) {
        engine::EngineConfig c = drift_template();
        c.sigma2_face1 = 8.0;
        c.force = forces[i];
        c.seed = RandomStream::derive_seed(seed_for(7), static_cast<std::uint64_t>(i));
        const auto a = engine::run_engine(c);
        const auto b = engine::run_engine(c);
        worst = std::max(worst, a.ledger.max_balance_residual);
        identical = identical && same_run(a, b) && a.ledger.counts.physical() == 1000000;
    }
    return {worst <= 1e-8 && identical,
            fmt::format("max relative balance residual {:.2e} over 2 runs of 1e6 events (F = 0, 3e4), "
                        "reruns bit-identical: {} (bound 1e-8)",
                        worst, identical ? "yes" : "no")};
}

// Displacements x_b(end) - x_b(0) in units of l.
std::vector<double> displacements(double s1, double s2, int n, std::uint64_t seed) {
    std::vector<double> out(static_cast<std::size_t>(n));
    parallel_for(n, threads(), [&](std::int64_t j) {
        engine::EngineConfig c = drift_template();
        c.sigma2_face0 = s1;
        c.sigma2_face1 = s2;
        c.seed = RandomStream::derive_seed(seed, static_cast<std::uint64_t>(j));
        const auto r = engine::run_engine(c);
        out[static_cast<std::size_t>(j)] = (r.final_state.x_b - r.ledger.x_b0) / c.length;
    });
    return out;
}

Outcome engine_drift() {
    bool ok = true;
    std::string parts;
    const double hot[] = {2.0, 4.0, 8.0};
    for (int i = 0; i < 3; ++i) {
        const auto base = RandomStream::derive_seed(seed_for(8), static_cast<std::uint64_t>(i));
        // Face 1 hot: away from it is the negative direction.
        const auto d = displacements(1.0, hot[i], 10, base);
        const auto sw = displacements(hot[i], 1.0, 10, RandomStream::derive_seed(base, 1000));
        const double dmax = *std::max_element(d.begin(), d.end());
        const double swmin = *std::min_element(sw.begin(), sw.end());
        ok = ok && dmax < 0.0 && swmin > 0.0;
        parts += fmt::format("{}sigma2 {}: max dx/l {:.0f}, swapped min dx/l {:.0f}", parts.empty() ? "" : "; ", hot[i],
                             dmax, swmin);
    }
    const auto eq = displacements(1.0, 1.0, 20, RandomStream::derive_seed(seed_for(8), 99));
    stat::RunningStats rs;
    for (double x : eq) rs.add(x);
    const double z = std::abs(rs.mean()) / rs.standard_error();
    ok = ok && z < 3.0;
    parts += fmt::format("; equal: mean dx/l {:.1f} = {:.2f} SE", rs.mean(), z);
    return {ok, parts + " (bounds: all hot-side runs < 0, all swapped > 0, equal < 3 SE)"};
}

Outcome engine_efficiency() {
    engine::EngineConfig base;
    base.sigma2_face0 = 1.0;
    base.sigma2_face1 = 8.0;
    base.events = 2000;
    base.randomize_phase = true;
    base.check_balance = true;
    base.seed = seed_for(9);
    std::vector<double> forces{0.0};
    for (int k = 0; k <= 10; ++k) forces.push_back(std::pow(10.0, k / 2.0));
    const auto t0 = std::chrono::steady_clock::now();
    const auto sweep = engine::efficiency_sweep(base, forces, 2000, threads());
    const double secs = seconds_since(t0);
    const double carnot = 1.0 - 1.0 / 8.0;
    const engine::SweepPoint* best = nullptr;
    bool below_carnot = true;
    for (const auto& p : sweep.points) {
        below_carnot = below_carnot && p.mean_by_heat < carnot;
        if (!best || p.mean_by_heat > best->mean_by_heat) best = &p;
    }
    std::string cis;
    for (const auto& p : sweep.points)
        cis += fmt::format("{}F {:g}: {:.5f} [{:.5f}, {:.5f}]", cis.empty() ? "" : ", ", p.force, p.mean_by_heat,
                           p.ci99_low, p.ci99_high);
    const bool ok = best->mean_by_heat > 0.0 && best->mean_by_heat < 0.004 && below_carnot;
    return {ok, fmt::format("best mean eps_bar {:.5f} at F = {:g} (99% CI [{:.5f}, {:.5f}]), all below Carnot {}: {}, "
                            "{:.0f} s (bounds 0 < best < 0.004, every mean < 0.875); per force: {}",
                            best->mean_by_heat, best->force, best->ci99_low, best->ci99_high, carnot,
                            below_carnot ? "yes" : "no", secs, cis)};
}

Outcome hemisphere_limit() {
    const stat::HemisphereSpec spec(200, 1.0);
    RandomStream stream(seed_for(10));
    std::vector<double> v0(100000), v1(100000);
    for (std::size_t i = 0; i < v0.size(); ++i) {
        const auto v = stat::sample_cosine_hemisphere(stream, spec);
        v0[i] = v[0];
        v1[i] = v[1];
    }
    const double k0 = stat::ks_statistic(v0, [](double t) { return stat::cdf_mb_post_collision(t, 1.0); }).statistic;
    const double k1 = stat::ks_statistic(v1, [](double t) { return stat::cdf_normal(t); }).statistic;
    return {k0 <= 0.02 && k1 <= 0.02,
            fmt::format("KS(v0 vs post-collision MB) {:.5f}, KS(v1 vs N(0,1)) {:.5f} (bounds 0.02, 0.02)", k0, k1)};
}

Outcome parallelogram_cosine() {
    const billiard::ParallelogramGeometry g;
    RandomStream stream(seed_for(11));
    billiard::RandomParallelogram rp(g, normalized({0.54, 0.84}), stream);
    auto h = stat::Histogram::uniform(-stat::kPi / 2, stat::kPi / 2, 30);
    for (int i = 0; i < 1000000; ++i) h.add(rp.step(stream).angle);
    const double tv = stat::tv_distance_to_cdf(h, stat::cdf_cosine_law);
    return {tv <= 0.03, fmt::format("{} crossings, 30-bin TV to cosine law {:.5f} (bound 0.03)", h.total(), tv)};
}

struct Criterion {
    int number;
    const char* name;
    std::function<Outcome()> run;
};

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Acceptance criteria"};
    std::vector<int> selected;
    app.add_option("--criterion", selected, "criterion number, repeatable")->check(CLI::Range(1, 11));
    CLI11_PARSE(app, argc, argv);

    const std::vector<Criterion> all{
        {1, "cosine law of screen entries", cosine_law_entries},
        {2, "thermostat stationarity", thermostat_stationarity},
        {3, "map and two-mass oracle agree", map_oracle_equivalence},
        {4, "grid operator reversibility", operator_reversibility},
        {5, "heat flow between two walls", heat_flow},
        {6, "heat flow linear in temperature difference", heat_linearity},
        {7, "engine energy balance and reruns", engine_exactness},
        {8, "engine drift direction", engine_drift},
        {9, "engine efficiency", engine_efficiency},
        {10, "hemisphere limit", hemisphere_limit},
        {11, "random parallelogram cosine law", parallelogram_cosine},
    };

    bool failed = false;
    for (const auto& c : all) {
        if (!selected.empty() && std::find(selected.begin(), selected.end(), c.number) == selected.end()) continue;
        Outcome o;
        try {
            o = c.run();
        } catch (const std::exception& e) {
            o = {false, std::string("error: ") + e.what()};
        }
        failed = failed || !o.pass;
        std::cout << fmt::format("[{}] {} {}: {}", o.pass ? "PASS" : "FAIL", c.number, c.name, o.detail) << std::endl;
    }
    return failed ? 1 : 0;
}
