#include "billiard_thermo/cli/experiments.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>
#include <sstream>

#include <fmt/format.h>

#include <toml.hpp>

#include "billiard_thermo/distributions.hpp"
#include "billiard_thermo/errors.hpp"
#include "billiard_thermo/parallel.hpp"
#include "billiard_thermo/stats.hpp"
#include "billiard_thermo/thermostat.hpp"

#ifndef BT_VERSION
#define BT_VERSION "0.0.0"
#endif

namespace bt::cli {

namespace {

std::string num(double v) { return fmt::format("{}", v); }

const char* event_label(engine::EventType t) {
    switch (t) {
        case engine::EventType::pin_toggle: return "start";
        case engine::EventType::wall_face0: return "wall0";
        case engine::EventType::wall_face1: return "wall1";
        case engine::EventType::coincidence: return "coincidence";
    }
    return "?";
}

struct Context {
    const ExperimentConfig& config;
    std::uint64_t seed;
    std::string suffix;  // "" or "_r<k>"
    unsigned threads;
    ExperimentResult& result;
    std::string prefix;  // summary key prefix

    std::filesystem::path file(std::string_view name) const {
        return config.out / fmt::format("{}{}.csv", name, suffix);
    }
    Metadata meta() const {
        return {{"kind", std::string(kind_name(config.kind))}, {"seed", fmt::format("{}", seed)},
                {"version", BT_VERSION}};
    }
    void done(CsvWriter& w) {
        w.close();
        result.files.push_back(w.path());
    }
    void put(std::string_view key, std::string value) {
        result.summary.emplace_back(prefix + std::string(key), std::move(value));
    }
};

double uniform01(double x) { return std::clamp(x, 0.0, 1.0); }

void run_chamber(Context& ctx) {
    const ChamberSettings& s = ctx.config.chamber;
    stat::RandomStream stream(ctx.seed);
    const auto run = billiard::run_divided_chamber(s.geometry, billiard::random_left_state(s.geometry, stream),
                                                   s.entries, stream);
    CsvWriter w(ctx.file("chamber_entries"), "chamber_entries", kCsvSchemaVersion, ctx.meta(),
                {"index", "side", "offset", "angle", "time"});
    std::vector<double> offsets, angles;
    offsets.reserve(run.entries.size());
    angles.reserve(run.entries.size());
    std::int64_t right = 0;
    for (std::size_t i = 0; i < run.entries.size(); ++i) {
        const auto& e = run.entries[i];
        w.row({static_cast<std::int64_t>(i), e.side, e.offset, e.angle, e.time});
        offsets.push_back(e.offset);
        angles.push_back(e.angle);
        right += e.side;
    }
    ctx.done(w);
    ctx.put("entries", fmt::format("{}", run.entries.size()));
    ctx.put("ks_angle_vs_cosine", num(stat::ks_statistic(angles, stat::cdf_cosine_law).statistic));
    ctx.put("ks_offset_vs_uniform", num(stat::ks_statistic(offsets, uniform01).statistic));
    ctx.put("fraction_from_right", num(static_cast<double>(right) / static_cast<double>(run.entries.size())));
    ctx.put("singular", fmt::format("{}", run.singular));

    if (s.expansion_particles > 0) {
        const auto model =
            s.scattering_line ? billiard::ExpansionModel::scattering_line : billiard::ExpansionModel::deterministic;
        const auto ex = billiard::ensemble_expansion(s.geometry, s.expansion_particles, s.t_max, s.sample_dt,
                                                     stat::RandomStream(ctx.seed).substream(1), model, ctx.threads);
        CsvWriter e(ctx.file("chamber_expansion"), "chamber_expansion", kCsvSchemaVersion, ctx.meta(),
                    {"time", "right_fraction"});
        for (std::size_t i = 0; i < ex.times.size(); ++i) e.row({ex.times[i], ex.right_fraction[i]});
        ctx.done(e);
        ctx.put("expansion_final_right_fraction", num(ex.right_fraction.empty() ? 0.0 : ex.right_fraction.back()));
        ctx.put("expansion_singular", fmt::format("{}", ex.singular));
    }
}

void run_parallelogram(Context& ctx) {
    const ParallelogramSettings& s = ctx.config.parallelogram;
    const Vec2 v = normalized({s.vx, s.vy});
    CsvWriter w(ctx.file("parallelogram_crossings"), "parallelogram_crossings", kCsvSchemaVersion, ctx.meta(),
                {"index", "upward", "angle", "position", "time"});
    auto h = stat::Histogram::uniform(-stat::kPi / 2, stat::kPi / 2, 30);
    std::int64_t resamples = 0;
    bool singular = false;
    auto take = [&](std::int64_t i, const billiard::Crossing& c) {
        w.row({i, c.upward, c.angle, c.position, c.time});
        if (c.upward) h.add(c.angle);
    };
    if (s.random_jumps) {
        stat::RandomStream stream(ctx.seed);
        billiard::RandomParallelogram rp(s.geometry, v, stream);
        for (std::int64_t i = 0; i < s.crossings; ++i) take(i, rp.step(stream));
        resamples = rp.resamples();
    } else {
        const auto& g = s.geometry;
        const Vec2 start = (g.a() + g.b() + g.d()) * (1.0 / 3.0);
        const auto run = billiard::run_parallelogram(g, {start, v, 0.0}, s.crossings);
        for (std::size_t i = 0; i < run.crossings.size(); ++i) take(static_cast<std::int64_t>(i), run.crossings[i]);
        singular = run.singular;
    }
    ctx.done(w);
    ctx.put("crossings", fmt::format("{}", w.rows()));
    ctx.put("tv_upward_angle_vs_cosine", num(stat::tv_distance_to_cdf(h, stat::cdf_cosine_law)));
    ctx.put("resamples", fmt::format("{}", resamples));
    ctx.put("singular", singular ? "true" : "false");
}

void run_thermostat(Context& ctx) {
    const ThermostatSettings& s = ctx.config.thermostat;
    const thermo::ThermostatParams p(s.wall_mass, s.gas_mass, s.sigma2);
    stat::RandomStream stream(ctx.seed);
    double v = s.initial_speed;
    for (std::int64_t i = 0; i < s.burn_in; ++i) v = thermo::thermostat_step(stream, v, p);
    CsvWriter w(ctx.file("thermostat_chain"), "thermostat_chain", kCsvSchemaVersion, ctx.meta(), {"step", "speed"});
    std::vector<double> vs;
    vs.reserve(static_cast<std::size_t>(s.steps));
    stat::RunningStats m1, m2;
    for (std::int64_t i = 0; i < s.steps; ++i) {
        v = thermo::thermostat_step(stream, v, p);
        w.row({i, v});
        vs.push_back(v);
        m1.add(v);
        m2.add(v * v);
    }
    ctx.done(w);
    const double sigma = p.sigma();
    ctx.put("gamma", num(p.gamma()));
    ctx.put("ks_vs_stationary",
            num(stat::ks_statistic(vs, [sigma](double x) { return stat::cdf_mb_post_collision(x, sigma); }).statistic));
    ctx.put("mean_speed", num(m1.mean()));
    ctx.put("mean_speed_expected", num(sigma * std::sqrt(stat::kPi / 2.0)));
    ctx.put("mean_square_speed", num(m2.mean()));
    ctx.put("mean_square_speed_expected", num(2.0 * s.sigma2));
}

void run_operator(Context& ctx) {
    const OperatorSettings& s = ctx.config.op;
    const thermo::ThermostatParams p(s.wall_mass, s.gas_mass, s.sigma2);
    const auto edges = thermo::default_speed_grid(p.sigma(), static_cast<std::size_t>(s.cells));
    const auto m = thermo::finite_rank_operator(p, edges, s.samples_per_row, stat::RandomStream(ctx.seed), ctx.threads);
    const auto mu = thermo::stationary_cell_masses(edges, p.sigma());
    const std::size_t n = m.cells();

    std::vector<double> start(n, 0.0);
    const double v0 = s.initial_speed * p.sigma();
    const auto it = std::upper_bound(edges.begin(), edges.end(), v0);
    const std::size_t cell = std::min<std::size_t>(n - 1, it == edges.begin() ? 0 : (it - edges.begin()) - 1);
    start[cell] = 1.0;
    const auto evo = thermo::evolve_density(m, start, s.steps, mu);
    const auto db = thermo::detailed_balance(m, mu);

    CsvWriter mw(ctx.file("operator_matrix"), "operator_matrix", kCsvSchemaVersion, ctx.meta(),
                 {"row", "col", "prob"});
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            if (m(i, j) != 0.0) mw.row({static_cast<std::int64_t>(i), static_cast<std::int64_t>(j), m(i, j)});
    ctx.done(mw);

    CsvWriter dw(ctx.file("operator_density"), "operator_density", kCsvSchemaVersion, ctx.meta(),
                 {"step", "cell", "lower", "upper", "mass", "stationary"});
    for (std::size_t k = 0; k < evo.densities.size(); ++k)
        for (std::size_t i = 0; i < n; ++i)
            dw.row({static_cast<std::int64_t>(k), static_cast<std::int64_t>(i), edges[i], edges[i + 1],
                    evo.densities[k][i], mu[i]});
    ctx.done(dw);

    CsvWriter tw(ctx.file("operator_evolution"), "operator_evolution", kCsvSchemaVersion, ctx.meta(),
                 {"step", "tv_to_stationary"});
    std::vector<double> steps;
    for (std::size_t k = 0; k < evo.tv_to_reference.size(); ++k) {
        tw.row({static_cast<std::int64_t>(k), evo.tv_to_reference[k]});
        steps.push_back(static_cast<double>(k));
    }
    ctx.done(tw);
    ctx.put("detailed_balance_ratio", num(db.max_residual / db.max_flux));
    ctx.put("tv_log_slope", num(stat::log_linear_slope(steps, evo.tv_to_reference)));
    ctx.put("tv_final", num(evo.tv_to_reference.back()));
}

void run_heatflow(Context& ctx) {
    const HeatflowSettings& s = ctx.config.heatflow;
    heat::HeatFlowConfig c = s.run;
    c.seed = ctx.seed;
    const heat::HeatFlowRun run = heat::run_heatflow(c);
    CsvWriter w(ctx.file("heatflow_speeds"), "heatflow_speeds", kCsvSchemaVersion, ctx.meta(),
                {"bin_lower", "bin_upper", "from_hot", "to_hot"});
    const auto& e = run.speed_hist_from_hot.edges();
    for (std::size_t i = 0; i + 1 < e.size(); ++i)
        w.row({e[i], e[i + 1], run.speed_hist_from_hot.counts()[i], run.speed_hist_to_hot.counts()[i]});
    ctx.done(w);
    ctx.put("mean_q_hot", num(run.mean_hot()));
    ctx.put("se_q_hot", num(run.se_hot()));
    ctx.put("mean_q_cold", num(run.mean_cold()));
    ctx.put("se_q_cold", num(run.se_cold()));
    ctx.put("mean_speed_from_hot", num(run.speed_from_hot.mean()));
    ctx.put("mean_speed_to_hot", num(run.speed_to_hot.mean()));

    if (!s.linearity_grid.empty()) {
        const auto lin = heat::heat_linearity(c.wall_mass, c.gas_mass, c.sigma2_cold, s.linearity_grid,
                                              s.linearity_collisions, stat::RandomStream::derive_seed(ctx.seed, 1),
                                              s.temperature_shift, ctx.threads);
        CsvWriter l(ctx.file("heatflow_linearity"), "heatflow_linearity", kCsvSchemaVersion, ctx.meta(),
                    {"sigma2_hot", "delta_t", "mean_q_hot", "se_q_hot"});
        for (const auto& pt : lin.points) l.row({pt.sigma2_hot, pt.delta_t, pt.mean_hot, pt.se_hot});
        ctx.done(l);
        ctx.put("linearity_slope", num(lin.fit.slope));
        ctx.put("linearity_intercept", num(lin.fit.intercept));
        ctx.put("linearity_intercept_se", num(lin.fit.intercept_se));
        ctx.put("linearity_r_squared", num(lin.fit.r_squared));
    }
}

void run_engine(Context& ctx) {
    engine::EngineConfig c = ctx.config.engine.run;
    c.seed = ctx.seed;
    const auto t0 = std::chrono::steady_clock::now();
    const engine::EngineRun run = engine::run_engine(c);
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    CsvWriter w(ctx.file("engine_trajectory"), "engine_trajectory", kCsvSchemaVersion, ctx.meta(),
                {"event", "t", "type", "collided", "x_b", "v_b", "v_g", "q_hot", "q_cold", "work"});
    for (const auto& s : run.samples)
        w.row({s.event, s.t, event_label(s.type), s.collided, s.x_b, s.v_b, s.v_gas, s.q_hot, s.q_cold, s.work});
    ctx.done(w);
    const auto& l = run.ledger;
    const auto eff = engine::efficiency(l);
    ctx.put("events", fmt::format("{}", l.counts.physical()));
    ctx.put("collisions", fmt::format("{}", l.counts.collisions));
    ctx.put("pass_through", fmt::format("{}", l.counts.pass_through));
    ctx.put("wall_hot", fmt::format("{}", l.counts.wall_hot));
    ctx.put("wall_cold", fmt::format("{}", l.counts.wall_cold));
    ctx.put("pin_toggles", fmt::format("{}", l.counts.pin_toggles));
    ctx.put("q_hot", num(l.q_hot));
    ctx.put("q_cold", num(l.q_cold));
    ctx.put("work", num(l.work));
    ctx.put("displacement_over_length", num((run.final_state.x_b - l.x_b0) / c.length));
    ctx.put("max_balance_residual", num(l.max_balance_residual));
    if (eff.defined) {
        ctx.put("efficiency_by_work", num(eff.by_work));
        ctx.put("efficiency_by_heat", num(eff.by_heat));
    }
    ctx.put("run_seconds", fmt::format("{:.3f}", secs));
}

void run_sweep(Context& ctx) {
    const SweepSettings& s = ctx.config.sweep;
    engine::EngineConfig base = s.base;
    base.seed = ctx.seed;
    base.sample_every = 0;
    const auto r = engine::efficiency_sweep(base, s.forces, s.runs_per_force, ctx.threads);
    CsvWriter rw(ctx.file("engine_sweep_runs"), "engine_sweep_runs", kCsvSchemaVersion, ctx.meta(),
                 {"force", "replicate", "events", "q_hot", "q_cold", "work", "eps", "eps_bar"});
    for (const auto& run : r.runs) {
        if (run.eff.defined)
            rw.row({run.force, run.replicate, run.events, run.q_hot, run.q_cold, run.work, run.eff.by_work,
                    run.eff.by_heat});
        else
            rw.row({run.force, run.replicate, run.events, run.q_hot, run.q_cold, run.work, "nan", "nan"});
    }
    ctx.done(rw);
    const double carnot = 1.0 - std::min(base.sigma2_face0, base.sigma2_face1) /
                                    std::max(base.sigma2_face0, base.sigma2_face1);
    CsvWriter pw(ctx.file("engine_sweep"), "engine_sweep", kCsvSchemaVersion, ctx.meta(),
                 {"force", "runs", "undefined", "mean_eps_bar", "se_eps_bar", "ci99_low", "ci99_high", "mean_eps",
                  "se_eps", "mean_q_hot", "mean_q_cold", "mean_work", "carnot"});
    const engine::SweepPoint* best = nullptr;
    for (const auto& p : r.points) {
        pw.row({p.force, p.replicas, p.undefined, p.mean_by_heat, p.se_by_heat, p.ci99_low, p.ci99_high,
                p.mean_by_work, p.se_by_work, p.mean_q_hot, p.mean_q_cold, p.mean_work, carnot});
        if (!best || p.mean_by_heat > best->mean_by_heat) best = &p;
    }
    ctx.done(pw);
    ctx.put("best_force", num(best->force));
    ctx.put("best_mean_eps_bar", num(best->mean_by_heat));
    ctx.put("best_ci99_low", num(best->ci99_low));
    ctx.put("best_ci99_high", num(best->ci99_high));
    ctx.put("carnot", num(carnot));
}

void run_hemisphere(Context& ctx) {
    const HemisphereSettings& s = ctx.config.hemisphere;
    const stat::HemisphereSpec spec(s.dimension, s.sigma);
    stat::RandomStream stream(ctx.seed);
    CsvWriter w(ctx.file("hemisphere"), "hemisphere", kCsvSchemaVersion, ctx.meta(), {"index", "v0", "v1"});
    std::vector<double> v0s, v1s;
    for (std::int64_t i = 0; i < s.samples; ++i) {
        const auto v = stat::sample_cosine_hemisphere(stream, spec);
        w.row({i, v[0], v[1]});
        v0s.push_back(v[0]);
        v1s.push_back(v[1]);
    }
    ctx.done(w);
    const double sigma = s.sigma;
    ctx.put("ks_v0_vs_post_collision",
            num(stat::ks_statistic(v0s, [sigma](double x) { return stat::cdf_mb_post_collision(x, sigma); }).statistic));
    ctx.put("ks_v1_vs_normal",
            num(stat::ks_statistic(v1s, [sigma](double x) { return stat::cdf_normal(x, 0.0, sigma); }).statistic));
}

void write_manifest(const ExperimentConfig& config, const ExperimentResult& r, const std::string& echoed,
                    const std::string& started) {
    toml::table m;
    m.insert("tool", "billiard-thermo");
    m.insert("version", BT_VERSION);
    m.insert("kind", std::string(kind_name(config.kind)));
    m.insert("seed", static_cast<std::int64_t>(config.seed));
    m.insert("replicas", config.replicas);
    toml::array seeds;
    // Derived seeds use all 64 bits, so they are kept as decimal strings.
    for (auto s : r.replica_seeds) seeds.push_back(fmt::format("{}", s));
    m.insert("replica_seeds", std::move(seeds));
    // Output location and worker count do not change results, so they stay out of the hash.
    ExperimentConfig canonical = config;
    canonical.out = ".";
    canonical.threads = 0;
    m.insert("config_hash", fmt::format("fnv1a64:{:016x}", fnv1a64(echo_config(canonical))));
    m.insert("csv_schema_version", kCsvSchemaVersion);
    m.insert("threads", static_cast<std::int64_t>(r.threads));
    m.insert("started_utc", started);
    m.insert("wall_clock_seconds", r.wall_seconds);
    toml::array files;
    for (const auto& f : r.files) files.push_back(f.filename().string());
    m.insert("files", std::move(files));
    toml::table summary;
    for (const auto& [k, v] : r.summary) summary.insert(k, v);
    m.insert("summary", std::move(summary));
    m.insert("config", toml::parse(echoed));

    std::ofstream out(r.manifest);
    out << m << '\n';
    if (!out) throw std::runtime_error("cannot write " + r.manifest.string());
}

}  // namespace

ExperimentResult run_experiment(const ExperimentConfig& config, std::ostream* log) {
    if (auto errors = validate(config); !errors.empty()) throw ConfigError(std::move(errors));
    std::filesystem::create_directories(config.out);

    const auto t0 = std::chrono::steady_clock::now();
    const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm utc{};
    gmtime_r(&now, &utc);
    char started[32];
    std::strftime(started, sizeof started, "%Y-%m-%dT%H:%M:%SZ", &utc);

    ExperimentResult result;
    result.threads = worker_count(config.threads);
    for (std::int64_t r = 0; r < config.replicas; ++r) {
        Context ctx{config,
                    config.replica_seed(r),
                    config.replicas == 1 ? "" : fmt::format("_r{}", r),
                    result.threads,
                    result,
                    config.replicas == 1 ? "" : fmt::format("r{}.", r)};
        result.replica_seeds.push_back(ctx.seed);
        if (log) *log << fmt::format("{} replica {} seed {}\n", kind_name(config.kind), r, ctx.seed);
        switch (config.kind) {
            case ExperimentKind::chamber: run_chamber(ctx); break;
            case ExperimentKind::parallelogram: run_parallelogram(ctx); break;
            case ExperimentKind::thermostat: run_thermostat(ctx); break;
            case ExperimentKind::op: run_operator(ctx); break;
            case ExperimentKind::heatflow: run_heatflow(ctx); break;
            case ExperimentKind::engine: run_engine(ctx); break;
            case ExperimentKind::engine_sweep: run_sweep(ctx); break;
            case ExperimentKind::hemisphere: run_hemisphere(ctx); break;
        }
    }
    result.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    result.manifest = config.out / "manifest.toml";
    write_manifest(config, result, echo_config(config), started);
    return result;
}

}  // namespace bt::cli
