#include "billiard_thermo/cli/config.hpp"

#include <array>
#include <cmath>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

#include <fmt/format.h>

#include <toml.hpp>

#include "billiard_thermo/errors.hpp"
#include "billiard_thermo/random_stream.hpp"
#include "billiard_thermo/thermostat.hpp"

namespace bt::cli {

namespace {

constexpr std::array<std::pair<ExperimentKind, std::string_view>, 8> kKinds{{
    {ExperimentKind::chamber, "chamber"},
    {ExperimentKind::parallelogram, "parallelogram"},
    {ExperimentKind::thermostat, "thermostat"},
    {ExperimentKind::op, "operator"},
    {ExperimentKind::heatflow, "heatflow"},
    {ExperimentKind::engine, "engine"},
    {ExperimentKind::engine_sweep, "engine-sweep"},
    {ExperimentKind::hemisphere, "hemisphere"},
}};

// Field lists shared by the reader and the echo writer.

template <class F>
void fields(ChamberSettings& s, F&& f) {
    f("width", s.geometry.width);
    f("height", s.geometry.height);
    f("screen_x", s.geometry.screen_x);
    f("spacing", s.geometry.spacing);
    f("radius", s.geometry.radius);
    f("entries", s.entries);
    f("expansion_particles", s.expansion_particles);
    f("t_max", s.t_max);
    f("sample_dt", s.sample_dt);
    f("scattering_line", s.scattering_line);
}

template <class F>
void fields(ParallelogramSettings& s, F&& f) {
    f("base", s.geometry.base);
    f("side", s.geometry.side);
    f("angle", s.geometry.angle);
    f("crossings", s.crossings);
    f("random_jumps", s.random_jumps);
    f("vx", s.vx);
    f("vy", s.vy);
}

template <class F>
void fields(ThermostatSettings& s, F&& f) {
    f("wall_mass", s.wall_mass);
    f("gas_mass", s.gas_mass);
    f("sigma2", s.sigma2);
    f("steps", s.steps);
    f("burn_in", s.burn_in);
    f("initial_speed", s.initial_speed);
}

template <class F>
void fields(OperatorSettings& s, F&& f) {
    f("wall_mass", s.wall_mass);
    f("gas_mass", s.gas_mass);
    f("sigma2", s.sigma2);
    f("cells", s.cells);
    f("samples_per_row", s.samples_per_row);
    f("steps", s.steps);
    f("initial_speed", s.initial_speed);
}

template <class F>
void fields(HeatflowSettings& s, F&& f) {
    f("wall_mass", s.run.wall_mass);
    f("gas_mass", s.run.gas_mass);
    f("sigma2_hot", s.run.sigma2_hot);
    f("sigma2_cold", s.run.sigma2_cold);
    f("collisions", s.run.n_collisions);
    f("linearity_grid", s.linearity_grid);
    f("linearity_collisions", s.linearity_collisions);
    f("temperature_shift", s.temperature_shift);
}

template <class F>
void engine_fields(engine::EngineConfig& c, F&& f) {
    f("wall_mass", c.wall_mass);
    f("brownian_mass", c.brownian_mass);
    f("gas_mass", c.gas_mass);
    f("length", c.length);
    f("sigma2_face0", c.sigma2_face0);
    f("sigma2_face1", c.sigma2_face1);
    f("tau_closed", c.tau_closed);
    f("tau_open", c.tau_open);
    f("phase", c.phase);
    f("randomize_phase", c.randomize_phase);
    f("force", c.force);
    f("events", c.events);
    f("check_balance", c.check_balance);
}

template <class F>
void fields(EngineSettings& s, F&& f) {
    engine_fields(s.run, f);
    f("sample_every", s.run.sample_every);
}

template <class F>
void fields(SweepSettings& s, F&& f) {
    engine_fields(s.base, f);
    f("forces", s.forces);
    f("runs_per_force", s.runs_per_force);
}

template <class F>
void fields(HemisphereSettings& s, F&& f) {
    f("dimension", s.dimension);
    f("sigma", s.sigma);
    f("samples", s.samples);
}

template <class F>
void kind_fields(ExperimentConfig& c, F&& f) {
    switch (c.kind) {
        case ExperimentKind::chamber: fields(c.chamber, f); break;
        case ExperimentKind::parallelogram: fields(c.parallelogram, f); break;
        case ExperimentKind::thermostat: fields(c.thermostat, f); break;
        case ExperimentKind::op: fields(c.op, f); break;
        case ExperimentKind::heatflow: fields(c.heatflow, f); break;
        case ExperimentKind::engine: fields(c.engine, f); break;
        case ExperimentKind::engine_sweep: fields(c.sweep, f); break;
        case ExperimentKind::hemisphere: fields(c.hemisphere, f); break;
    }
}

std::string where(std::string_view source, const toml::node& n) {
    const auto& b = n.source().begin;
    return fmt::format("{}:{}", source, b.line);
}

class Reader {
public:
    Reader(const toml::table& table, std::string prefix, std::string_view source, std::vector<std::string>& errors)
        : table_(table), prefix_(std::move(prefix)), source_(source), errors_(errors) {}

    void operator()(std::string_view key, double& out) {
        if (const toml::node* n = take(key)) {
            if (auto v = n->value<double>()) out = *v;
            else fail(*n, key, "must be a number");
        }
    }
    void operator()(std::string_view key, std::optional<double>& out) {
        double v = 0.0;
        const std::size_t before = errors_.size();
        if (!table_.contains(key)) return;
        (*this)(key, v);
        if (errors_.size() == before) out = v;
    }
    void operator()(std::string_view key, std::int64_t& out) {
        if (const toml::node* n = take(key)) {
            if (n->is_integer()) {
                out = n->as_integer()->get();
            } else if (n->is_floating_point()) {
                // Allows 1e6 for counts.
                const double d = n->as_floating_point()->get();
                if (std::floor(d) == d && std::abs(d) < 9.0e15) out = static_cast<std::int64_t>(d);
                else fail(*n, key, "must be a whole number");
            } else {
                fail(*n, key, "must be an integer");
            }
        }
    }
    void operator()(std::string_view key, int& out) {
        std::int64_t v = out;
        (*this)(key, v);
        if (v < std::numeric_limits<int>::min() || v > std::numeric_limits<int>::max()) {
            errors_.push_back(fmt::format("{}{}: out of range", prefix_, key));
            return;
        }
        out = static_cast<int>(v);
    }
    void operator()(std::string_view key, bool& out) {
        if (const toml::node* n = take(key)) {
            if (auto v = n->value_exact<bool>()) out = *v;
            else fail(*n, key, "must be true or false");
        }
    }
    void operator()(std::string_view key, std::string& out) {
        if (const toml::node* n = take(key)) {
            if (auto v = n->value_exact<std::string>()) out = *v;
            else fail(*n, key, "must be a string");
        }
    }
    void operator()(std::string_view key, std::vector<double>& out) {
        if (const toml::node* n = take(key)) {
            const toml::array* arr = n->as_array();
            if (!arr) {
                fail(*n, key, "must be an array of numbers");
                return;
            }
            std::vector<double> vals;
            for (const toml::node& e : *arr) {
                if (auto v = e.value<double>()) {
                    vals.push_back(*v);
                } else {
                    fail(e, key, "must contain only numbers");
                    return;
                }
            }
            out = std::move(vals);
        }
    }

    /// Reports every key that was not consumed.
    void finish() {
        for (const auto& [k, node] : table_)
            if (!seen_.contains(std::string(k.str())))
                errors_.push_back(fmt::format("{}: unknown key '{}{}'", where(source_, node), prefix_, k.str()));
    }

private:
    const toml::node* take(std::string_view key) {
        seen_.insert(std::string(key));
        return table_.get(key);
    }
    void fail(const toml::node& n, std::string_view key, std::string_view what) {
        errors_.push_back(fmt::format("{}: '{}{}' {}", where(source_, n), prefix_, key, what));
    }

    const toml::table& table_;
    std::string prefix_;
    std::string_view source_;
    std::vector<std::string>& errors_;
    std::set<std::string> seen_;
};

struct Writer {
    toml::table& t;
    void operator()(std::string_view key, double v) { t.insert_or_assign(key, v); }
    void operator()(std::string_view key, const std::optional<double>& v) {
        if (v) t.insert_or_assign(key, *v);
    }
    void operator()(std::string_view key, std::int64_t v) { t.insert_or_assign(key, v); }
    void operator()(std::string_view key, int v) { t.insert_or_assign(key, static_cast<std::int64_t>(v)); }
    void operator()(std::string_view key, bool v) { t.insert_or_assign(key, v); }
    void operator()(std::string_view key, const std::vector<double>& v) {
        toml::array a;
        for (double x : v) a.push_back(x);
        t.insert_or_assign(key, std::move(a));
    }
};

void check_gamma(std::vector<std::string>& e, std::string_view table, double wall_mass, double gas_mass) {
    if (!(wall_mass > 0.0) || !(gas_mass > 0.0)) return;
    const double g = std::sqrt(gas_mass / wall_mass);
    if (!(g < thermo::kGammaMax))
        e.push_back(fmt::format("{}: gamma = sqrt(gas_mass / wall_mass) = {:.6g} violates the thermostat bound "
                                "gamma < 1/sqrt(3) = {:.6g}",
                                table, g, thermo::kGammaMax));
}

void positive(std::vector<std::string>& e, std::string_view table, std::string_view key, double v) {
    if (!(v > 0.0) || !std::isfinite(v)) e.push_back(fmt::format("{}.{} must be positive (got {})", table, key, v));
}

void at_least(std::vector<std::string>& e, std::string_view table, std::string_view key, std::int64_t v,
              std::int64_t lo) {
    if (v < lo) e.push_back(fmt::format("{}.{} must be at least {} (got {})", table, key, lo, v));
}

template <class Fn>
void module_check(std::vector<std::string>& e, std::string_view table, Fn&& fn) {
    try {
        fn();
    } catch (const std::invalid_argument& ex) {
        e.push_back(fmt::format("{}: {}", table, ex.what()));
    }
}

void validate_engine(std::vector<std::string>& e, std::string_view t, const engine::EngineConfig& c) {
    positive(e, t, "wall_mass", c.wall_mass);
    positive(e, t, "brownian_mass", c.brownian_mass);
    positive(e, t, "gas_mass", c.gas_mass);
    positive(e, t, "length", c.length);
    positive(e, t, "sigma2_face0", c.sigma2_face0);
    positive(e, t, "sigma2_face1", c.sigma2_face1);
    if (c.tau_closed) positive(e, t, "tau_closed", *c.tau_closed);
    if (c.tau_open) positive(e, t, "tau_open", *c.tau_open);
    if (!(c.phase >= 0.0 && c.phase < c.period()))
        e.push_back(fmt::format("{}.phase must lie in [0, tau_closed + tau_open) (got {})", t, c.phase));
    if (!std::isfinite(c.force)) e.push_back(fmt::format("{}.force must be finite", t));
    at_least(e, t, "events", c.events, 0);
    at_least(e, t, "sample_every", c.sample_every, 0);
    check_gamma(e, t, c.wall_mass, c.gas_mass);
}

void validate_heat_counts(std::vector<std::string>& e, std::string_view key, std::int64_t n) {
    if (n < 40 || n % 2 != 0) e.push_back(fmt::format("heatflow.{} must be even and at least 40 (got {})", key, n));
}

}  // namespace

std::string_view kind_name(ExperimentKind kind) noexcept {
    for (const auto& [k, n] : kKinds)
        if (k == kind) return n;
    return "?";
}

std::optional<ExperimentKind> parse_kind(std::string_view name) noexcept {
    for (const auto& [k, n] : kKinds)
        if (n == name) return k;
    return std::nullopt;
}

const std::vector<ExperimentKind>& all_kinds() noexcept {
    static const std::vector<ExperimentKind> kinds = [] {
        std::vector<ExperimentKind> v;
        for (const auto& p : kKinds) v.push_back(p.first);
        return v;
    }();
    return kinds;
}

SweepSettings::SweepSettings() {
    base.sigma2_face0 = 1.0;
    base.sigma2_face1 = 8.0;
    base.events = 2000;
    base.randomize_phase = true;
    forces.push_back(0.0);
    for (int k = 0; k <= 10; ++k) forces.push_back(std::pow(10.0, 0.5 * k));
}

std::uint64_t ExperimentConfig::replica_seed(std::int64_t r) const noexcept {
    return replicas == 1 ? seed : stat::RandomStream::derive_seed(seed, static_cast<std::uint64_t>(r));
}

ExperimentConfig default_config(ExperimentKind kind) {
    ExperimentConfig c;
    c.kind = kind;
    return c;
}

std::vector<std::string> validate(const ExperimentConfig& c) {
    std::vector<std::string> e;
    if (c.replicas < 1) e.push_back(fmt::format("replicas must be at least 1 (got {})", c.replicas));
    if (c.out.empty()) e.push_back("out must not be empty");
    if (c.seed > static_cast<std::uint64_t>(std::numeric_limits<std::int64_t>::max()))
        e.push_back("seed must fit in a signed 64-bit integer");
    switch (c.kind) {
        case ExperimentKind::chamber: {
            const auto& s = c.chamber;
            module_check(e, "chamber", [&] { s.geometry.validate(); });
            at_least(e, "chamber", "entries", s.entries, 1);
            at_least(e, "chamber", "expansion_particles", s.expansion_particles, 0);
            if (s.expansion_particles > 0) {
                positive(e, "chamber", "t_max", s.t_max);
                positive(e, "chamber", "sample_dt", s.sample_dt);
                if (s.sample_dt > s.t_max) e.push_back("chamber.sample_dt must not exceed chamber.t_max");
            }
            break;
        }
        case ExperimentKind::parallelogram: {
            const auto& s = c.parallelogram;
            module_check(e, "parallelogram", [&] { s.geometry.validate(); });
            at_least(e, "parallelogram", "crossings", s.crossings, 1);
            if (!(std::hypot(s.vx, s.vy) > 0.0) || !std::isfinite(std::hypot(s.vx, s.vy)))
                e.push_back("parallelogram: initial direction (vx, vy) must be a finite non-zero vector");
            break;
        }
        case ExperimentKind::thermostat: {
            const auto& s = c.thermostat;
            positive(e, "thermostat", "wall_mass", s.wall_mass);
            positive(e, "thermostat", "gas_mass", s.gas_mass);
            positive(e, "thermostat", "sigma2", s.sigma2);
            positive(e, "thermostat", "initial_speed", s.initial_speed);
            at_least(e, "thermostat", "steps", s.steps, 1);
            at_least(e, "thermostat", "burn_in", s.burn_in, 0);
            check_gamma(e, "thermostat", s.wall_mass, s.gas_mass);
            break;
        }
        case ExperimentKind::op: {
            const auto& s = c.op;
            positive(e, "operator", "wall_mass", s.wall_mass);
            positive(e, "operator", "gas_mass", s.gas_mass);
            positive(e, "operator", "sigma2", s.sigma2);
            positive(e, "operator", "initial_speed", s.initial_speed);
            at_least(e, "operator", "cells", s.cells, 2);
            at_least(e, "operator", "samples_per_row", s.samples_per_row, 1);
            at_least(e, "operator", "steps", s.steps, 1);
            check_gamma(e, "operator", s.wall_mass, s.gas_mass);
            break;
        }
        case ExperimentKind::heatflow: {
            const auto& s = c.heatflow;
            positive(e, "heatflow", "wall_mass", s.run.wall_mass);
            positive(e, "heatflow", "gas_mass", s.run.gas_mass);
            positive(e, "heatflow", "sigma2_hot", s.run.sigma2_hot);
            positive(e, "heatflow", "sigma2_cold", s.run.sigma2_cold);
            validate_heat_counts(e, "collisions", s.run.n_collisions);
            check_gamma(e, "heatflow", s.run.wall_mass, s.run.gas_mass);
            if (!s.linearity_grid.empty()) {
                if (s.linearity_grid.size() < 5) e.push_back("heatflow.linearity_grid needs at least 5 values");
                std::set<double> distinct(s.linearity_grid.begin(), s.linearity_grid.end());
                if (distinct.size() != s.linearity_grid.size())
                    e.push_back("heatflow.linearity_grid has repeated values");
                for (double x : s.linearity_grid)
                    if (!(x + s.temperature_shift / s.run.wall_mass > 0.0))
                        e.push_back(fmt::format("heatflow.linearity_grid value {} gives a non-positive variance", x));
                validate_heat_counts(e, "linearity_collisions", s.linearity_collisions);
            }
            if (!std::isfinite(s.temperature_shift)) e.push_back("heatflow.temperature_shift must be finite");
            break;
        }
        case ExperimentKind::engine: validate_engine(e, "engine", c.engine.run); break;
        case ExperimentKind::engine_sweep: {
            const auto& s = c.sweep;
            validate_engine(e, "engine-sweep", s.base);
            at_least(e, "engine-sweep", "events", s.base.events, 1);
            at_least(e, "engine-sweep", "runs_per_force", s.runs_per_force, 2);
            if (s.forces.empty()) e.push_back("engine-sweep.forces must not be empty");
            for (double f : s.forces)
                if (!std::isfinite(f)) e.push_back("engine-sweep.forces must be finite");
            break;
        }
        case ExperimentKind::hemisphere: {
            const auto& s = c.hemisphere;
            if (s.dimension < 1) e.push_back("hemisphere.dimension must be at least 1");
            positive(e, "hemisphere", "sigma", s.sigma);
            at_least(e, "hemisphere", "samples", s.samples, 1);
            break;
        }
    }
    return e;
}

ExperimentConfig parse_config_text(std::string_view text, std::string_view source,
                                   std::optional<ExperimentKind> expected) {
    toml::table root;
    try {
        root = toml::parse(text, source);
    } catch (const toml::parse_error& err) {
        const auto& b = err.source().begin;
        throw ConfigError({fmt::format("{}:{}:{}: syntax error: {}", source, b.line, b.column, err.description())});
    }

    std::vector<std::string> errors;
    ExperimentConfig c;
    std::string kind = expected ? std::string(kind_name(*expected)) : std::string();
    std::string out = c.out.string();
    std::int64_t seed = static_cast<std::int64_t>(c.seed);
    std::int64_t threads = 0;

    Reader top(root, "", source, errors);
    top("kind", kind);
    top("seed", seed);
    top("replicas", c.replicas);
    top("out", out);
    top("threads", threads);

    const auto parsed_kind = parse_kind(kind);
    if (kind.empty()) {
        errors.push_back(fmt::format("{}: 'kind' is required when no subcommand is given", source));
    } else if (!parsed_kind) {
        errors.push_back(fmt::format("{}: unknown experiment kind '{}'", source, kind));
    } else if (expected && *parsed_kind != *expected) {
        errors.push_back(fmt::format("{}: file is for '{}' but the subcommand is '{}'", source, kind,
                                     kind_name(*expected)));
    }
    if (seed < 0) errors.push_back(fmt::format("seed must be non-negative (got {})", seed));
    if (threads < 0) errors.push_back(fmt::format("threads must be non-negative (got {})", threads));
    c.seed = static_cast<std::uint64_t>(seed);
    c.threads = static_cast<unsigned>(std::max<std::int64_t>(threads, 0));
    c.out = out;

    if (parsed_kind) {
        c.kind = *parsed_kind;
        const std::string name(kind_name(c.kind));
        // Tables for other experiments, or stray top-level keys, are errors.
        for (const auto& [k, node] : root) {
            const std::string key(k.str());
            if (key == "kind" || key == "seed" || key == "replicas" || key == "out" || key == "threads") continue;
            if (key == name) {
                if (const toml::table* t = node.as_table()) {
                    Reader r(*t, name + ".", source, errors);
                    kind_fields(c, r);
                    r.finish();
                } else {
                    errors.push_back(fmt::format("{}: '{}' must be a table", where(source, node), key));
                }
            } else if (parse_kind(key)) {
                errors.push_back(fmt::format("{}: table [{}] does not apply to experiment '{}'",
                                             where(source, node), key, name));
            } else {
                errors.push_back(fmt::format("{}: unknown key '{}'", where(source, node), key));
            }
        }
        for (auto& v : validate(c)) errors.push_back(std::move(v));
    }
    if (!errors.empty()) throw ConfigError(std::move(errors));
    return c;
}

ExperimentConfig parse_config(const std::filesystem::path& path, std::optional<ExperimentKind> expected) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError({fmt::format("{}: cannot read file", path.string())});
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config_text(ss.str(), path.string(), expected);
}

std::string echo_config(const ExperimentConfig& config) {
    ExperimentConfig c = config;
    // Resolve defaults that depend on other fields.
    auto resolve = [](engine::EngineConfig& e) {
        e.tau_closed = e.closed_time();
        e.tau_open = e.open_time();
    };
    resolve(c.engine.run);
    resolve(c.sweep.base);

    toml::table root;
    root.insert("kind", std::string(kind_name(c.kind)));
    root.insert("seed", static_cast<std::int64_t>(c.seed));
    root.insert("replicas", c.replicas);
    root.insert("out", c.out.generic_string());
    root.insert("threads", static_cast<std::int64_t>(c.threads));
    toml::table body;
    Writer w{body};
    kind_fields(c, w);
    root.insert(std::string(kind_name(c.kind)), std::move(body));
    std::ostringstream os;
    os << root << '\n';
    return os.str();
}

std::uint64_t fnv1a64(std::string_view bytes) noexcept {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char ch : bytes) {
        h ^= ch;
        h *= 0x100000001b3ULL;
    }
    return h;
}

}  // namespace bt::cli
