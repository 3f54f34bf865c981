#include "billiard_thermo/chamber.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

#include "billiard_thermo/distributions.hpp"
#include "billiard_thermo/parallel.hpp"

namespace bt::billiard {

namespace {

constexpr double kHalfPi = std::numbers::pi / 2.0;
constexpr int kCellRetries = 100;

double unit_offset(double y, double spacing) {
    const double u = y / spacing;
    return std::clamp(u - std::floor(u), 0.0, 1.0);
}

// Inward crossing of an entry line, or nothing.
std::optional<ScreenEntry> entry_from_crossing(const ChamberTable& ct, const ChamberGeometry& g, const StepResult& r,
                                               const ParticleState& s) {
    const Vec2 v = r.incoming;
    ScreenEntry e;
    if (r.element == ct.left_port && v.x > 0.0) {
        e.side = 0;
        e.angle = std::atan2(v.y, v.x);
    } else if (r.element == ct.right_port && v.x < 0.0) {
        e.side = 1;
        e.angle = std::atan2(v.y, -v.x);
    } else {
        return std::nullopt;
    }
    e.offset = unit_offset(s.position.y, g.spacing);
    e.time = s.time;
    return e;
}

}  // namespace

void ChamberGeometry::validate() const {
    auto fail = [](const std::string& m) { throw std::invalid_argument("ChamberGeometry: " + m); };
    if (!(width > 0.0) || !(height > 0.0)) fail("width and height must be positive");
    if (!(spacing > 0.0)) fail("spacing must be positive");
    if (!(radius > 0.0)) fail("radius must be positive");
    if (!(radius < 0.5 * spacing)) fail("radius must be below spacing/2 so that gaps exist");
    const double n = height / spacing;
    if (std::abs(n - std::round(n)) > 1e-9) fail("height must be a whole number of spacings");
    if (!(screen_x - radius > 0.0) || !(screen_x + radius < width)) fail("screen must lie inside the container");
}

int ChamberGeometry::cells() const { return static_cast<int>(std::lround(height / spacing)); }

ChamberTable build_chamber_table(const ChamberGeometry& g) {
    g.validate();
    ChamberTable ct;
    auto& t = ct.table;
    ct.left_wall = t.add(BoundaryElement::segment({0.0, 0.0}, {0.0, g.height}));
    t.add(BoundaryElement::segment({g.width, 0.0}, {g.width, g.height}));
    t.add(BoundaryElement::segment({0.0, 0.0}, {g.width, 0.0}));
    t.add(BoundaryElement::segment({0.0, g.height}, {g.width, g.height}));
    for (int j = 0; j < g.cells(); ++j)
        t.add(BoundaryElement::circle({g.screen_x, (j + 0.5) * g.spacing}, g.radius));
    ct.left_port = t.add(BoundaryElement::segment({g.left_line(), 0.0}, {g.left_line(), g.height}, Rule::port, 0));
    ct.right_port = t.add(BoundaryElement::segment({g.right_line(), 0.0}, {g.right_line(), g.height}, Rule::port, 1));
    return ct;
}

ParticleState random_left_state(const ChamberGeometry& g, stat::RandomStream& stream) {
    ParticleState s;
    // Keep clear of the walls so the first flight is never degenerate.
    const double margin = 1e-6;
    s.position.x = stat::draw_uniform(stream, margin, g.left_line() - margin);
    s.position.y = stat::draw_uniform(stream, margin, g.height - margin);
    const double phi = stat::draw_uniform(stream, -std::numbers::pi, std::numbers::pi);
    s.velocity = {std::cos(phi), std::sin(phi)};
    return s;
}

ChamberRun run_divided_chamber(const ChamberGeometry& g, const ParticleState& initial, std::int64_t n_entries,
                               stat::RandomStream& restart) {
    if (n_entries < 0) throw std::invalid_argument("run_divided_chamber: negative entry count");
    const ChamberTable ct = build_chamber_table(g);
    ChamberRun run;
    run.entries.reserve(static_cast<std::size_t>(n_entries));
    Trajectory tr(ct.table, initial);
    std::int64_t done_reflections = 0;
    while (static_cast<std::int64_t>(run.entries.size()) < n_entries) {
        const StepResult r = tr.step();
        if (r.kind == StepKind::reflection) continue;
        if (r.kind == StepKind::port_crossing) {
            if (auto e = entry_from_crossing(ct, g, r, tr.state())) run.entries.push_back(*e);
            continue;
        }
        ++run.singular;
        done_reflections += tr.reflections();
        ParticleState fresh = random_left_state(g, restart);
        fresh.time = tr.state().time;
        tr = Trajectory(ct.table, fresh);
    }
    run.reflections = done_reflections + tr.reflections();
    run.elapsed = tr.state().time - initial.time;
    return run;
}

FundamentalCell::FundamentalCell(const ChamberGeometry& g) : radius_(g.radius), spacing_(g.spacing) {
    g.validate();
    const double r = radius_;
    const double s = spacing_;
    table_.add(BoundaryElement::segment({-r, 0.0}, {r, 0.0}));
    table_.add(BoundaryElement::segment({-r, s}, {r, s}));
    table_.add(BoundaryElement::circle({0.0, 0.5 * s}, r));
    port_left_ = table_.add(BoundaryElement::segment({-r, 0.0}, {-r, s}, Rule::port, 0));
    port_right_ = table_.add(BoundaryElement::segment({r, 0.0}, {r, s}, Rule::port, 1));
}

std::optional<CellExit> FundamentalCell::map(const ScreenEntry& entry) const {
    if ((entry.side != 0 && entry.side != 1) || !(entry.offset >= 0.0 && entry.offset <= 1.0) ||
        !(std::abs(entry.angle) <= kHalfPi))
        throw std::invalid_argument("cell_map_T: entry outside the reduced phase space");
    const double c = std::cos(entry.angle);
    if (std::abs(c) < kSingularTolerance) return std::nullopt;

    ParticleState s;
    const double sign = entry.side == 0 ? 1.0 : -1.0;
    s.position = {-sign * radius_, entry.offset * spacing_};
    s.velocity = {sign * c, std::sin(entry.angle)};
    Trajectory tr(table_, s, entry.side == 0 ? port_left_ : port_right_);
    for (std::int64_t i = 0; i < kMaxEvents; ++i) {
        const StepResult r = tr.step();
        if (r.kind == StepKind::reflection) continue;
        if (r.kind != StepKind::port_crossing) return std::nullopt;
        const ParticleState& out = tr.state();
        CellExit ex;
        ex.exit.side = r.label;
        ex.exit.angle = r.label == 1 ? std::atan2(out.velocity.y, out.velocity.x)
                                     : std::atan2(out.velocity.y, -out.velocity.x);
        ex.exit.offset = std::clamp(out.position.y / spacing_, 0.0, 1.0);
        ex.transit_time = out.time;
        ex.exit.time = entry.time + out.time;
        return ex;
    }
    return std::nullopt;
}

std::optional<CellExit> cell_map_T(const ScreenEntry& entry, const ChamberGeometry& g) {
    return FundamentalCell(g).map(entry);
}

ExpansionSeries ensemble_expansion(const ChamberGeometry& g, std::int64_t n_particles, double t_max, double sample_dt,
                                   const stat::RandomStream& stream, ExpansionModel model, unsigned threads) {
    if (n_particles <= 0) throw std::invalid_argument("ensemble_expansion: need at least one particle");
    if (!(sample_dt > 0.0) || !(t_max >= 0.0)) throw std::invalid_argument("ensemble_expansion: bad time grid");
    const ChamberTable ct = build_chamber_table(g);
    const FundamentalCell cell(g);
    const auto n_samples = static_cast<std::size_t>(std::floor(t_max / sample_dt + 1e-9)) + 1;

    const std::int64_t n_blocks = std::min<std::int64_t>(n_particles, 256);
    std::vector<std::vector<std::int64_t>> block_right(static_cast<std::size_t>(n_blocks));
    std::vector<std::int64_t> block_singular(static_cast<std::size_t>(n_blocks), 0);

    auto run_particle = [&](std::int64_t index, std::vector<std::uint8_t>& right) -> bool {
        stat::RandomStream rs = stream.substream(static_cast<std::uint64_t>(index));
        const double psi = stat::draw_uniform(rs, -std::numbers::pi / 4.0, std::numbers::pi / 4.0);
        ParticleState s;
        s.position = {0.0, 0.5 * g.height};
        s.velocity = {std::cos(psi), std::sin(psi)};
        Trajectory tr(ct.table, s, ct.left_wall);
        std::size_t k = 0;
        auto fill_until = [&](double t_end, auto&& is_right) {
            while (k < n_samples && static_cast<double>(k) * sample_dt < t_end) {
                right[k] = is_right(static_cast<double>(k) * sample_dt) ? 1 : 0;
                ++k;
            }
        };
        while (k < n_samples) {
            const BoundaryEvent ev = tr.peek();
            if (ev.status != EventStatus::hit) return false;
            const ParticleState cur = tr.state();
            fill_until(ev.time, [&](double t) { return cur.position.x + cur.velocity.x * (t - cur.time) > g.screen_x; });
            const StepResult r = tr.apply(ev);
            if (model != ExpansionModel::scattering_line || r.kind != StepKind::port_crossing) continue;
            auto entry = entry_from_crossing(ct, g, r, tr.state());
            if (!entry) continue;
            const double y = tr.state().position.y;
            const int j = std::clamp(static_cast<int>(std::floor(y / g.spacing)), 0, g.cells() - 1);
            std::optional<CellExit> ex;
            for (int attempt = 0; attempt < kCellRetries && !ex; ++attempt) {
                entry->offset = stat::draw_uniform(rs, 0.0, 1.0);
                ex = cell.map(*entry);
            }
            if (!ex) return false;
            const bool entered_right = entry->side == 1;
            fill_until(tr.state().time + ex->transit_time, [&](double) { return entered_right; });
            const int k_out = ex->exit.side;
            const double x = k_out == 1 ? g.right_line() : g.left_line();
            const double c = std::cos(ex->exit.angle);
            const Vec2 v = {k_out == 1 ? c : -c, std::sin(ex->exit.angle)};
            tr.place({x, (j + ex->exit.offset) * g.spacing}, v, k_out == 1 ? ct.right_port : ct.left_port);
            tr.add_time(ex->transit_time);
        }
        return true;
    };

    parallel_for(n_blocks, threads, [&](std::int64_t b) {
        const std::int64_t lo = b * n_particles / n_blocks;
        const std::int64_t hi = (b + 1) * n_particles / n_blocks;
        auto& acc = block_right[static_cast<std::size_t>(b)];
        acc.assign(n_samples, 0);
        std::vector<std::uint8_t> right(n_samples);
        for (std::int64_t i = lo; i < hi; ++i) {
            if (!run_particle(i, right)) {
                ++block_singular[static_cast<std::size_t>(b)];
                continue;
            }
            for (std::size_t k = 0; k < n_samples; ++k) acc[k] += right[k];
        }
    });

    ExpansionSeries out;
    out.particles = n_particles;
    for (auto s : block_singular) out.singular += s;
    const double kept = static_cast<double>(n_particles - out.singular);
    out.times.resize(n_samples);
    out.right_fraction.assign(n_samples, 0.0);
    for (std::size_t k = 0; k < n_samples; ++k) {
        std::int64_t total = 0;
        for (const auto& acc : block_right) total += acc[k];
        out.times[k] = static_cast<double>(k) * sample_dt;
        out.right_fraction[k] = kept > 0.0 ? static_cast<double>(total) / kept : 0.0;
    }
    return out;
}

}  // namespace bt::billiard
