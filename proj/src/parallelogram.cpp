#include "billiard_thermo/parallelogram.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "billiard_thermo/distributions.hpp"

namespace bt::billiard {

void ParallelogramGeometry::validate() const {
    if (!(base > 0.0) || !(side > 0.0)) throw std::invalid_argument("ParallelogramGeometry: sides must be positive");
    if (!(angle > 0.0 && angle < std::numbers::pi))
        throw std::invalid_argument("ParallelogramGeometry: angle must lie in (0, pi)");
}

ParallelogramTable::ParallelogramTable(const ParallelogramGeometry& g) : geometry_(g) {
    g.validate();
    const Vec2 a = g.a(), b = g.b(), c = g.c(), d = g.d();
    table_.add(BoundaryElement::segment(a, b));
    table_.add(BoundaryElement::segment(b, c));
    table_.add(BoundaryElement::segment(c, d));
    table_.add(BoundaryElement::segment(d, a));
    diagonal_ = table_.add(BoundaryElement::segment(b, d, Rule::port, 0));
    tangent_ = normalized(d - b);
    up_normal_ = perp(tangent_);
    if (dot(c - b, up_normal_) < 0.0) up_normal_ = -up_normal_;
}

Crossing ParallelogramTable::describe(Vec2 velocity, Vec2 p, double time) const {
    Crossing x;
    const double vn = dot(velocity, up_normal_);
    x.upward = vn > 0.0;
    x.angle = std::atan2(dot(velocity, tangent_), std::abs(vn));
    const Vec2 bd = geometry_.d() - geometry_.b();
    x.position = dot(p - geometry_.b(), bd) / dot(bd, bd);
    x.time = time;
    return x;
}

ParallelogramRun run_parallelogram(const ParallelogramGeometry& g, const ParticleState& initial,
                                   std::int64_t n_crossings, std::optional<std::size_t> on_element) {
    const ParallelogramTable pt(g);
    ParallelogramRun run;
    run.crossings.reserve(static_cast<std::size_t>(std::max<std::int64_t>(n_crossings, 0)));
    Trajectory tr(pt.table(), initial, on_element);
    while (static_cast<std::int64_t>(run.crossings.size()) < n_crossings) {
        const StepResult r = tr.step();
        if (r.kind == StepKind::reflection) continue;
        if (r.kind != StepKind::port_crossing) {
            run.singular = true;
            break;
        }
        run.crossings.push_back(pt.describe(r.incoming, tr.state().position, tr.state().time));
    }
    return run;
}

RandomParallelogram::RandomParallelogram(const ParallelogramGeometry& g, Vec2 velocity, stat::RandomStream&)
    : table_(g), velocity_(normalized(velocity)) {}

Crossing RandomParallelogram::step(stat::RandomStream& stream) {
    for (int attempt = 0; attempt < kMaxRetries; ++attempt) {
        const double u = stat::draw_uniform(stream, 0.0, 1.0);
        last_jump_ = u;
        ParticleState s{table_.diagonal_point(u), velocity_, time_};
        Trajectory tr(table_.table(), s, table_.diagonal());
        for (;;) {
            const StepResult r = tr.step();
            if (r.kind == StepKind::reflection) continue;
            if (r.kind == StepKind::port_crossing) {
                velocity_ = tr.state().velocity;
                reflections_ += tr.reflections();
                if (reflections_ >= Trajectory::kRenormalizeEvery) {
                    velocity_ = normalized(velocity_);
                    reflections_ = 0;
                }
                time_ = tr.state().time;
                return table_.describe(r.incoming, tr.state().position, time_);
            }
            break;
        }
        ++resamples_;
    }
    throw std::runtime_error("RandomParallelogram: singular trajectory after repeated resampling");
}

ParticleState parallelogram_random_step(stat::RandomStream& stream, const ParticleState& state,
                                        const ParallelogramGeometry& g) {
    RandomParallelogram rp(g, state.velocity, stream);
    const Crossing x = rp.step(stream);
    ParticleState out;
    out.velocity = rp.velocity();
    out.time = state.time + x.time;
    out.position = ParallelogramTable(g).diagonal_point(x.position);
    return out;
}

}  // namespace bt::billiard
