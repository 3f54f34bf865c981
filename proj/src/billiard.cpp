#include "billiard_thermo/billiard.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace bt::billiard {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kTwoPi = 2.0 * std::numbers::pi;
// Slack on the segment parameter so that a corner hit registers on both
// adjacent segments (and is then caught as a tie) instead of on neither.
constexpr double kEndpointSlack = 1e-12;

bool on_arc_span(const BoundaryElement& e, Vec2 q) {
    if (e.angle_span >= kTwoPi) return true;
    double a = std::atan2(q.y - e.center.y, q.x - e.center.x) - e.angle_begin;
    a = std::fmod(a, kTwoPi);
    if (a < 0.0) a += kTwoPi;
    return a <= e.angle_span + 1e-12;
}

double segment_hit(const BoundaryElement& e, const ParticleState& s) {
    const Vec2 d = e.p1 - e.p0;
    const Vec2 n = perp(d);
    const double denom = dot(s.velocity, n);
    if (denom == 0.0) return kInf;
    const double t = dot(e.p0 - s.position, n) / denom;
    // Ports may be crossed at t = 0 (a particle turned around on the port line
    // by a wall); walls need strictly positive times.
    if (e.rule == Rule::port ? !(t >= 0.0) : !(t > 0.0)) return kInf;
    const Vec2 q = s.position + s.velocity * t;
    const double u = dot(q - e.p0, d) / dot(d, d);
    if (u < -kEndpointSlack || u > 1.0 + kEndpointSlack) return kInf;
    return t;
}

double arc_hit(const BoundaryElement& e, const ParticleState& s, bool sitting_on) {
    const Vec2 rel = s.position - e.center;
    const double vv = dot(s.velocity, s.velocity);
    const double b = dot(s.velocity, rel);
    if (sitting_on) {
        // One root is the current point; the other is the chord end.
        const double t = -2.0 * b / vv;
        if (!(t > 0.0)) return kInf;
        return on_arc_span(e, s.position + s.velocity * t) ? t : kInf;
    }
    const double c = dot(rel, rel) - e.radius * e.radius;
    const double disc = b * b - vv * c;
    if (disc < 0.0) return kInf;
    const double sq = std::sqrt(disc);
    const double t1 = (-b - sq) / vv;
    const double t2 = (-b + sq) / vv;
    if (t1 >= 0.0 && on_arc_span(e, s.position + s.velocity * t1)) return t1;
    if (t2 > 0.0 && on_arc_span(e, s.position + s.velocity * t2)) return t2;
    return kInf;
}

}  // namespace

BoundaryElement BoundaryElement::segment(Vec2 a, Vec2 b, Rule rule, int label) {
    if (a == b) throw std::invalid_argument("BoundaryElement::segment: degenerate segment");
    BoundaryElement e;
    e.kind = ElementKind::segment;
    e.rule = rule;
    e.label = label;
    e.p0 = a;
    e.p1 = b;
    return e;
}

BoundaryElement BoundaryElement::arc(Vec2 center, double radius, double angle_begin, double angle_span, Rule rule,
                                     int label) {
    if (!(radius > 0.0)) throw std::invalid_argument("BoundaryElement::arc: radius must be positive");
    if (!(angle_span > 0.0)) throw std::invalid_argument("BoundaryElement::arc: span must be positive");
    BoundaryElement e;
    e.kind = ElementKind::arc;
    e.rule = rule;
    e.label = label;
    e.center = center;
    e.radius = radius;
    e.angle_begin = angle_begin;
    e.angle_span = angle_span;
    return e;
}

BoundaryElement BoundaryElement::circle(Vec2 center, double radius, Rule rule, int label) {
    return arc(center, radius, 0.0, kTwoPi, rule, label);
}

std::size_t BilliardTable::add(BoundaryElement e) {
    elements_.push_back(e);
    return elements_.size() - 1;
}

BoundaryEvent next_boundary_event(const BilliardTable& table, const ParticleState& state,
                                  std::optional<std::size_t> exclude) {
    // Best and runner-up among reflecting elements, best among ports.
    double spec = kInf, spec2 = kInf, port = kInf;
    std::size_t spec_id = 0, port_id = 0;
    const auto& els = table.elements();
    for (std::size_t i = 0; i < els.size(); ++i) {
        const bool sitting = exclude && *exclude == i;
        double t;
        if (els[i].kind == ElementKind::segment) {
            if (sitting) continue;
            t = segment_hit(els[i], state);
        } else {
            t = arc_hit(els[i], state, sitting);
        }
        if (els[i].rule == Rule::port) {
            if (t < port) {
                port = t;
                port_id = i;
            }
        } else if (t < spec) {
            spec2 = spec;
            spec = t;
            spec_id = i;
        } else if (t < spec2) {
            spec2 = t;
        }
    }

    BoundaryEvent ev;
    const double best = std::min(spec, port);
    if (best == kInf) return ev;
    const double tol = kSingularTolerance * std::max(1.0, best);
    // A port touched at the same instant as a wall is not crossed: the wall
    // turns the particle around on the port line.
    const bool take_port = port < spec - tol;
    ev.element = take_port ? port_id : spec_id;
    ev.dt = take_port ? port : spec;
    ev.time = state.time + ev.dt;
    ev.point = state.position + state.velocity * ev.dt;

    const auto& e = els[ev.element];
    Vec2 n = e.kind == ElementKind::segment ? normalized(perp(e.p1 - e.p0)) : normalized(ev.point - e.center);
    if (dot(state.velocity, n) > 0.0) n = -n;
    ev.normal = n;

    const bool corner = !take_port && spec2 - spec <= tol;
    const bool grazing = std::abs(dot(state.velocity, n)) < kSingularTolerance;
    ev.status = (corner || grazing) ? EventStatus::singular : EventStatus::hit;
    return ev;
}

Vec2 reflect_specular(Vec2 v, Vec2 n) noexcept { return v - n * (2.0 * dot(v, n)); }

Trajectory::Trajectory(const BilliardTable& table, ParticleState initial, std::optional<std::size_t> on_element)
    : table_(&table), state_(initial), on_element_(on_element) {}

StepResult Trajectory::apply(const BoundaryEvent& ev) {
    StepResult r;
    r.incoming = state_.velocity;
    if (ev.status == EventStatus::none) {
        r.kind = StepKind::escaped;
        return r;
    }
    r.element = ev.element;
    r.label = (*table_)[ev.element].label;
    if (ev.status == EventStatus::singular) {
        r.kind = StepKind::singular;
        return r;
    }
    state_.position = ev.point;
    state_.time = ev.time;
    on_element_ = ev.element;
    if ((*table_)[ev.element].rule == Rule::port) {
        r.kind = StepKind::port_crossing;
        return r;
    }
    state_.velocity = reflect_specular(state_.velocity, ev.normal);
    if (++reflections_ % kRenormalizeEvery == 0) state_.velocity = normalized(state_.velocity);
    r.kind = StepKind::reflection;
    return r;
}

void Trajectory::place(Vec2 position, Vec2 velocity, std::optional<std::size_t> on_element) {
    state_.position = position;
    state_.velocity = velocity;
    on_element_ = on_element;
}

}  // namespace bt::billiard
