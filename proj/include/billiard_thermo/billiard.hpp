#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

#include "billiard_thermo/vec2.hpp"

namespace bt::billiard {

enum class ElementKind { segment, arc };

// Specular elements reflect; ports are transparent lines that only report
// crossings.
enum class Rule { specular, port };

struct BoundaryElement {
    ElementKind kind = ElementKind::segment;
    Rule rule = Rule::specular;
    int label = 0;

    Vec2 p0;  // segment endpoints
    Vec2 p1;

    Vec2 center;  // arc
    double radius = 0.0;
    double angle_begin = 0.0;
    double angle_span = 0.0;

    static BoundaryElement segment(Vec2 a, Vec2 b, Rule rule = Rule::specular, int label = 0);
    static BoundaryElement arc(Vec2 center, double radius, double angle_begin, double angle_span,
                               Rule rule = Rule::specular, int label = 0);
    static BoundaryElement circle(Vec2 center, double radius, Rule rule = Rule::specular, int label = 0);
};

/// Immutable once built; safe to share between threads.
class BilliardTable {
public:
    std::size_t add(BoundaryElement e);

    const BoundaryElement& operator[](std::size_t i) const { return elements_.at(i); }
    std::size_t size() const noexcept { return elements_.size(); }
    const std::vector<BoundaryElement>& elements() const noexcept { return elements_; }

private:
    std::vector<BoundaryElement> elements_;
};

/// Unit-speed billiard particle.
struct ParticleState {
    Vec2 position;
    Vec2 velocity;
    double time = 0.0;
};

enum class EventStatus { hit, singular, none };

struct BoundaryEvent {
    EventStatus status = EventStatus::none;
    std::size_t element = 0;
    Vec2 point;
    double dt = 0.0;    // flight time from the current state
    double time = 0.0;  // absolute hit time
    Vec2 normal;        // unit normal at the hit, oriented against the velocity
};

// |v . n| below this at a hit, or two elements hit within this time of each
// other, marks the trajectory as singular (grazing or corner).
inline constexpr double kSingularTolerance = 1e-12;

/// Earliest intersection of the ray with the table boundary.
///
/// `exclude` is the element the particle currently sits on (the last one hit
/// or crossed); for it only the chord root of a concave arc is admissible.
/// Entering roots at exactly zero distance are accepted for arcs so that a
/// particle launched from a point on a scatterer collides immediately. Two
/// walls hit within kSingularTolerance flag a corner; a port reached at the
/// same instant as a wall is ignored in favour of the wall.
BoundaryEvent next_boundary_event(const BilliardTable& table, const ParticleState& state,
                                  std::optional<std::size_t> exclude = std::nullopt);

/// v' = v - 2 (v.n) n.
Vec2 reflect_specular(Vec2 v, Vec2 n) noexcept;

enum class StepKind { reflection, port_crossing, singular, escaped };

struct StepResult {
    StepKind kind = StepKind::escaped;
    std::size_t element = 0;
    int label = 0;
    Vec2 incoming;  // velocity before the event
};

/// Event-by-event driver for one trajectory on a table.
///
/// The velocity is renormalized to unit length every `kRenormalizeEvery`
/// reflections to bound floating-point drift.
class Trajectory {
public:
    static constexpr std::int64_t kRenormalizeEvery = 10000;

    Trajectory(const BilliardTable& table, ParticleState initial,
               std::optional<std::size_t> on_element = std::nullopt);

    /// Advance to the next boundary event and apply it.
    StepResult step() { return apply(peek()); }

    /// Apply an event obtained from peek() on the current state.
    StepResult apply(const BoundaryEvent& ev);

    /// Peek at the next boundary event without moving.
    BoundaryEvent peek() const { return next_boundary_event(*table_, state_, on_element_); }

    const ParticleState& state() const noexcept { return state_; }
    std::optional<std::size_t> on_element() const noexcept { return on_element_; }
    std::int64_t reflections() const noexcept { return reflections_; }

    /// Teleport, keeping time. `on_element` is the element the new point lies on.
    void place(Vec2 position, Vec2 velocity, std::optional<std::size_t> on_element);
    void add_time(double dt) noexcept { state_.time += dt; }
    /// Reverse the velocity in place (time-reversal experiments).
    void reverse() noexcept { state_.velocity = -state_.velocity; }

private:
    const BilliardTable* table_;
    ParticleState state_;
    std::optional<std::size_t> on_element_;
    std::int64_t reflections_ = 0;
};

}  // namespace bt::billiard
