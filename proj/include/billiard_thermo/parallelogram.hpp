#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "billiard_thermo/billiard.hpp"
#include "billiard_thermo/random_stream.hpp"

namespace bt::billiard {

/// Parallelogram ABCD with A at the origin, AB along the x axis and interior
/// angle `angle` at A. The diagonal BD splits it into a lower triangle ABD and
/// an upper triangle BCD and is the crossing line.
struct ParallelogramGeometry {
    double base = 1.5;  // |AB|
    double side = 1.0;  // |AD|
    double angle = 1.1999816148643265;  // pi (3 - sqrt 5) / 2

    void validate() const;
    Vec2 a() const noexcept { return {0.0, 0.0}; }
    Vec2 b() const noexcept { return {base, 0.0}; }
    Vec2 d() const noexcept { return {side * std::cos(angle), side * std::sin(angle)}; }
    Vec2 c() const noexcept { return b() + d(); }
};

struct Crossing {
    bool upward = false;  // lower triangle -> upper triangle
    double angle = 0.0;   // angle to the diagonal normal in the direction of travel
    double position = 0.0;  // fraction along B -> D
    double time = 0.0;
};

class ParallelogramTable {
public:
    explicit ParallelogramTable(const ParallelogramGeometry& g);

    const BilliardTable& table() const noexcept { return table_; }
    std::size_t diagonal() const noexcept { return diagonal_; }
    const ParallelogramGeometry& geometry() const noexcept { return geometry_; }

    /// Crossing record for a velocity meeting the diagonal at point p.
    Crossing describe(Vec2 velocity, Vec2 p, double time) const;
    Vec2 diagonal_point(double u) const noexcept { return geometry_.b() + (geometry_.d() - geometry_.b()) * u; }

private:
    ParallelogramGeometry geometry_;
    BilliardTable table_;
    std::size_t diagonal_ = 0;
    Vec2 tangent_;   // unit, B -> D
    Vec2 up_normal_;  // unit, pointing into the upper triangle
};

struct ParallelogramRun {
    std::vector<Crossing> crossings;
    bool singular = false;  // stopped early at a corner or grazing hit
};

/// Deterministic billiard until `n_crossings` diagonal crossings are seen.
ParallelogramRun run_parallelogram(const ParallelogramGeometry& g, const ParticleState& initial,
                                   std::int64_t n_crossings, std::optional<std::size_t> on_element = std::nullopt);

/// Random-jump version: every time the particle reaches the diagonal it is
/// moved to a uniform point on it, velocity unchanged, and continues.
class RandomParallelogram {
public:
    static constexpr int kMaxRetries = 100;

    RandomParallelogram(const ParallelogramGeometry& g, Vec2 velocity, stat::RandomStream& stream);

    /// One jump followed by deterministic flight to the next crossing.
    Crossing step(stat::RandomStream& stream);

    Vec2 velocity() const noexcept { return velocity_; }
    /// Fraction along B -> D of the most recent jump.
    double last_jump() const noexcept { return last_jump_; }
    std::int64_t resamples() const noexcept { return resamples_; }
    double time() const noexcept { return time_; }

private:
    ParallelogramTable table_;
    Vec2 velocity_;
    double time_ = 0.0;
    double last_jump_ = 0.0;
    std::int64_t resamples_ = 0;
    std::int64_t reflections_ = 0;  // since the last renormalization
};

/// Free-function form: from a state on the diagonal, jump, then fly to the
/// next crossing. Returns the state on the diagonal at that crossing.
ParticleState parallelogram_random_step(stat::RandomStream& stream, const ParticleState& state,
                                        const ParallelogramGeometry& g);

}  // namespace bt::billiard
