#pragma once

#include <span>
#include <utility>
#include <vector>

namespace bt::mech {

/// Two point masses on a line. Both masses are strictly positive.
class MassPair {
public:
    MassPair(double mass_a, double mass_b);

    constexpr double a() const noexcept { return ma_; }
    constexpr double b() const noexcept { return mb_; }
    constexpr double total() const noexcept { return ma_ + mb_; }

private:
    double ma_;
    double mb_;
};

struct VelocityPair {
    double a;
    double b;
};

/// Post-collision velocities of a 1-D elastic collision. Total: no approach
/// check is performed; callers own the geometry.
constexpr VelocityPair elastic_collide(const MassPair& pair, double va, double vb) noexcept {
    const double m = pair.total();
    return {((pair.a() - pair.b()) * va + 2.0 * pair.b() * vb) / m,
            ((pair.b() - pair.a()) * vb + 2.0 * pair.a() * va) / m};
}

/// x_i = sqrt(m_i / M) z_i with M = sum m_j. In these coordinates the kinetic
/// energy is (M/2) |xdot|^2, so energy-preserving collisions are isometries.
/// Throws on length mismatch or a non-positive mass.
std::vector<double> mass_rescale(std::span<const double> positions, std::span<const double> masses);

}  // namespace bt::mech
