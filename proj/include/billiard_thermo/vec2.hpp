#pragma once

#include <cmath>

namespace bt {

struct Vec2 {
    double x = 0.0;
    double y = 0.0;

    constexpr Vec2 operator+(Vec2 o) const noexcept { return {x + o.x, y + o.y}; }
    constexpr Vec2 operator-(Vec2 o) const noexcept { return {x - o.x, y - o.y}; }
    constexpr Vec2 operator*(double s) const noexcept { return {x * s, y * s}; }
    constexpr Vec2 operator-() const noexcept { return {-x, -y}; }
    constexpr bool operator==(const Vec2&) const noexcept = default;
};

constexpr Vec2 operator*(double s, Vec2 v) noexcept { return v * s; }
constexpr double dot(Vec2 a, Vec2 b) noexcept { return a.x * b.x + a.y * b.y; }
constexpr double cross(Vec2 a, Vec2 b) noexcept { return a.x * b.y - a.y * b.x; }
constexpr Vec2 perp(Vec2 a) noexcept { return {-a.y, a.x}; }
inline double norm(Vec2 a) noexcept { return std::hypot(a.x, a.y); }
inline Vec2 normalized(Vec2 a) noexcept { return a * (1.0 / norm(a)); }

}  // namespace bt
