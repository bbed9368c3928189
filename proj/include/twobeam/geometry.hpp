#ifndef TWOBEAM_GEOMETRY_HPP
#define TWOBEAM_GEOMETRY_HPP

#include <cmath>

namespace twobeam {

struct Vec2 {
    double x = 0.0;
    double y = 0.0;

    Vec2 operator+(Vec2 o) const { return {x + o.x, y + o.y}; }
    Vec2 operator-(Vec2 o) const { return {x - o.x, y - o.y}; }
    Vec2 operator*(double s) const { return {x * s, y * s}; }
    Vec2& operator+=(Vec2 o) { x += o.x; y += o.y; return *this; }

    double dot(Vec2 o) const { return x * o.x + y * o.y; }
    double norm() const { return std::hypot(x, y); }
    double norm2() const { return x * x + y * y; }
};

inline Vec2 operator*(double s, Vec2 v) { return v * s; }

// Directed segment; point(u) walks from a (u=0) to b (u=1).
struct Segment {
    Vec2 a;
    Vec2 b;

    Vec2 point(double u) const { return a + (b - a) * u; }
    double length() const { return (b - a).norm(); }
    Vec2 direction() const {
        const double len = length();
        return len > 0.0 ? (b - a) * (1.0 / len) : Vec2{1.0, 0.0};
    }
};

// Perpendicular distance from p to the infinite line through `origin`
// with direction `dir` (dir need not be normalized).
inline double distance_to_line(Vec2 p, Vec2 origin, Vec2 dir) {
    const double len = dir.norm();
    if (len == 0.0) return (p - origin).norm();
    const Vec2 d = p - origin;
    return std::abs(d.x * dir.y - d.y * dir.x) / len;
}

} // namespace twobeam

#endif
