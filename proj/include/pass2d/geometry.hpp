#ifndef PASS2D_GEOMETRY_HPP
#define PASS2D_GEOMETRY_HPP

#include <cmath>

#include "pass2d/common.hpp"

namespace p2d {

// Field frame: x positive toward the opponent goal, y positive toward the
// lower touchline. All angles are degrees normalized to (-180, 180].

struct Vec2 {
    double x = 0.0;
    double y = 0.0;

    Vec2() = default;
    Vec2(double x_, double y_) : x(x_), y(y_) {}

    Vec2 operator+(const Vec2& o) const { return {x + o.x, y + o.y}; }
    Vec2 operator-(const Vec2& o) const { return {x - o.x, y - o.y}; }
    Vec2 operator*(double s) const { return {x * s, y * s}; }
    Vec2& operator+=(const Vec2& o) { x += o.x; y += o.y; return *this; }

    double dot(const Vec2& o) const { return x * o.x + y * o.y; }
    double norm() const { return std::hypot(x, y); }
    double dist(const Vec2& o) const { return (*this - o).norm(); }
    bool finite() const { return std::isfinite(x) && std::isfinite(y); }
};

class AngleDeg {
public:
    AngleDeg() = default;
    AngleDeg(double deg) : deg_(normalize(deg)) {} // NOLINT: implicit by design

    double degree() const { return deg_; }

    static double normalize(double deg) {
        double d = std::fmod(deg, 360.0);
        if (d <= -180.0) d += 360.0;
        else if (d > 180.0) d -= 360.0;
        return d;
    }

private:
    double deg_ = 0.0;
};

struct Polar {
    double r = 0.0;
    AngleDeg theta;
};

constexpr double kDegPerRad = 57.295779513082320876798154814105;

// theta is the four-quadrant arctangent of (y, x); the zero vector maps to
// (0, 0) by convention.
Polar to_polar(const Vec2& v);

// direction of (to - from); zero separation maps to 0
AngleDeg direction_of(const Vec2& from, const Vec2& to);

// minimal absolute angular separation, in [0, 180]
double angle_diff(AngleDeg a, AngleDeg b);

struct LineProjection {
    Vec2 foot;         // orthogonal projection of p onto the line through a, b
    double perp_dist;  // |p - foot|
    double along_dist; // signed distance from a to foot along (b - a)
};

LineProjection project_to_line(const Vec2& p, const Vec2& a, const Vec2& b);

} // namespace p2d

#endif
