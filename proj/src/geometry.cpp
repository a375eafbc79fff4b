#include "pass2d/geometry.hpp"

namespace p2d {

Polar to_polar(const Vec2& v) {
    if (!v.finite()) throw InvalidInput("to_polar: non-finite vector");
    Polar p;
    p.r = v.norm();
    p.theta = (p.r == 0.0) ? AngleDeg(0.0) : AngleDeg(std::atan2(v.y, v.x) * kDegPerRad);
    return p;
}

AngleDeg direction_of(const Vec2& from, const Vec2& to) {
    return to_polar(to - from).theta;
}

double angle_diff(AngleDeg a, AngleDeg b) {
    double d = std::fabs(AngleDeg::normalize(a.degree() - b.degree()));
    return d; // normalize() already folds into (-180, 180]
}

LineProjection project_to_line(const Vec2& p, const Vec2& a, const Vec2& b) {
    if (!p.finite() || !a.finite() || !b.finite())
        throw InvalidInput("project_to_line: non-finite input");
    const Vec2 dir = b - a;
    const double len = dir.norm();
    if (len == 0.0) throw DegenerateGeometry("project_to_line: a == b");
    const Vec2 unit{dir.x / len, dir.y / len};
    const double t = (p - a).dot(unit);
    LineProjection out;
    out.foot = a + unit * t;
    out.perp_dist = p.dist(out.foot);
    out.along_dist = t;
    return out;
}

} // namespace p2d
