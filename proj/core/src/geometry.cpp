#include "glide/geometry.hpp"

#include <limits>

namespace glide {

double point_segment_distance(const Vec2& p, const Vec2& a, const Vec2& b) noexcept {
    const Vec2 ab = b - a;
    const double len2 = ab.squared_norm();
    if (len2 == 0.0) return distance(p, a);
    const double t = std::clamp(dot(p - a, ab) / len2, 0.0, 1.0);
    return distance(p, a + ab * t);
}

namespace {

bool segments_intersect(const Vec2& p1, const Vec2& p2, const Vec2& q1, const Vec2& q2) noexcept {
    const double d1 = cross(q2 - q1, p1 - q1);
    const double d2 = cross(q2 - q1, p2 - q1);
    const double d3 = cross(p2 - p1, q1 - p1);
    const double d4 = cross(p2 - p1, q2 - p1);
    return ((d1 > 0) != (d2 > 0)) && ((d3 > 0) != (d4 > 0));
}

}  // namespace

double segment_distance(const OrientedRect& rect, const Vec2& a, const Vec2& b) noexcept {
    if (rect.contains(a) || rect.contains(b)) return 0.0;
    const auto c = rect.corners();
    double best = std::numeric_limits<double>::infinity();
    for (int i = 0; i < 4; ++i) {
        const Vec2& e0 = c[i];
        const Vec2& e1 = c[(i + 1) % 4];
        if (segments_intersect(a, b, e0, e1)) return 0.0;
        best = std::min({best, point_segment_distance(e0, a, b), point_segment_distance(a, e0, e1),
                         point_segment_distance(b, e0, e1)});
    }
    return best;
}

}  // namespace glide
