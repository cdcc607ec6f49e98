// Planar and spatial primitives shared by every module. All coordinates are
// ENU meters; angles are radians, counter-clockwise from East.

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>

namespace glide {

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;
inline constexpr double kSqrt2 = std::numbers::sqrt2;
inline constexpr double kGravity = 9.80665;

[[nodiscard]] constexpr double deg_to_rad(double deg) noexcept { return deg * kPi / 180.0; }
[[nodiscard]] constexpr double rad_to_deg(double rad) noexcept { return rad * 180.0 / kPi; }

/// Wraps an angle into (-pi, pi].
[[nodiscard]] inline double wrap_angle(double a) noexcept {
    a = std::remainder(a, kTwoPi);
    if (a <= -kPi) a += kTwoPi;
    return a;
}

struct Vec2 {
    double x{0.0};
    double y{0.0};

    constexpr Vec2& operator+=(const Vec2& o) noexcept { x += o.x; y += o.y; return *this; }
    constexpr Vec2& operator-=(const Vec2& o) noexcept { x -= o.x; y -= o.y; return *this; }
    constexpr Vec2& operator*=(double s) noexcept { x *= s; y *= s; return *this; }

    [[nodiscard]] double norm() const noexcept { return std::hypot(x, y); }
    [[nodiscard]] constexpr double squared_norm() const noexcept { return x * x + y * y; }
    [[nodiscard]] double bearing() const noexcept { return std::atan2(y, x); }

    friend constexpr Vec2 operator+(Vec2 a, const Vec2& b) noexcept { return a += b; }
    friend constexpr Vec2 operator-(Vec2 a, const Vec2& b) noexcept { return a -= b; }
    friend constexpr Vec2 operator*(Vec2 a, double s) noexcept { return a *= s; }
    friend constexpr Vec2 operator*(double s, Vec2 a) noexcept { return a *= s; }
    friend constexpr Vec2 operator-(const Vec2& a) noexcept { return {-a.x, -a.y}; }
    friend constexpr bool operator==(const Vec2&, const Vec2&) = default;
};

[[nodiscard]] constexpr double dot(const Vec2& a, const Vec2& b) noexcept { return a.x * b.x + a.y * b.y; }
[[nodiscard]] constexpr double cross(const Vec2& a, const Vec2& b) noexcept { return a.x * b.y - a.y * b.x; }
[[nodiscard]] inline double distance(const Vec2& a, const Vec2& b) noexcept { return (a - b).norm(); }
[[nodiscard]] inline Vec2 unit_from_angle(double a) noexcept { return {std::cos(a), std::sin(a)}; }

/// Rotates `v` counter-clockwise by `angle`.
[[nodiscard]] inline Vec2 rotate(const Vec2& v, double angle) noexcept {
    const double c = std::cos(angle);
    const double s = std::sin(angle);
    return {c * v.x - s * v.y, s * v.x + c * v.y};
}

struct Vec3 {
    double x{0.0};
    double y{0.0};
    double z{0.0};

    constexpr Vec3& operator+=(const Vec3& o) noexcept { x += o.x; y += o.y; z += o.z; return *this; }
    constexpr Vec3& operator-=(const Vec3& o) noexcept { x -= o.x; y -= o.y; z -= o.z; return *this; }
    constexpr Vec3& operator*=(double s) noexcept { x *= s; y *= s; z *= s; return *this; }

    [[nodiscard]] double norm() const noexcept { return std::sqrt(x * x + y * y + z * z); }
    [[nodiscard]] constexpr Vec2 xy() const noexcept { return {x, y}; }

    friend constexpr Vec3 operator+(Vec3 a, const Vec3& b) noexcept { return a += b; }
    friend constexpr Vec3 operator-(Vec3 a, const Vec3& b) noexcept { return a -= b; }
    friend constexpr Vec3 operator*(Vec3 a, double s) noexcept { return a *= s; }
    friend constexpr Vec3 operator*(double s, Vec3 a) noexcept { return a *= s; }
    friend constexpr bool operator==(const Vec3&, const Vec3&) = default;
};

[[nodiscard]] constexpr double dot(const Vec3& a, const Vec3& b) noexcept {
    return a.x * b.x + a.y * b.y + a.z * b.z;
}
[[nodiscard]] constexpr Vec3 cross(const Vec3& a, const Vec3& b) noexcept {
    return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x};
}

/// Unit quaternion (w, x, y, z) rotating body-frame vectors into ENU.
struct Quaternion {
    double w{1.0};
    double x{0.0};
    double y{0.0};
    double z{0.0};

    [[nodiscard]] static Quaternion identity() noexcept { return {}; }

    [[nodiscard]] static Quaternion from_axis_angle(const Vec3& axis, double angle) noexcept {
        const double n = axis.norm();
        if (n == 0.0 || angle == 0.0) return {};
        const double s = std::sin(0.5 * angle) / n;
        return {std::cos(0.5 * angle), axis.x * s, axis.y * s, axis.z * s};
    }

    /// Intrinsic Z-Y-X (yaw, pitch, roll) composition.
    [[nodiscard]] static Quaternion from_euler(double roll, double pitch, double yaw) noexcept {
        const double cr = std::cos(0.5 * roll), sr = std::sin(0.5 * roll);
        const double cp = std::cos(0.5 * pitch), sp = std::sin(0.5 * pitch);
        const double cy = std::cos(0.5 * yaw), sy = std::sin(0.5 * yaw);
        return {cr * cp * cy + sr * sp * sy,
                sr * cp * cy - cr * sp * sy,
                cr * sp * cy + sr * cp * sy,
                cr * cp * sy - sr * sp * cy};
    }

    [[nodiscard]] double norm() const noexcept { return std::sqrt(w * w + x * x + y * y + z * z); }

    [[nodiscard]] Quaternion normalized() const noexcept {
        const double n = norm();
        return {w / n, x / n, y / n, z / n};
    }

    [[nodiscard]] constexpr Quaternion conjugate() const noexcept { return {w, -x, -y, -z}; }

    [[nodiscard]] double roll() const noexcept {
        return std::atan2(2.0 * (w * x + y * z), 1.0 - 2.0 * (x * x + y * y));
    }
    [[nodiscard]] double pitch() const noexcept {
        return std::asin(std::clamp(2.0 * (w * y - z * x), -1.0, 1.0));
    }
    [[nodiscard]] double yaw() const noexcept {
        return std::atan2(2.0 * (w * z + x * y), 1.0 - 2.0 * (y * y + z * z));
    }

    /// Angle between the body z axis and the world vertical.
    [[nodiscard]] double tilt() const noexcept {
        const double c = 1.0 - 2.0 * (x * x + y * y);
        return std::acos(std::clamp(c, -1.0, 1.0));
    }

    [[nodiscard]] Vec3 rotate(const Vec3& v) const noexcept {
        // v' = v + 2w(q x v) + 2 q x (q x v)
        const Vec3 q{x, y, z};
        const Vec3 t = 2.0 * cross(q, v);
        return v + w * t + cross(q, t);
    }

    friend Quaternion operator*(const Quaternion& a, const Quaternion& b) noexcept {
        return {a.w * b.w - a.x * b.x - a.y * b.y - a.z * b.z,
                a.w * b.x + a.x * b.w + a.y * b.z - a.z * b.y,
                a.w * b.y - a.x * b.z + a.y * b.w + a.z * b.x,
                a.w * b.z + a.x * b.y - a.y * b.x + a.z * b.w};
    }
    friend constexpr bool operator==(const Quaternion&, const Quaternion&) = default;
};

/// Axis-aligned rectangle.
struct Box2 {
    Vec2 min;
    Vec2 max;

    [[nodiscard]] constexpr double width() const noexcept { return max.x - min.x; }
    [[nodiscard]] constexpr double height() const noexcept { return max.y - min.y; }
    [[nodiscard]] constexpr Vec2 center() const noexcept {
        return {0.5 * (min.x + max.x), 0.5 * (min.y + max.y)};
    }
    [[nodiscard]] constexpr bool empty() const noexcept { return !(max.x > min.x && max.y > min.y); }
    [[nodiscard]] constexpr bool contains(const Vec2& p) const noexcept {
        return p.x >= min.x && p.x <= max.x && p.y >= min.y && p.y <= max.y;
    }
    [[nodiscard]] constexpr bool strictly_contains(const Vec2& p) const noexcept {
        return p.x > min.x && p.x < max.x && p.y > min.y && p.y < max.y;
    }
    [[nodiscard]] static constexpr Box2 centered(const Vec2& c, double half_x, double half_y) noexcept {
        return {{c.x - half_x, c.y - half_y}, {c.x + half_x, c.y + half_y}};
    }
    friend constexpr bool operator==(const Box2&, const Box2&) = default;
};

/// Rectangle with a center, full side lengths and a yaw about its center.
struct OrientedRect {
    Vec2 center;
    Vec2 size;  ///< full length along the local x and y axes
    double yaw{0.0};

    [[nodiscard]] Vec2 to_local(const Vec2& p) const noexcept { return rotate(p - center, -yaw); }

    [[nodiscard]] std::array<Vec2, 4> corners() const noexcept {
        const double hx = 0.5 * size.x;
        const double hy = 0.5 * size.y;
        return {center + rotate({-hx, -hy}, yaw), center + rotate({hx, -hy}, yaw),
                center + rotate({hx, hy}, yaw), center + rotate({-hx, hy}, yaw)};
    }

    /// Euclidean distance from `p` to the rectangle; zero inside.
    [[nodiscard]] double distance_to(const Vec2& p) const noexcept {
        const Vec2 l = to_local(p);
        const double dx = std::max(std::abs(l.x) - 0.5 * size.x, 0.0);
        const double dy = std::max(std::abs(l.y) - 0.5 * size.y, 0.0);
        return std::hypot(dx, dy);
    }

    /// Boundary-inclusive containment after a Minkowski inflation by `radius`.
    [[nodiscard]] bool contains(const Vec2& p, double radius = 0.0) const noexcept {
        const Vec2 l = to_local(p);
        const double ex = std::abs(l.x) - 0.5 * size.x;
        const double ey = std::abs(l.y) - 0.5 * size.y;
        if (radius <= 0.0) return ex <= 0.0 && ey <= 0.0;
        return std::hypot(std::max(ex, 0.0), std::max(ey, 0.0)) <= radius;
    }

    /// Axis-aligned bounds of the rectangle inflated by `radius`.
    [[nodiscard]] Box2 bounding_box(double radius = 0.0) const noexcept {
        const double c = std::abs(std::cos(yaw));
        const double s = std::abs(std::sin(yaw));
        const double hx = 0.5 * (size.x * c + size.y * s) + radius;
        const double hy = 0.5 * (size.x * s + size.y * c) + radius;
        return Box2::centered(center, hx, hy);
    }

    friend constexpr bool operator==(const OrientedRect&, const OrientedRect&) = default;
};

/// Shortest distance between segment [a, b] and the rectangle (zero on overlap).
[[nodiscard]] double segment_distance(const OrientedRect& rect, const Vec2& a, const Vec2& b) noexcept;

/// Shortest distance from `p` to segment [a, b].
[[nodiscard]] double point_segment_distance(const Vec2& p, const Vec2& a, const Vec2& b) noexcept;

}  // namespace glide
