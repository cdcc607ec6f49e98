#include "glide/agents.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "glide/errors.hpp"

namespace glide::agents {
namespace {

// Window of arc length searched around the previous progress estimate.
constexpr double kSearchBehind = 2.0;
constexpr double kSearchAhead = 6.0;

double clamp_abs(double v, double limit) noexcept { return std::clamp(v, -limit, limit); }

/// Closest point on the polyline within an arc-length window; returns its arc length.
double project_onto(const std::vector<Vec2>& wp, const std::vector<double>& arc, const Vec2& p, double lo, double hi) {
    double best_s = std::clamp(lo, 0.0, arc.back());
    double best_d = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i + 1 < wp.size(); ++i) {
        if (arc[i + 1] < lo || arc[i] > hi) continue;
        const Vec2 ab = wp[i + 1] - wp[i];
        const double len2 = ab.squared_norm();
        const double t = len2 > 0.0 ? std::clamp(dot(p - wp[i], ab) / len2, 0.0, 1.0) : 0.0;
        const double d = distance(p, wp[i] + ab * t);
        if (d < best_d) {
            best_d = d;
            best_s = arc[i] + t * (arc[i + 1] - arc[i]);
        }
    }
    return best_s;
}

/// Slew- and rate-limited heading-rate update toward `desired`.
double slew_heading_rate(double current, double desired, double dt, const UgvLimits& lim) noexcept {
    const double step = clamp_abs(desired - current, lim.max_heading_accel * dt);
    return clamp_abs(current + step, lim.max_heading_rate);
}

// Steering geometry bounds the yaw rate at a given speed.
double turn_rate_cap(double speed, const UgvLimits& lim) noexcept {
    if (!(lim.min_turn_radius > 0.0)) return lim.max_heading_rate;
    return std::min(lim.max_heading_rate, speed / lim.min_turn_radius);
}

UgvState integrate(const UgvState& s, double new_speed, double new_rate, double dt) {
    UgvState out = s;
    const double ds = 0.5 * (s.speed + new_speed) * dt;
    const double dtheta = 0.5 * (s.heading_rate + new_rate) * dt;
    const double mid = s.heading + 0.5 * dtheta;
    out.position = s.position + unit_from_angle(mid) * ds;
    out.heading = wrap_angle(s.heading + dtheta);
    out.speed = new_speed;
    out.heading_rate = new_rate;
    out.odometer = s.odometer + ds;
    return out;
}

}  // namespace

std::vector<double> arc_lengths(const std::vector<Vec2>& waypoints) {
    std::vector<double> arc(waypoints.size(), 0.0);
    for (std::size_t i = 1; i < waypoints.size(); ++i) arc[i] = arc[i - 1] + distance(waypoints[i - 1], waypoints[i]);
    return arc;
}

Vec2 point_at(const std::vector<Vec2>& wp, const std::vector<double>& arc, double s) {
    if (wp.empty()) return {};
    if (s <= 0.0) return wp.front();
    if (s >= arc.back()) return wp.back();
    const auto it = std::upper_bound(arc.begin(), arc.end(), s);
    const auto i = static_cast<std::size_t>(it - arc.begin()) - 1;
    const double seg = arc[i + 1] - arc[i];
    const double t = seg > 0.0 ? (s - arc[i]) / seg : 0.0;
    return wp[i] + (wp[i + 1] - wp[i]) * t;
}

UgvState ugv_step(const UgvState& state, const planner::Plan& plan, double dt, const UgvLimits& lim) {
    if (plan.waypoints.empty()) {
        const double speed = std::max(0.0, state.speed - lim.max_decel * dt);
        const double rate = clamp_abs(slew_heading_rate(state.heading_rate, 0.0, dt, lim), turn_rate_cap(speed, lim));
        return integrate(state, speed, rate, dt);
    }
    const auto arc = arc_lengths(plan.waypoints);
    const double progress =
        project_onto(plan.waypoints, arc, state.position, state.progress - kSearchBehind, state.progress + kSearchAhead);
    const Vec2 target = point_at(plan.waypoints, arc, progress + lim.lookahead);
    const Vec2 to_target = target - state.position;
    const double reach = to_target.norm();

    double alpha = 0.0;
    if (reach > 1e-6) alpha = wrap_angle(to_target.bearing() - state.heading);

    // Curvature of the pure-pursuit arc through the lookahead point.
    const double chord = std::max(reach, 0.5 * lim.lookahead);
    const double curvature = 2.0 * std::sin(alpha) / chord;

    const bool pivoting = lim.min_turn_radius <= 0.0;
    double target_speed = pivoting ? 0.0 : std::min(lim.creep_speed, lim.max_speed);
    if (std::abs(alpha) <= 0.5 * kPi) {
        target_speed = lim.max_speed / (1.0 + lim.curvature_gain * std::abs(curvature));
        if (std::abs(curvature) > 0.0) target_speed = std::min(target_speed, lim.max_heading_rate / std::abs(curvature));
        if (!pivoting) target_speed = std::max(target_speed, std::min(lim.creep_speed, lim.max_speed));
    }
    const double speed =
        std::clamp(target_speed, state.speed - lim.max_decel * dt, state.speed + lim.max_accel * dt);

    double desired_rate = 0.0;
    if (std::abs(alpha) > 0.5 * kPi) {
        desired_rate = std::copysign(lim.max_heading_rate, alpha);
    } else {
        desired_rate = std::max(speed, 0.5 * lim.max_speed) * curvature;
    }
    // Never demand more rate than can be shed before the heading error closes.
    desired_rate = clamp_abs(desired_rate, std::sqrt(2.0 * lim.max_heading_accel * std::abs(alpha)));
    const double rate =
        clamp_abs(slew_heading_rate(state.heading_rate, desired_rate, dt, lim), turn_rate_cap(speed, lim));

    UgvState next = integrate(state, std::max(speed, 0.0), rate, dt);
    next.progress = progress;
    return next;
}

UavState uav_step(const UavState& state, const Vec3& target, double dt, const UavLimits& lim) {
    const double max_accel = kGravity * std::tan(lim.max_tilt);
    const Vec2 err_h = target.xy() - state.position.xy();
    const double dist_h = err_h.norm();

    // Outer loop: position error to a velocity command that can still stop in time.
    Vec2 v_cmd = err_h * lim.position_gain;
    const double cap = std::min(lim.max_horizontal_speed, std::sqrt(std::max(0.0, 2.0 * 0.5 * max_accel * dist_h)));
    if (v_cmd.norm() > cap) v_cmd = v_cmd * (cap / v_cmd.norm());

    const Vec2 v_now = state.velocity.xy();
    Vec2 accel = (v_cmd - v_now) * (1.0 / dt);
    if (accel.norm() > max_accel) accel = accel * (max_accel / accel.norm());
    Vec2 v_new = v_now + accel * dt;
    if (v_new.norm() > lim.max_horizontal_speed) v_new = v_new * (lim.max_horizontal_speed / v_new.norm());

    const double vz = clamp_abs(lim.position_gain * (target.z - state.position.z), lim.max_vertical_speed);

    UavState out = state;
    out.velocity = {v_new.x, v_new.y, vz};
    out.position = state.position + out.velocity * dt;

    // Thrust tilts toward the commanded horizontal acceleration.
    const double a = accel.norm();
    const double tilt = std::min(std::atan2(a, kGravity), lim.max_tilt);
    const Quaternion yaw_q = Quaternion::from_axis_angle({0.0, 0.0, 1.0}, state.yaw);
    if (a > 0.0) {
        out.attitude = Quaternion::from_axis_angle({-accel.y, accel.x, 0.0}, tilt) * yaw_q;
    } else {
        out.attitude = yaw_q;
    }
    return out;
}

Vec3 scout_target(const planner::Plan& plan, double ugv_progress, const std::optional<Vec2>& next_victim,
                  const ScoutPolicy& policy) {
    if (plan.waypoints.empty()) {
        if (!next_victim) throw NoReference("scout has neither a plan nor a victim to follow");
        return {next_victim->x, next_victim->y, policy.altitude};
    }
    const auto arc = arc_lengths(plan.waypoints);
    const double s = std::max(0.0, ugv_progress) + policy.lead_offset;
    Vec2 p;
    if (s <= arc.back() || !next_victim) {
        p = point_at(plan.waypoints, arc, s);
    } else {
        const Vec2 end = plan.waypoints.back();
        const Vec2 ext = *next_victim - end;
        const double ext_len = ext.norm();
        const double along = std::min(s - arc.back(), ext_len);
        p = ext_len > 0.0 ? end + ext * (along / ext_len) : end;
    }
    return {p.x, p.y, policy.altitude};
}

std::vector<Vec2> survey_waypoints(const Box2& region, double spacing) {
    if (!(spacing > 0.0)) throw ConfigError("survey spacing must be positive");
    const double h = region.height();
    std::vector<double> tracks;
    if (h < spacing) {
        tracks.push_back(region.center().y);
    } else {
        const int n = static_cast<int>(std::ceil(h / spacing - 1e-9)) + 1;
        for (int i = 0; i < n; ++i) tracks.push_back(region.min.y + h * i / (n - 1));
    }
    std::vector<Vec2> out;
    out.reserve(2 * tracks.size());
    for (std::size_t i = 0; i < tracks.size(); ++i) {
        const bool eastward = i % 2 == 0;
        out.push_back({eastward ? region.min.x : region.max.x, tracks[i]});
        out.push_back({eastward ? region.max.x : region.min.x, tracks[i]});
    }
    return out;
}

}  // namespace glide::agents
