// Kinematic platforms and their behaviour policies: the UGV path follower,
// the terrain-scout target rule and the searcher's survey pattern.

#pragma once

#include <optional>
#include <vector>

#include "glide/geometry.hpp"
#include "glide/planner.hpp"

namespace glide::agents {

/// Golf-cart limits. Speed, steering rate and steering acceleration are the
/// platform's published limits; the longitudinal rates are tuning choices.
struct UgvLimits {
    double max_speed{2.0};
    double max_heading_rate{deg_to_rad(40.0)};
    double max_heading_accel{deg_to_rad(10.0)};
    double max_accel{0.5};
    double max_decel{1.0};
    double lookahead{3.0};
    double curvature_gain{3.0};  ///< target speed = max_speed / (1 + gain * |curvature|)
    double min_turn_radius{3.0};  ///< |heading rate| <= speed / radius; 0 allows turning in place
    double creep_speed{0.5};      ///< speed held while correcting a heading error beyond 90 degrees
};

struct UgvState {
    Vec2 position;
    double heading{0.0};
    double speed{0.0};
    double heading_rate{0.0};
    double odometer{0.0};
    double progress{0.0};  ///< arc length along the plan being tracked
};

/// Pure-pursuit tracking of `plan` with rate- and slew-limited heading and
/// acceleration-limited speed. An empty plan brakes to a stop.
[[nodiscard]] UgvState ugv_step(const UgvState& state, const planner::Plan& plan, double dt,
                                const UgvLimits& limits = {});

/// Cumulative arc length at each waypoint.
[[nodiscard]] std::vector<double> arc_lengths(const std::vector<Vec2>& waypoints);

/// Point at arc length `s` along the polyline, clamped to its ends.
[[nodiscard]] Vec2 point_at(const std::vector<Vec2>& waypoints, const std::vector<double>& arc, double s);

struct UavLimits {
    double max_horizontal_speed{5.0};
    double max_vertical_speed{1.0};
    double max_tilt{deg_to_rad(30.0)};
    double position_gain{0.8};  ///< 1/s, outer-loop P gain from position error to velocity
};

struct UavState {
    Vec3 position;
    Vec3 velocity;
    Quaternion attitude;
    double yaw{0.0};
};

/// First-order velocity tracking of `target`; tilt follows commanded
/// horizontal acceleration and is capped at max_tilt.
[[nodiscard]] UavState uav_step(const UavState& state, const Vec3& target, double dt, const UavLimits& limits = {});

struct ScoutPolicy {
    double lead_offset{15.0};
    double altitude{15.0};
};

/// Point lead_offset ahead of the UGV's progress along the plan, continuing
/// on a straight line to `next_victim` past the plan end.
/// @throws NoReference when the plan is empty and there is no victim.
[[nodiscard]] Vec3 scout_target(const planner::Plan& plan, double ugv_progress, const std::optional<Vec2>& next_victim,
                                const ScoutPolicy& policy);

/// Boustrophedon sweep of `region`: East-West tracks spaced at most `spacing`
/// apart, alternating direction. A region narrower than `spacing` gets a
/// single centered track.
[[nodiscard]] std::vector<Vec2> survey_waypoints(const Box2& region, double spacing);

}  // namespace glide::agents
