// Pose-aware A* on the occupancy belief, visitation ordering over a pairwise
// travel-time matrix, boundary projection of off-grid goals and replanning
// triggers.
//
// Search graph: states are (cell, heading) with eight headings at 45 degree
// steps, counter-clockwise from East. A transition may change heading by at
// most one step and moves one cell along the new heading. Diagonal moves may
// not cut the corner of a blocked orthogonal neighbour. Edge cost is the
// Euclidean distance between cell centers; orientation enters only through
// the heuristic.

#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "glide/geometry.hpp"
#include "glide/grid.hpp"
#include "glide/mapping.hpp"

namespace glide::planner {

inline constexpr int kHeadingCount = 8;

/// Grid offsets for heading h (0 = East, 2 = North, 4 = West, 6 = South).
inline constexpr int kHeadingDx[kHeadingCount] = {1, 1, 0, -1, -1, -1, 0, 1};
inline constexpr int kHeadingDy[kHeadingCount] = {0, 1, 1, 1, 0, -1, -1, -1};

[[nodiscard]] constexpr double heading_angle(int heading) noexcept { return heading * (kPi / 4.0); }

/// Nearest discrete heading to a continuous yaw.
[[nodiscard]] int discretize_heading(double yaw) noexcept;

struct PoseState {
    CellIndex cell;
    int heading{0};
    friend constexpr bool operator==(const PoseState&, const PoseState&) = default;
};

enum class GoalKind { Victim, Proxy };

struct Goal {
    Vec2 position;         ///< where the planner aims (boundary cell center for proxies)
    GoalKind kind{GoalKind::Victim};
    Vec2 victim_position;  ///< original georeferenced victim position
};

struct Plan {
    std::vector<Vec2> waypoints;
    double total_length{0.0};
    std::vector<int> goal_order;
    std::uint64_t revision_planned_at{0};

    [[nodiscard]] bool empty() const noexcept { return waypoints.empty(); }
};

struct HeuristicParams {
    double lambda{1.0};
};

/// Minimal angle between the heading and the bearing from the cell center to
/// `goal`, in [0, pi]. Zero when the goal falls in the state's own cell.
[[nodiscard]] double delta_theta(const GridGeometry& geometry, const PoseState& state, const Vec2& goal);

/// ||position - goal|| + lambda * delta_theta / pi.
[[nodiscard]] double orientation_heuristic(const Vec2& position, const Vec2& goal, double delta_theta,
                                           double lambda) noexcept;

/// The orientation heuristic evaluated at a search state.
[[nodiscard]] double heuristic(const GridGeometry& geometry, const PoseState& state, const Vec2& goal,
                               const HeuristicParams& params);

/// A* from `start` to the cell containing `goal.position`. Returns std::nullopt
/// when no traversable path exists (Infeasible).
/// @throws std::invalid_argument when the start cell is not traversable or off-grid.
[[nodiscard]] std::optional<Plan> plan_path(const mapping::OccupancyBelief& belief, const PoseState& start,
                                            const Goal& goal, const HeuristicParams& params,
                                            mapping::UnknownPolicy policy = mapping::UnknownPolicy::Optimistic);

/// Victim inside the grid is returned as-is; otherwise the ray from the ego
/// position toward the victim is clipped at the grid boundary.
/// @throws DegenerateRay when ego and victim coincide.
[[nodiscard]] Goal project_goal(const GridGeometry& geometry, const Vec2& ego_position, const Vec2& victim_position);

inline constexpr double kUnreachable = std::numeric_limits<double>::infinity();

struct GoalOrdering {
    /// Reachable victims in visiting order, followed by none of the unreachable ones.
    std::vector<int> order;
    std::vector<int> unreachable;
    /// (n+1) x (n+1) travel times; row/column 0 is the ego start, i+1 is victim i.
    std::vector<std::vector<double>> times;
    double total_time{0.0};
};

/// Pairwise shortest-time matrix and the visiting order that minimizes total
/// time from the ego start. Exact for up to kExactOrderLimit victims,
/// nearest-neighbour beyond.
/// @throws AllUnreachable if no victim can be reached.
inline constexpr std::size_t kExactOrderLimit = 8;
[[nodiscard]] GoalOrdering order_goals(const mapping::OccupancyBelief& belief, const PoseState& start,
                                       const std::vector<Goal>& victims, const HeuristicParams& params,
                                       double max_speed,
                                       mapping::UnknownPolicy policy = mapping::UnknownPolicy::Optimistic);

/// Minimum total time over open tours of `times` (layout as in GoalOrdering).
/// Exposed separately so the solver can be checked in isolation.
[[nodiscard]] GoalOrdering solve_visit_order(std::vector<std::vector<double>> times);

/// True iff new victims arrived, or the belief advanced and a cell within
/// `corridor_radius` of a waypoint (from `first_waypoint` on) became Occupied
/// after the plan was made.
[[nodiscard]] bool needs_replan(const Plan& plan, const mapping::OccupancyBelief& belief, bool new_victims,
                                double corridor_radius, std::size_t first_waypoint = 0);

[[nodiscard]] std::string plan_to_json(const Plan& plan);

}  // namespace glide::planner
