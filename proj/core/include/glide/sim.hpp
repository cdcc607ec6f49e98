// One trial of the cooperative search-and-rescue loop at a fixed tick:
// searcher detections -> link -> consensus -> goals, setting-dependent map
// updates, replanning, platform motion and termination checks.

#pragma once

#include <cstdint>
#include <deque>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "glide/agents.hpp"
#include "glide/comms.hpp"
#include "glide/mapping.hpp"
#include "glide/perception.hpp"
#include "glide/planner.hpp"
#include "glide/worldgen.hpp"

namespace glide::sim {

enum class Setting { GT, Local, GLIDE };
enum class Termination { GoalReached, Collision, Timeout, Immobilized };

[[nodiscard]] std::string_view to_string(Setting s) noexcept;
[[nodiscard]] std::string_view to_string(Termination t) noexcept;
[[nodiscard]] Setting parse_setting(std::string_view s);

struct ImmobilizationParams {
    int max_infeasible{3};          ///< consecutive failed replans
    double window{20.0};            ///< seconds
    double min_displacement{0.5};   ///< meters over `window`
};

/// Replan outcomes and UGV position samples, oldest first.
class MobilityMonitor {
public:
    explicit MobilityMonitor(ImmobilizationParams params = {}) : params_(params) {}

    void record_replan(bool feasible);
    void record_position(double time, const Vec2& position);
    void set_goal_pending(bool pending) noexcept { goal_pending_ = pending; }

    [[nodiscard]] int consecutive_infeasible() const noexcept { return consecutive_infeasible_; }
    [[nodiscard]] bool goal_pending() const noexcept { return goal_pending_; }
    [[nodiscard]] const ImmobilizationParams& params() const noexcept { return params_; }

    /// Net displacement between the newest sample and the sample `window`
    /// seconds before it; nullopt until the history spans a full window.
    [[nodiscard]] std::optional<double> window_displacement() const;

private:
    ImmobilizationParams params_;
    int consecutive_infeasible_{0};
    bool goal_pending_{false};
    std::deque<std::pair<double, Vec2>> samples_;
};

/// K consecutive infeasible replans, or less than min_displacement over a
/// full window while a goal remains.
[[nodiscard]] bool detect_immobilized(const MobilityMonitor& history);

struct TrialConfig {
    worldgen::WorldSpec world;
    Setting setting{Setting::GLIDE};
    planner::HeuristicParams heuristic;
    double tick{0.1};
    double timeout{300.0};          ///< seconds after the UGV is released
    double goal_tolerance{2.0};
    std::uint64_t seed{0};
    comms::LinkModel link;
    agents::ScoutPolicy scout;
    double local_window{10.0};
    double reveal_extent{50.0};

    std::optional<Vec2> start_position;     ///< defaults to the world spawn
    std::optional<double> start_heading;
    double resolution{0.5};
    double inflation{worldgen::kDefaultInflation};
    double footprint_radius{1.0};           ///< UGV body radius checked against raw obstacles
    mapping::UnknownPolicy unknown_policy{mapping::UnknownPolicy::Optimistic};
    double corridor_radius{0.5};
    double replan_horizon{40.0};            ///< scout lead plus half the reveal extent; blockages beyond wait
    double urgent_replan_distance{15.0};    ///< blockages closer than this along the plan replan at once
    double replan_deferral{2.0};            ///< s; farther blockages replan at most this often
    double max_cross_track{2.5};            ///< deviation from the plan that forces a replan

    agents::UgvLimits ugv;
    agents::UavLimits uav;

    perception::CameraIntrinsics camera;
    perception::SimulatedDetectorParams detector{0.3, 0.8, 0.9};
    double detection_period{0.5};
    double gate_max_tilt{deg_to_rad(15.0)};
    double gate_center_fraction{0.5};
    double consensus_radius{1.0};
    int consensus_hits{3};
    double consensus_suppression{3.0};
    double searcher_altitude{15.0};
    double survey_spacing{8.0};
    double search_timeout{300.0};           ///< seconds allowed before the first confirmation

    double scout_head_start{5.0};           ///< GLIDE only: scout flies the first plan before the UGV moves
    ImmobilizationParams immobilization;
};

/// @throws ConfigError when an invariant is violated.
void validate(const TrialConfig& config);

struct TrialResult {
    bool success{false};
    Termination termination{Termination::Timeout};
    double duration{0.0};          ///< from UGV release to termination
    double distance{0.0};          ///< UGV odometer
    int replan_count{0};
    comms::LinkStats link_stats;
    double final_belief_coverage{0.0};
    double release_time{0.0};      ///< simulated time at which the UGV started moving
    int victims_confirmed{0};
    int victims_reached{0};
    double min_clearance{0.0};     ///< closest approach of the UGV body to a raw obstacle

    friend bool operator==(const TrialResult&, const TrialResult&) = default;
};

/// Runs one trial. When `trajectory` is given, one JSON line per agent per
/// tick is written to it: {"t", "agent", "x", "y", "z", "heading"}.
[[nodiscard]] TrialResult run_trial(const TrialConfig& config, std::ostream* trajectory = nullptr);

[[nodiscard]] std::string to_json(const TrialResult& result);

}  // namespace glide::sim
