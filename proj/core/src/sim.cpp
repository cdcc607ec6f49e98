#include "glide/sim.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "glide/errors.hpp"

namespace glide::sim {

std::string_view to_string(Setting s) noexcept {
    switch (s) {
        case Setting::GT: return "GT";
        case Setting::Local: return "Local";
        case Setting::GLIDE: return "GLIDE";
    }
    return "?";
}

std::string_view to_string(Termination t) noexcept {
    switch (t) {
        case Termination::GoalReached: return "goal_reached";
        case Termination::Collision: return "collision";
        case Termination::Timeout: return "timeout";
        case Termination::Immobilized: return "immobilized";
    }
    return "?";
}

Setting parse_setting(std::string_view s) {
    std::string lower(s);
    std::transform(lower.begin(), lower.end(), lower.begin(), [](unsigned char c) { return std::tolower(c); });
    if (lower == "gt") return Setting::GT;
    if (lower == "local") return Setting::Local;
    if (lower == "glide") return Setting::GLIDE;
    throw ConfigError("unknown setting '" + std::string(s) + "'");
}

void MobilityMonitor::record_replan(bool feasible) {
    consecutive_infeasible_ = feasible ? 0 : consecutive_infeasible_ + 1;
}

void MobilityMonitor::record_position(double time, const Vec2& position) {
    samples_.emplace_back(time, position);
    // keep exactly one sample at or before the window start
    while (samples_.size() >= 2 && samples_[1].first <= time - params_.window + 1e-9) samples_.pop_front();
}

std::optional<double> MobilityMonitor::window_displacement() const {
    if (samples_.size() < 2) return std::nullopt;
    const auto& [t0, p0] = samples_.front();
    const auto& [t1, p1] = samples_.back();
    if (t1 - t0 < params_.window - 1e-9) return std::nullopt;
    return distance(p0, p1);
}

bool detect_immobilized(const MobilityMonitor& history) {
    if (history.consecutive_infeasible() >= history.params().max_infeasible) return true;
    if (!history.goal_pending()) return false;
    const auto d = history.window_displacement();
    return d && *d < history.params().min_displacement;
}

void validate(const TrialConfig& c) {
    if (!(c.tick > 0.0)) throw ConfigError("tick must be positive");
    if (!(c.timeout > 0.0)) throw ConfigError("timeout must be positive");
    if (!(c.goal_tolerance > 0.0)) throw ConfigError("goal_tolerance must be positive");
    if (!(c.local_window > 0.0) || !(c.reveal_extent > 0.0)) throw ConfigError("sensing extents must be positive");
    if (!(c.resolution > 0.0)) throw ConfigError("resolution must be positive");
    if (c.inflation < 0.0 || c.footprint_radius < 0.0) throw ConfigError("inflation and footprint must be non-negative");
    if (!(c.scout.lead_offset > 0.0) || !(c.scout.altitude > 0.0)) throw ConfigError("scout offset and altitude must be positive");
    if (!(c.searcher_altitude > 0.0)) throw ConfigError("searcher altitude must be positive");
    if (!(c.detection_period > 0.0)) throw ConfigError("detection_period must be positive");
    if (c.scout_head_start < 0.0 || !(c.search_timeout > 0.0)) throw ConfigError("invalid mission timing");
    if (c.heuristic.lambda < 0.0) throw ConfigError("lambda must be non-negative");
    if (c.urgent_replan_distance < 0.0 || c.replan_horizon < c.urgent_replan_distance || c.replan_deferral < 0.0) {
        throw ConfigError("invalid replan horizon");
    }
    if (c.immobilization.max_infeasible < 1 || !(c.immobilization.window > 0.0)) {
        throw ConfigError("invalid immobilization parameters");
    }
    if (c.world.victims.empty()) throw ConfigError("world has no victims");
    if (c.world.bounds.empty()) throw ConfigError("world bounds are empty");
    comms::validate(c.link);
    perception::validate(c.camera);
}

namespace {

struct GoalEntry {
    Vec2 victim;
    bool reached{false};
};

class Trial {
public:
    Trial(const TrialConfig& config, std::ostream* trajectory)
        : cfg_(config),
          trajectory_(trajectory),
          truth_(worldgen::rasterize(config.world, config.resolution, config.inflation)),
          belief_(truth_.geometry),
          link_(config.link, config.seed),
          tracker_(config.consensus_radius, config.consensus_hits, config.consensus_suppression),
          detector_rng_(Rng::derive(config.seed, 0x646574656374ULL)),
          monitor_(config.immobilization),
          survey_(agents::survey_waypoints(config.world.search_region, config.survey_spacing)) {
        const Vec2 start = config.start_position.value_or(config.world.spawn_center);
        ugv_.position = start;
        ugv_.heading = wrap_angle(config.start_heading.value_or(config.world.spawn_heading));
        scout_.position = {start.x, start.y, config.scout.altitude};
        scout_target_ = scout_.position;
        searcher_.position = {start.x, start.y, config.searcher_altitude};
        const Vec3 ugv3{start.x, start.y, 0.0};
        link_.set_state(comms::link_state(config.link, searcher_.position, ugv3, comms::LinkState::Disconnected), 0.0);
        result_.min_clearance = clearance(start, start);
        replan_period_ticks_ = std::llround(config.replan_deferral / config.tick);
        last_replan_tick_ = -replan_period_ticks_;
    }

    TrialResult run() {
        for (std::int64_t k = 0;; ++k) {
            const double t = static_cast<double>(k) * cfg_.tick;
            const double t_next = static_cast<double>(k + 1) * cfg_.tick;
            sense_and_communicate(t);
            update_belief(k);
            if (goal_pending()) maybe_replan(k);
            const Vec2 before = ugv_.position;
            step_agents(t);
            log_tick(t_next);
            if (auto end = check_termination(before, t_next)) {
                result_.termination = *end;
                result_.success = *end == Termination::GoalReached;
                result_.duration = released_ ? t_next - release_time_ : 0.0;
                break;
            }
        }
        result_.distance = ugv_.odometer;
        result_.link_stats = link_.stats();
        result_.final_belief_coverage = belief_.coverage();
        result_.release_time = released_ ? release_time_ : 0.0;
        result_.victims_confirmed = static_cast<int>(goals_.size());
        result_.victims_reached =
            static_cast<int>(std::count_if(goals_.begin(), goals_.end(), [](const GoalEntry& g) { return g.reached; }));
        return result_;
    }

private:
    [[nodiscard]] bool goal_pending() const {
        return std::any_of(goals_.begin(), goals_.end(), [](const GoalEntry& g) { return !g.reached; });
    }

    [[nodiscard]] double clearance(const Vec2& a, const Vec2& b) const {
        double d = std::numeric_limits<double>::infinity();
        for (const auto& ob : cfg_.world.obstacles) d = std::min(d, segment_distance(ob, a, b));
        return d - cfg_.footprint_radius;
    }

    void sense_and_communicate(double t) {
        if (t + 1e-9 >= next_detection_) {
            next_detection_ += cfg_.detection_period;
            const perception::UavPose pose{searcher_.position, searcher_.attitude, t};
            if (perception::attitude_gate(pose, cfg_.gate_max_tilt)) {
                const auto raw = perception::simulate_detection(cfg_.world, pose, cfg_.camera, cfg_.detector, detector_rng_);
                for (const auto& det : raw) {
                    if (!perception::center_gate(det.bbox, cfg_.camera.image_width, cfg_.camera.image_height,
                                                 cfg_.gate_center_fraction)) {
                        continue;
                    }
                    try {
                        const Vec2 p = perception::project_to_ground(det, cfg_.camera);
                        (void)link_.send({p, det.class_label, det.confidence, "searcher-1", t}, t);
                    } catch (const NoGroundIntersection&) {
                    }
                }
            }
        }
        link_.update(searcher_.position, {ugv_.position.x, ugv_.position.y, 0.0}, t);
        for (const auto& d : link_.poll(t)) {
            if (d.event.class_label != perception::ClassLabel::Victim) continue;
            if (auto confirmed = tracker_.update(d.event)) {
                goals_.push_back({confirmed->position, false});
                goals_changed_ = true;
                if (!release_scheduled_) {
                    release_scheduled_ = true;
                    release_time_ = t + (cfg_.setting == Setting::GLIDE ? cfg_.scout_head_start : 0.0);
                }
            }
        }
    }

    void update_belief(std::int64_t k) {
        switch (cfg_.setting) {
            case Setting::GT:
                if (k == 0) mapping::apply_full_truth(belief_, truth_);
                break;
            case Setting::Local:
                mapping::apply_local_window(belief_, ugv_.position, cfg_.local_window, truth_);
                break;
            case Setting::GLIDE: {
                mapping::apply_local_window(belief_, ugv_.position, cfg_.local_window, truth_);
                const double half = 0.5 * cfg_.reveal_extent;
                reveal_new_part(Box2::centered(scout_.position.xy(), half, half));
                break;
            }
        }
    }

    // Truth is static, so cells already inside the previous footprint cannot
    // change; only the strips the footprint moved into are synced.
    void reveal_new_part(const Box2& box) {
        const auto overlaps = [](const Box2& a, const Box2& b) {
            return a.min.x <= b.max.x && b.min.x <= a.max.x && a.min.y <= b.max.y && b.min.y <= a.max.y;
        };
        if (!last_reveal_ || !overlaps(box, *last_reveal_)) {
            belief_.sync_with_truth(box, truth_);
        } else {
            const Box2& old = *last_reveal_;
            const double x0 = std::max(box.min.x, old.min.x);
            const double x1 = std::min(box.max.x, old.max.x);
            if (box.min.x < old.min.x) belief_.sync_with_truth({box.min, {old.min.x, box.max.y}}, truth_);
            if (box.max.x > old.max.x) belief_.sync_with_truth({{old.max.x, box.min.y}, box.max}, truth_);
            if (box.min.y < old.min.y) belief_.sync_with_truth({{x0, box.min.y}, {x1, old.min.y}}, truth_);
            if (box.max.y > old.max.y) belief_.sync_with_truth({{x0, old.max.y}, {x1, box.max.y}}, truth_);
        }
        last_reveal_ = box;
    }

    [[nodiscard]] std::size_t waypoint_index_at(double s) const {
        const auto it = std::upper_bound(plan_arc_.begin(), plan_arc_.end(), s);
        return it == plan_arc_.begin() ? 0 : static_cast<std::size_t>(it - plan_arc_.begin()) - 1;
    }

    [[nodiscard]] bool blocked_within(double arc) {
        const std::size_t first = waypoint_index_at(ugv_.progress);
        const std::size_t last = waypoint_index_at(ugv_.progress + arc) + 1;
        if (last + 1 >= plan_.waypoints.size()) {
            return planner::needs_replan(plan_, belief_, false, cfg_.corridor_radius, first);
        }
        horizon_plan_.revision_planned_at = plan_.revision_planned_at;
        horizon_plan_.waypoints.assign(plan_.waypoints.begin(), plan_.waypoints.begin() + static_cast<std::ptrdiff_t>(last + 1));
        return planner::needs_replan(horizon_plan_, belief_, false, cfg_.corridor_radius, first);
    }

    void maybe_replan(std::int64_t k) {
        bool need = goals_changed_ || plan_.empty() || current_goal_ < 0 || goals_[static_cast<std::size_t>(current_goal_)].reached;
        if (!need && blocked_within(cfg_.replan_horizon)) {
            // A blockage the UGV cannot reach soon may wait out the deferral period.
            const bool due = k - last_replan_tick_ >= replan_period_ticks_;
            need = due || blocked_within(cfg_.urgent_replan_distance);
        }
        if (!need) {
            const Vec2 ref = agents::point_at(plan_.waypoints, plan_arc_, ugv_.progress);
            need = distance(ref, ugv_.position) > cfg_.max_cross_track;
        }
        if (need) {
            last_replan_tick_ = k;
            replan();
        }
    }

    [[nodiscard]] std::optional<CellIndex> start_cell() const {
        const auto& geom = belief_.geometry();
        const CellIndex c = geom.world_to_cell(ugv_.position);
        if (!geom.in_bounds(c)) return std::nullopt;
        if (mapping::traversable_at(belief_, geom.index(c), cfg_.unknown_policy)) return c;
        // Inflation can swallow the vehicle's own cell; restart from the nearest free one.
        constexpr int kSnapRadius = 8;
        std::optional<CellIndex> best;
        double best_d = std::numeric_limits<double>::infinity();
        for (int dy = -kSnapRadius; dy <= kSnapRadius; ++dy) {
            for (int dx = -kSnapRadius; dx <= kSnapRadius; ++dx) {
                const CellIndex n{c.x + dx, c.y + dy};
                if (!geom.in_bounds(n) || !mapping::traversable_at(belief_, geom.index(n), cfg_.unknown_policy)) continue;
                const double d = distance(geom.cell_center(n), ugv_.position);
                if (d < best_d) {
                    best_d = d;
                    best = n;
                }
            }
        }
        return best;
    }

    [[nodiscard]] planner::Goal goal_for(const Vec2& victim) const {
        const auto& geom = belief_.geometry();
        if (geom.contains(victim)) return {victim, planner::GoalKind::Victim, victim};
        return planner::project_goal(geom, ugv_.position, victim);
    }

    void replan() {
        goals_changed_ = false;
        ++result_.replan_count;
        std::optional<planner::Plan> fresh;
        int chosen = -1;
        const auto start = start_cell();
        if (start) {
            const planner::PoseState pose{*start, planner::discretize_heading(ugv_.heading)};
            std::vector<int> remaining;
            for (std::size_t i = 0; i < goals_.size(); ++i) {
                if (!goals_[i].reached) remaining.push_back(static_cast<int>(i));
            }
            try {
                if (remaining.size() > 1) {
                    std::vector<planner::Goal> gs;
                    for (int i : remaining) gs.push_back(goal_for(goals_[static_cast<std::size_t>(i)].victim));
                    const auto ordering =
                        planner::order_goals(belief_, pose, gs, cfg_.heuristic, cfg_.ugv.max_speed, cfg_.unknown_policy);
                    visit_order_.clear();
                    for (int o : ordering.order) visit_order_.push_back(remaining[static_cast<std::size_t>(o)]);
                    chosen = visit_order_.front();
                } else {
                    chosen = remaining.front();
                    visit_order_ = remaining;
                }
                fresh = planner::plan_path(belief_, pose, goal_for(goals_[static_cast<std::size_t>(chosen)].victim),
                                           cfg_.heuristic, cfg_.unknown_policy);
            } catch (const AllUnreachable&) {
                fresh.reset();
            } catch (const std::invalid_argument&) {
                fresh.reset();
            }
        }
        monitor_.record_replan(fresh.has_value());
        if (fresh) {
            plan_ = std::move(*fresh);
            plan_arc_ = agents::arc_lengths(plan_.waypoints);
            current_goal_ = chosen;
        } else {
            plan_ = {};
            plan_arc_.clear();
            current_goal_ = -1;
        }
        ugv_.progress = 0.0;
    }

    [[nodiscard]] std::optional<Vec2> next_victim_after_current() const {
        bool seen = false;
        for (int i : visit_order_) {
            const auto& g = goals_[static_cast<std::size_t>(i)];
            if (g.reached) continue;
            if (seen) return g.victim;
            if (i == current_goal_) seen = true;
        }
        return std::nullopt;
    }

    void step_agents(double t) {
        released_ = release_scheduled_ && t + 1e-9 >= release_time_;
        if (released_) {
            ugv_ = agents::ugv_step(ugv_, plan_, cfg_.tick, cfg_.ugv);
        }
        if (cfg_.setting == Setting::GLIDE) {
            if (!plan_.empty()) {
                std::optional<Vec2> beyond = next_victim_after_current();
                if (!beyond && current_goal_ >= 0) beyond = goals_[static_cast<std::size_t>(current_goal_)].victim;
                scout_target_ = agents::scout_target(plan_, ugv_.progress, beyond, cfg_.scout);
            }
            scout_ = agents::uav_step(scout_, scout_target_, cfg_.tick, cfg_.uav);
        }
        const Vec2 wp = survey_[survey_index_];
        if (distance(searcher_.position.xy(), wp) < 1.0) survey_index_ = (survey_index_ + 1) % survey_.size();
        const Vec2 next = survey_[survey_index_];
        searcher_ = agents::uav_step(searcher_, {next.x, next.y, cfg_.searcher_altitude}, cfg_.tick, cfg_.uav);
    }

    std::optional<Termination> check_termination(const Vec2& before, double t_next) {
        const double c = clearance(before, ugv_.position);
        result_.min_clearance = std::min(result_.min_clearance, c);
        if (c < 0.0 || !cfg_.world.bounds.contains(ugv_.position)) return Termination::Collision;

        for (auto& g : goals_) {
            if (!g.reached && distance(g.victim, ugv_.position) <= cfg_.goal_tolerance) {
                g.reached = true;
                goals_changed_ = true;
            }
        }
        const auto reached =
            static_cast<std::size_t>(std::count_if(goals_.begin(), goals_.end(), [](const GoalEntry& g) { return g.reached; }));
        if (!goals_.empty() && reached == goals_.size() && goals_.size() >= cfg_.world.victims.size()) {
            return Termination::GoalReached;
        }

        if (released_) {
            monitor_.record_position(t_next, ugv_.position);
            monitor_.set_goal_pending(goal_pending());
        }
        if (detect_immobilized(monitor_)) return Termination::Immobilized;

        if (released_ && t_next - release_time_ >= cfg_.timeout - 1e-9) return Termination::Timeout;
        if (!release_scheduled_ && t_next >= cfg_.search_timeout - 1e-9) return Termination::Timeout;
        return std::nullopt;
    }

    void log_pose(double t, const char* agent, const Vec3& p, double heading) {
        char line[160];
        std::snprintf(line, sizeof line, "{\"t\":%.2f,\"agent\":\"%s\",\"x\":%.4f,\"y\":%.4f,\"z\":%.4f,\"heading\":%.5f}\n",
                      t, agent, p.x, p.y, p.z, heading);
        *trajectory_ << line;
    }

    void log_tick(double t) {
        if (trajectory_ == nullptr) return;
        log_pose(t, "ugv", {ugv_.position.x, ugv_.position.y, 0.0}, ugv_.heading);
        if (cfg_.setting == Setting::GLIDE) log_pose(t, "scout", scout_.position, scout_.attitude.yaw());
        log_pose(t, "searcher", searcher_.position, searcher_.attitude.yaw());
    }

    const TrialConfig& cfg_;
    std::ostream* trajectory_;
    TruthGrid truth_;
    mapping::OccupancyBelief belief_;
    comms::Link link_;
    perception::ConsensusTracker tracker_;
    Rng detector_rng_;
    MobilityMonitor monitor_;
    std::vector<Vec2> survey_;
    std::size_t survey_index_{0};

    agents::UgvState ugv_;
    agents::UavState scout_;
    agents::UavState searcher_;
    Vec3 scout_target_;

    std::vector<GoalEntry> goals_;
    std::vector<int> visit_order_;
    bool goals_changed_{false};
    int current_goal_{-1};
    planner::Plan plan_;
    planner::Plan horizon_plan_;
    std::optional<Box2> last_reveal_;
    std::int64_t last_replan_tick_{0};
    std::int64_t replan_period_ticks_{0};
    std::vector<double> plan_arc_;

    double next_detection_{0.0};
    bool release_scheduled_{false};
    bool released_{false};
    double release_time_{0.0};
    TrialResult result_;
};

}  // namespace

TrialResult run_trial(const TrialConfig& config, std::ostream* trajectory) {
    validate(config);
    Trial trial(config, trajectory);
    return trial.run();
}

std::string to_json(const TrialResult& r) {
    const nlohmann::ordered_json doc = {
        {"success", r.success},
        {"termination", to_string(r.termination)},
        {"duration", r.duration},
        {"distance", r.distance},
        {"replan_count", r.replan_count},
        {"link", {{"sent", r.link_stats.sent},
                  {"delivered", r.link_stats.delivered},
                  {"dropped", r.link_stats.dropped},
                  {"overflow", r.link_stats.overflow},
                  {"queued_max", r.link_stats.queued_max}}},
        {"final_belief_coverage", r.final_belief_coverage},
        {"release_time", r.release_time},
        {"victims_confirmed", r.victims_confirmed},
        {"victims_reached", r.victims_reached},
        {"min_clearance", r.min_clearance},
    };
    return doc.dump();
}

}  // namespace glide::sim
