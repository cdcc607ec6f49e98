#include "glide/planner.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "glide/errors.hpp"

namespace glide::planner {
namespace {

using mapping::CellState;
using mapping::OccupancyBelief;
using mapping::UnknownPolicy;

constexpr unsigned kCellBits = 29;
constexpr std::uint32_t kCellMask = (1U << kCellBits) - 1;

struct QueueEntry {
    double f;
    std::uint32_t key;  // heading << kCellBits | row-major cell: ties break on (heading, cell)

    bool operator<(const QueueEntry& o) const noexcept { return f < o.f || (f == o.f && key < o.key); }
};

/// Exact min-queue on (f, key). Entries are binned by f; only the bin being
/// drained is heap-ordered (4-ary). An entry whose bin has already been
/// reached joins the active heap, so pops stay in exact order even for an
/// inconsistent heuristic.
class OpenList {
public:
    explicit OpenList(double bin_width = 0.05) : inv_width_(1.0 / bin_width) {}

    void clear() noexcept {
        for (std::size_t b = active_; b < bins_.size(); ++b) bins_[b].clear();
        active_ = 0;
        size_ = 0;
    }
    [[nodiscard]] bool empty() const noexcept { return size_ == 0; }

    void push(QueueEntry e) {
        ++size_;
        const std::size_t b = bin_of(e.f);
        if (b <= active_) {
            sift_up(bins_[active_], e);
            return;
        }
        if (b >= bins_.size()) bins_.resize(b + 1);
        bins_[b].push_back(e);
    }

    QueueEntry pop() {
        while (bins_[active_].empty()) {
            ++active_;
            heapify(bins_[active_]);
        }
        auto& heap = bins_[active_];
        const QueueEntry top = heap.front();
        const QueueEntry last = heap.back();
        heap.pop_back();
        if (!heap.empty()) sift_down(heap, 0, last);
        --size_;
        return top;
    }

private:
    static void sift_up(std::vector<QueueEntry>& h, QueueEntry e) {
        std::size_t i = h.size();
        h.push_back(e);
        while (i > 0) {
            const std::size_t p = (i - 1) / 4;
            if (!(e < h[p])) break;
            h[i] = h[p];
            i = p;
        }
        h[i] = e;
    }

    static void sift_down(std::vector<QueueEntry>& h, std::size_t i, QueueEntry e) {
        const std::size_t n = h.size();
        for (;;) {
            const std::size_t first = 4 * i + 1;
            if (first >= n) break;
            std::size_t best = first;
            const std::size_t end = std::min(first + 4, n);
            for (std::size_t c = first + 1; c < end; ++c) {
                if (h[c] < h[best]) best = c;
            }
            if (!(h[best] < e)) break;
            h[i] = h[best];
            i = best;
        }
        h[i] = e;
    }

    static void heapify(std::vector<QueueEntry>& h) {
        if (h.size() < 2) return;
        for (std::size_t i = (h.size() - 2) / 4 + 1; i-- > 0;) sift_down(h, i, h[i]);
    }

    std::size_t bin_of(double f) const noexcept {
        const double b = f * inv_width_;
        return b <= 0.0 ? 0 : static_cast<std::size_t>(b);
    }

    double inv_width_;
    std::vector<std::vector<QueueEntry>> bins_{1};
    std::size_t active_{0};
    std::size_t size_{0};
};

struct Node {
    std::uint32_t mark;      // 2 * stamp when g was written, +1 once expanded
    std::int32_t straight;
    std::int32_t diag_turn;  // 4 * diagonal steps + (turn + 1) of the arriving move
};

struct CellCache {
    std::uint32_t stamp;
    double distance;  // to the goal cell center
    double bearing;
};

/// Per-thread search arrays, reused across calls and invalidated by stamping.
struct Workspace {
    std::vector<Node> nodes;
    std::vector<CellCache> cells;
    OpenList open;
    std::uint32_t stamp{0};

    void prepare(std::size_t cell_count) {
        const std::size_t states = cell_count * kHeadingCount;
        if (nodes.size() != states) {
            nodes.assign(states, Node{0, 0, 0});
            cells.assign(cell_count, CellCache{0, 0.0, 0.0});
            stamp = 0;
        }
        if (++stamp == (1U << 31)) {
            for (auto& n : nodes) n.mark = 0;
            for (auto& c : cells) c.stamp = 0;
            stamp = 1;
        }
    }
};

Workspace& workspace() {
    thread_local Workspace ws;
    return ws;
}

/// Path cost from step counts; identical counts give bit-identical costs.
double cost_from_counts(std::int32_t straight, std::int32_t diagonal, double resolution) noexcept {
    return (static_cast<double>(straight) + static_cast<double>(diagonal) * kSqrt2) * resolution;
}

double heading_gap(double heading_rad, double bearing) noexcept {
    return std::abs(wrap_angle(bearing - heading_rad));
}

// Same as heading_gap for bearing in [-pi, pi] and heading in [0, 2pi).
double heading_gap_fast(double heading_rad, double bearing) noexcept {
    double d = std::abs(bearing - heading_rad);
    if (d > kPi) d = std::abs(kTwoPi - d);
    return d;
}

}  // namespace

int discretize_heading(double yaw) noexcept {
    const long k = std::lround(yaw / (kPi / 4.0));
    return static_cast<int>(((k % kHeadingCount) + kHeadingCount) % kHeadingCount);
}

double delta_theta(const GridGeometry& geometry, const PoseState& state, const Vec2& goal) {
    if (geometry.world_to_cell(goal) == state.cell) return 0.0;
    const Vec2 to_goal = goal - geometry.cell_center(state.cell);
    if (to_goal.squared_norm() == 0.0) return 0.0;
    return heading_gap(heading_angle(state.heading), to_goal.bearing());
}

double orientation_heuristic(const Vec2& position, const Vec2& goal, double delta_theta, double lambda) noexcept {
    return distance(position, goal) + lambda * delta_theta / kPi;
}

double heuristic(const GridGeometry& geometry, const PoseState& state, const Vec2& goal,
                 const HeuristicParams& params) {
    return orientation_heuristic(geometry.cell_center(state.cell), goal, delta_theta(geometry, state, goal),
                                 params.lambda);
}

std::optional<Plan> plan_path(const OccupancyBelief& belief, const PoseState& start, const Goal& goal,
                              const HeuristicParams& params, UnknownPolicy policy) {
    const GridGeometry& geo = belief.geometry();
    if (params.lambda < 0.0) throw std::invalid_argument("lambda must be non-negative");
    if (start.heading < 0 || start.heading >= kHeadingCount) throw std::invalid_argument("heading out of range");
    if (!geo.in_bounds(start.cell) || !mapping::is_traversable(belief, start.cell, policy)) {
        throw std::invalid_argument("start cell is not traversable");
    }
    const CellIndex goal_cell = geo.world_to_cell(goal.position);
    if (!geo.in_bounds(goal_cell) || !mapping::is_traversable(belief, goal_cell, policy)) return std::nullopt;

    // The goal node is the center of the goal cell; aiming the heuristic at it
    // keeps the lambda = 0 case admissible and consistent.
    const Vec2 target = geo.cell_center(goal_cell);
    const double res = geo.resolution();
    const int width = geo.width();
    const int height = geo.height();
    const std::size_t goal_index = geo.index(goal_cell);
    if (geo.cell_count() > kCellMask) throw std::invalid_argument("grid too large for the planner");

    Workspace& ws = workspace();
    ws.prepare(geo.cell_count());
    const std::uint32_t stamp = ws.stamp;

    const auto h_of = [&](int x, int y, int heading) {
        if (x == goal_cell.x && y == goal_cell.y) return 0.0;
        CellCache& cc = ws.cells[static_cast<std::size_t>(y) * static_cast<std::size_t>(width) + static_cast<std::size_t>(x)];
        if (cc.stamp != stamp) {
            const Vec2 c{geo.origin().x + (x + 0.5) * res, geo.origin().y + (y + 0.5) * res};
            const Vec2 to_goal = target - c;
            cc = CellCache{stamp, to_goal.norm(), to_goal.bearing()};
        }
        const double dtheta = heading_gap_fast(heading_angle(heading), cc.bearing);
        return cc.distance + params.lambda * dtheta / kPi;
    };

    const std::uint32_t open_mark = 2 * stamp;
    const std::uint32_t closed_mark = open_mark + 1;
    OpenList& open = ws.open;
    open.clear();
    const auto start_cell = static_cast<std::uint32_t>(geo.index(start.cell));
    const std::size_t start_state = start_cell * kHeadingCount + static_cast<std::size_t>(start.heading);
    ws.nodes[start_state] = Node{open_mark, 0, 1};
    open.push({h_of(start.cell.x, start.cell.y, start.heading), static_cast<std::uint32_t>(start.heading) << kCellBits | start_cell});

    std::int64_t found = -1;
    while (!open.empty()) {
        const QueueEntry top = open.pop();
        const std::uint32_t top_cell = top.key & kCellMask;
        const int top_heading = static_cast<int>(top.key >> kCellBits);
        const std::size_t state = static_cast<std::size_t>(top_cell) * kHeadingCount + static_cast<std::size_t>(top_heading);
        Node& cur = ws.nodes[state];
        if (cur.mark == closed_mark) continue;
        cur.mark = closed_mark;
        if (top_cell == goal_index) {
            found = static_cast<std::int64_t>(state);
            break;
        }
        const int cx = static_cast<int>(top_cell % static_cast<std::uint32_t>(width));
        const int cy = static_cast<int>(top_cell / static_cast<std::uint32_t>(width));
        const std::int32_t base_straight = cur.straight;
        const std::int32_t base_diagonal = cur.diag_turn >> 2;

        for (int turn = -1; turn <= 1; ++turn) {
            const int nh = (top_heading + turn + kHeadingCount) % kHeadingCount;
            const int dx = kHeadingDx[nh];
            const int dy = kHeadingDy[nh];
            const int nx = cx + dx;
            const int ny = cy + dy;
            if (nx < 0 || ny < 0 || nx >= width || ny >= height) continue;
            const std::size_t ncell = static_cast<std::size_t>(ny) * static_cast<std::size_t>(width) + static_cast<std::size_t>(nx);
            if (!mapping::traversable_at(belief, ncell, policy)) continue;
            const bool diag = dx != 0 && dy != 0;
            if (diag) {
                const std::size_t side_a = static_cast<std::size_t>(cy) * static_cast<std::size_t>(width) + static_cast<std::size_t>(nx);
                const std::size_t side_b = static_cast<std::size_t>(ny) * static_cast<std::size_t>(width) + static_cast<std::size_t>(cx);
                if (!mapping::traversable_at(belief, side_a, policy) || !mapping::traversable_at(belief, side_b, policy)) {
                    continue;
                }
            }
            Node& nn = ws.nodes[ncell * kHeadingCount + static_cast<std::size_t>(nh)];
            if (nn.mark == closed_mark) continue;
            const std::int32_t ns = base_straight + (diag ? 0 : 1);
            const std::int32_t nd = base_diagonal + (diag ? 1 : 0);
            const double g = cost_from_counts(ns, nd, res);
            if (nn.mark == open_mark && cost_from_counts(nn.straight, nn.diag_turn >> 2, res) <= g) continue;
            nn = Node{open_mark, ns, nd * 4 + turn + 1};
            open.push({g + h_of(nx, ny, nh), static_cast<std::uint32_t>(nh) << kCellBits | static_cast<std::uint32_t>(ncell)});
        }
    }
    if (found < 0) return std::nullopt;

    Plan plan;
    plan.revision_planned_at = belief.revision();
    const auto last = static_cast<std::size_t>(found);
    plan.total_length = cost_from_counts(ws.nodes[last].straight, ws.nodes[last].diag_turn >> 2, res);
    // Walk back through the arriving moves: the parent sits one step against
    // the node's heading, turned back by the recorded turn.
    std::size_t cell = last / kHeadingCount;
    int heading = static_cast<int>(last % kHeadingCount);
    for (;;) {
        plan.waypoints.push_back(geo.cell_center(geo.cell(cell)));
        if (cell == start_cell && heading == start.heading) break;
        const int turn = (ws.nodes[cell * kHeadingCount + static_cast<std::size_t>(heading)].diag_turn & 3) - 1;
        const CellIndex c = geo.cell(cell);
        cell = geo.index(CellIndex{c.x - kHeadingDx[heading], c.y - kHeadingDy[heading]});
        heading = (heading - turn + kHeadingCount) % kHeadingCount;
    }
    std::reverse(plan.waypoints.begin(), plan.waypoints.end());
    plan.goal_order = {0};
    return plan;
}

Goal project_goal(const GridGeometry& geometry, const Vec2& ego_position, const Vec2& victim_position) {
    if (geometry.contains(victim_position)) return {victim_position, GoalKind::Victim, victim_position};
    const Vec2 d = victim_position - ego_position;
    if (d.squared_norm() == 0.0) throw DegenerateRay("ego-vehicle and victim coincide");

    const Box2 box = geometry.extent();
    double t_enter = -std::numeric_limits<double>::infinity();
    double t_exit = std::numeric_limits<double>::infinity();
    const auto slab = [&](double origin, double dir, double lo, double hi) {
        if (dir == 0.0) {
            if (origin < lo || origin > hi) t_exit = -1.0;
            return;
        }
        double t0 = (lo - origin) / dir;
        double t1 = (hi - origin) / dir;
        if (t0 > t1) std::swap(t0, t1);
        t_enter = std::max(t_enter, t0);
        t_exit = std::min(t_exit, t1);
    };
    slab(ego_position.x, d.x, box.min.x, box.max.x);
    slab(ego_position.y, d.y, box.min.y, box.max.y);

    Vec2 boundary = victim_position;
    if (t_exit >= std::max(t_enter, 0.0)) boundary = ego_position + d * t_exit;
    CellIndex c = geometry.world_to_cell(boundary);
    c.x = std::clamp(c.x, 0, geometry.width() - 1);
    c.y = std::clamp(c.y, 0, geometry.height() - 1);
    return {geometry.cell_center(c), GoalKind::Proxy, victim_position};
}

GoalOrdering solve_visit_order(std::vector<std::vector<double>> times) {
    GoalOrdering result;
    const std::size_t n = times.empty() ? 0 : times.size() - 1;
    std::vector<int> reachable;
    for (std::size_t j = 1; j <= n; ++j) {
        if (std::isfinite(times[0][j])) {
            reachable.push_back(static_cast<int>(j - 1));
        } else {
            result.unreachable.push_back(static_cast<int>(j - 1));
        }
    }
    result.times = std::move(times);
    if (reachable.empty()) return result;
    const auto& t = result.times;
    const auto leg = [&](int from, int to) { return t[static_cast<std::size_t>(from + 1)][static_cast<std::size_t>(to + 1)]; };

    const std::size_t m = reachable.size();
    if (m <= kExactOrderLimit) {
        // Held-Karp over subsets of the reachable victims; open path from the start.
        const std::size_t full = (std::size_t{1} << m) - 1;
        std::vector<double> dp((full + 1) * m, kUnreachable);
        std::vector<int> prev((full + 1) * m, -1);
        for (std::size_t i = 0; i < m; ++i) dp[(std::size_t{1} << i) * m + i] = t[0][static_cast<std::size_t>(reachable[i] + 1)];
        for (std::size_t mask = 1; mask <= full; ++mask) {
            for (std::size_t last = 0; last < m; ++last) {
                const double cur = dp[mask * m + last];
                if (!(mask & (std::size_t{1} << last)) || !std::isfinite(cur)) continue;
                for (std::size_t next = 0; next < m; ++next) {
                    if (mask & (std::size_t{1} << next)) continue;
                    const double cand = cur + leg(reachable[last], reachable[next]);
                    const std::size_t nmask = mask | (std::size_t{1} << next);
                    if (cand < dp[nmask * m + next]) {
                        dp[nmask * m + next] = cand;
                        prev[nmask * m + next] = static_cast<int>(last);
                    }
                }
            }
        }
        std::size_t best_last = 0;
        for (std::size_t last = 1; last < m; ++last) {
            if (dp[full * m + last] < dp[full * m + best_last]) best_last = last;
        }
        if (std::isfinite(dp[full * m + best_last])) {
            result.total_time = dp[full * m + best_last];
            std::size_t mask = full;
            int cur = static_cast<int>(best_last);
            while (cur >= 0) {
                result.order.push_back(reachable[static_cast<std::size_t>(cur)]);
                const int p = prev[mask * m + static_cast<std::size_t>(cur)];
                mask &= ~(std::size_t{1} << static_cast<std::size_t>(cur));
                cur = p;
            }
            std::reverse(result.order.begin(), result.order.end());
            return result;
        }
    }

    // Nearest neighbour; victims that cannot be chained are visited last in index order.
    std::vector<bool> used(m, false);
    int current = -1;
    double total = 0.0;
    for (std::size_t step = 0; step < m; ++step) {
        std::size_t best = m;
        double best_time = kUnreachable;
        for (std::size_t k = 0; k < m; ++k) {
            if (used[k]) continue;
            const double c = current < 0 ? t[0][static_cast<std::size_t>(reachable[k] + 1)] : leg(current, reachable[k]);
            if (c < best_time) {
                best_time = c;
                best = k;
            }
        }
        if (best == m) break;
        used[best] = true;
        total += best_time;
        current = reachable[best];
        result.order.push_back(current);
    }
    for (std::size_t k = 0; k < m; ++k) {
        if (!used[k]) result.order.push_back(reachable[k]);
    }
    result.total_time = result.order.size() == m ? total : kUnreachable;
    return result;
}

GoalOrdering order_goals(const OccupancyBelief& belief, const PoseState& start, const std::vector<Goal>& victims,
                         const HeuristicParams& params, double max_speed, UnknownPolicy policy) {
    if (victims.empty()) throw std::invalid_argument("order_goals needs at least one victim");
    if (!(max_speed > 0.0)) throw std::invalid_argument("max_speed must be positive");
    const GridGeometry& geo = belief.geometry();
    const std::size_t n = victims.size();
    std::vector<std::vector<double>> times(n + 1, std::vector<double>(n + 1, kUnreachable));
    for (std::size_t i = 0; i <= n; ++i) times[i][i] = 0.0;

    const auto travel = [&](const PoseState& from, const Goal& to) {
        const auto plan = plan_path(belief, from, to, params, policy);
        return plan ? plan->total_length / max_speed : kUnreachable;
    };
    for (std::size_t j = 0; j < n; ++j) times[0][j + 1] = travel(start, victims[j]);
    for (std::size_t i = 0; i < n; ++i) {
        const CellIndex from_cell = geo.world_to_cell(victims[i].position);
        if (!geo.in_bounds(from_cell) || !mapping::is_traversable(belief, from_cell, policy)) continue;
        for (std::size_t j = 0; j < n; ++j) {
            if (i == j) continue;
            const Vec2 dir = victims[j].position - geo.cell_center(from_cell);
            const int heading = dir.squared_norm() > 0.0 ? discretize_heading(dir.bearing()) : 0;
            times[i + 1][j + 1] = travel({from_cell, heading}, victims[j]);
        }
    }
    GoalOrdering result = solve_visit_order(std::move(times));
    if (result.order.empty()) throw AllUnreachable("no victim is reachable from the ego-vehicle");
    return result;
}

bool needs_replan(const Plan& plan, const OccupancyBelief& belief, bool new_victims, double corridor_radius,
                  std::size_t first_waypoint) {
    if (new_victims) return true;
    if (belief.revision() <= plan.revision_planned_at) return false;
    const GridGeometry& geo = belief.geometry();
    const int reach = static_cast<int>(std::ceil(corridor_radius / geo.resolution()));
    const double r2 = corridor_radius * corridor_radius;
    for (std::size_t w = first_waypoint; w < plan.waypoints.size(); ++w) {
        const CellIndex c = geo.world_to_cell(plan.waypoints[w]);
        const Vec2 center = geo.cell_center(c);
        for (int dy = -reach; dy <= reach; ++dy) {
            for (int dx = -reach; dx <= reach; ++dx) {
                const CellIndex n{c.x + dx, c.y + dy};
                if (!geo.in_bounds(n)) continue;
                if ((geo.cell_center(n) - center).squared_norm() > r2 + 1e-12) continue;
                const auto idx = geo.index(n);
                if (belief.at(idx) == CellState::Occupied && belief.changed_at(idx) > plan.revision_planned_at) {
                    return true;
                }
            }
        }
    }
    return false;
}

std::string plan_to_json(const Plan& plan) {
    nlohmann::json waypoints = nlohmann::json::array();
    for (const auto& w : plan.waypoints) waypoints.push_back({w.x, w.y});
    const nlohmann::json doc = {
        {"frame", "ENU"},
        {"units", "m"},
        {"total_length", plan.total_length},
        {"goal_order", plan.goal_order},
        {"revision", plan.revision_planned_at},
        {"waypoints", std::move(waypoints)},
    };
    return doc.dump();
}

}  // namespace glide::planner
