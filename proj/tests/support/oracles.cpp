#include "oracles.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <queue>
#include <sstream>
#include <tuple>

#include "glide/random.hpp"

namespace oracle {

using glide::CellIndex;
using glide::Vec2;
using glide::Vec3;
using glide::mapping::CellState;
using glide::mapping::OccupancyBelief;
using glide::mapping::UnknownPolicy;

namespace {

constexpr std::array<int, 8> kDx{1, 1, 0, -1, -1, -1, 0, 1};
constexpr std::array<int, 8> kDy{0, 1, 1, 1, 0, -1, -1, -1};

bool free_cell(const OccupancyBelief& b, int x, int y, UnknownPolicy policy) {
    const auto& g = b.geometry();
    if (x < 0 || y < 0 || x >= g.width() || y >= g.height()) return false;
    const CellState s = b.at(CellIndex{x, y});
    if (s == CellState::Free) return true;
    return s == CellState::Unknown && policy == UnknownPolicy::Optimistic;
}

bool step_allowed(const OccupancyBelief& b, int x, int y, int heading, UnknownPolicy policy) {
    const int nx = x + kDx[heading];
    const int ny = y + kDy[heading];
    if (!free_cell(b, nx, ny, policy)) return false;
    if (kDx[heading] != 0 && kDy[heading] != 0) {
        return free_cell(b, nx, y, policy) && free_cell(b, x, ny, policy);
    }
    return true;
}

double point_segment(const Vec2& p, const Vec2& a, const Vec2& b) {
    const double vx = b.x - a.x, vy = b.y - a.y;
    const double len2 = vx * vx + vy * vy;
    double t = len2 > 0.0 ? ((p.x - a.x) * vx + (p.y - a.y) * vy) / len2 : 0.0;
    t = std::clamp(t, 0.0, 1.0);
    return std::hypot(p.x - (a.x + t * vx), p.y - (a.y + t * vy));
}

double orient(const Vec2& a, const Vec2& b, const Vec2& c) {
    return (b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x);
}

bool segments_cross(const Vec2& a, const Vec2& b, const Vec2& c, const Vec2& d) {
    const double o1 = orient(a, b, c), o2 = orient(a, b, d);
    const double o3 = orient(c, d, a), o4 = orient(c, d, b);
    return ((o1 > 0) != (o2 > 0)) && ((o3 > 0) != (o4 > 0)) && o1 != 0 && o2 != 0 && o3 != 0 && o4 != 0;
}

double segment_segment(const Vec2& a, const Vec2& b, const Vec2& c, const Vec2& d) {
    if (segments_cross(a, b, c, d)) return 0.0;
    return std::min({point_segment(a, c, d), point_segment(b, c, d), point_segment(c, a, b), point_segment(d, a, b)});
}

std::vector<Vec2> rect_polygon(const glide::OrientedRect& r) {
    const double c = std::cos(r.yaw), s = std::sin(r.yaw);
    const double hx = r.size.x / 2, hy = r.size.y / 2;
    std::vector<Vec2> out;
    for (const auto& [lx, ly] : std::array<std::pair<double, double>, 4>{{{-hx, -hy}, {hx, -hy}, {hx, hy}, {-hx, hy}}}) {
        out.push_back({r.center.x + c * lx - s * ly, r.center.y + s * lx + c * ly});
    }
    return out;
}

double polygon_distance(const std::vector<Vec2>& poly, const Vec2& p) {
    if (point_in_polygon(poly, p)) return 0.0;
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < poly.size(); ++i) {
        best = std::min(best, point_segment(p, poly[i], poly[(i + 1) % poly.size()]));
    }
    return best;
}

}  // namespace

std::optional<PathCost> dijkstra(const OccupancyBelief& belief, const glide::planner::PoseState& start,
                                 CellIndex goal, UnknownPolicy policy) {
    const auto& g = belief.geometry();
    if (!free_cell(belief, start.cell.x, start.cell.y, policy)) return std::nullopt;
    if (!free_cell(belief, goal.x, goal.y, policy)) return std::nullopt;
    const auto key = [&](int x, int y, int h) { return (static_cast<std::size_t>(y) * g.width() + x) * 8 + h; };
    const auto cost = [](int s, int d) { return s + d * glide::kSqrt2; };

    std::vector<PathCost> best(g.cell_count() * 8, PathCost{-1, -1});
    using Item = std::tuple<double, int, int, int, int, int>;  // cost, straight, diag, x, y, heading
    std::priority_queue<Item, std::vector<Item>, std::greater<>> pq;
    best[key(start.cell.x, start.cell.y, start.heading)] = {0, 0};
    pq.emplace(0.0, 0, 0, start.cell.x, start.cell.y, start.heading);
    while (!pq.empty()) {
        const auto [c, s, d, x, y, h] = pq.top();
        pq.pop();
        const PathCost& rec = best[key(x, y, h)];
        if (rec.straight != s || rec.diagonal != d) continue;
        if (x == goal.x && y == goal.y) return PathCost{s, d};
        for (int turn = -1; turn <= 1; ++turn) {
            const int nh = (h + turn + 8) % 8;
            if (!step_allowed(belief, x, y, nh, policy)) continue;
            const bool diag = kDx[nh] != 0 && kDy[nh] != 0;
            const int ns = s + (diag ? 0 : 1);
            const int nd = d + (diag ? 1 : 0);
            const int nx = x + kDx[nh], ny = y + kDy[nh];
            PathCost& nb = best[key(nx, ny, nh)];
            if (nb.straight >= 0 && cost(nb.straight, nb.diagonal) <= cost(ns, nd)) continue;
            nb = {ns, nd};
            pq.emplace(cost(ns, nd), ns, nd, nx, ny, nh);
        }
    }
    return std::nullopt;
}

std::string check_path(const OccupancyBelief& belief, const glide::planner::PoseState& start,
                       const std::vector<Vec2>& waypoints, UnknownPolicy policy) {
    const auto& g = belief.geometry();
    if (waypoints.empty()) return "empty path";
    std::vector<CellIndex> cells;
    for (const auto& w : waypoints) {
        const CellIndex c = g.world_to_cell(w);
        const Vec2 center = g.cell_center(c);
        if (std::abs(center.x - w.x) > 1e-9 || std::abs(center.y - w.y) > 1e-9) return "waypoint off cell center";
        cells.push_back(c);
    }
    if (!(cells.front() == start.cell)) return "path does not begin at the start cell";
    int heading = start.heading;
    for (std::size_t i = 1; i < cells.size(); ++i) {
        const int dx = cells[i].x - cells[i - 1].x;
        const int dy = cells[i].y - cells[i - 1].y;
        int h = -1;
        for (int k = 0; k < 8; ++k) {
            if (kDx[k] == dx && kDy[k] == dy) h = k;
        }
        std::ostringstream at;
        at << " at step " << i;
        if (h < 0) return "non-adjacent step" + at.str();
        const int diff = std::abs(h - heading) % 8;
        if (std::min(diff, 8 - diff) > 1) return "turn exceeds one heading step" + at.str();
        if (!step_allowed(belief, cells[i - 1].x, cells[i - 1].y, h, policy)) return "blocked or corner-cutting step" + at.str();
        heading = h;
    }
    return {};
}

bool point_in_polygon(const std::vector<Vec2>& polygon, const Vec2& p) {
    bool inside = false;
    for (std::size_t i = 0, j = polygon.size() - 1; i < polygon.size(); j = i++) {
        const Vec2& a = polygon[i];
        const Vec2& b = polygon[j];
        if ((a.y > p.y) != (b.y > p.y)) {
            const double x = a.x + (p.y - a.y) * (b.x - a.x) / (b.y - a.y);
            if (p.x < x) inside = !inside;
        }
    }
    return inside;
}

std::vector<std::uint8_t> rasterize(const glide::worldgen::WorldSpec& world, double resolution, double inflation) {
    const auto g = glide::GridGeometry::covering(world.bounds, resolution);
    std::vector<std::vector<Vec2>> polys;
    for (const auto& o : world.obstacles) polys.push_back(rect_polygon(o));
    std::vector<std::uint8_t> out(g.cell_count(), 0);
    for (int y = 0; y < g.height(); ++y) {
        for (int x = 0; x < g.width(); ++x) {
            const Vec2 c = g.cell_center({x, y});
            for (const auto& poly : polys) {
                if (polygon_distance(poly, c) <= inflation) {
                    out[g.index({x, y})] = 1;
                    break;
                }
            }
        }
    }
    return out;
}

std::vector<std::uint8_t> reachable(const glide::TruthGrid& grid, CellIndex start) {
    const auto& g = grid.geometry;
    std::vector<std::uint8_t> seen(g.cell_count(), 0);
    if (!g.in_bounds(start) || grid.is_occupied(start)) return seen;
    std::queue<CellIndex> q;
    q.push(start);
    seen[g.index(start)] = 1;
    while (!q.empty()) {
        const CellIndex c = q.front();
        q.pop();
        for (const auto& [dx, dy] : std::array<std::pair<int, int>, 4>{{{1, 0}, {-1, 0}, {0, 1}, {0, -1}}}) {
            const CellIndex n{c.x + dx, c.y + dy};
            if (!g.in_bounds(n) || grid.is_occupied(n) || seen[g.index(n)]) continue;
            seen[g.index(n)] = 1;
            q.push(n);
        }
    }
    return seen;
}

Vec2 ray_box_exit(const glide::Box2& box, const Vec2& origin, const Vec2& dir) {
    // Grow t until the point leaves the box, then bisect the boundary.
    double lo = 0.0, hi = 1.0;
    const auto inside = [&](double t) { return box.contains(origin + dir * t); };
    while (inside(hi)) hi *= 2.0;
    for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (lo + hi);
        (inside(mid) ? lo : hi) = mid;
    }
    return origin + dir * lo;
}

Vec2 ray_march_ground(const Vec3& origin, const Vec3& direction) {
    double lo = 0.0, hi = 0.5;
    const auto above = [&](double t) { return origin.z + t * direction.z > 0.0; };
    while (above(hi)) {
        lo = hi;
        hi += 0.5;
        if (hi > 1e7) return {std::nan(""), std::nan("")};
    }
    for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (lo + hi);
        (above(mid) ? lo : hi) = mid;
    }
    const double t = 0.5 * (lo + hi);
    return {origin.x + t * direction.x, origin.y + t * direction.y};
}

Vec3 camera_ray(const Vec2& pixel, const glide::Quaternion& attitude,
                const glide::perception::CameraIntrinsics& in) {
    const double right = (pixel.x - in.principal_point.x) / in.focal_length_px;
    const double up = -(pixel.y - in.principal_point.y) / in.focal_length_px;
    // Body frame with identity attitude: x East, y North, z up; the camera looks down.
    const Vec3 body{right, up, -1.0};
    // Rotation matrix from the quaternion, written out rather than using Quaternion::rotate.
    const double w = attitude.w, x = attitude.x, y = attitude.y, z = attitude.z;
    const double m[3][3] = {{1 - 2 * (y * y + z * z), 2 * (x * y - w * z), 2 * (x * z + w * y)},
                            {2 * (x * y + w * z), 1 - 2 * (x * x + z * z), 2 * (y * z - w * x)},
                            {2 * (x * z - w * y), 2 * (y * z + w * x), 1 - 2 * (x * x + y * y)}};
    return {m[0][0] * body.x + m[0][1] * body.y + m[0][2] * body.z,
            m[1][0] * body.x + m[1][1] * body.y + m[1][2] * body.z,
            m[2][0] * body.x + m[2][1] * body.y + m[2][2] * body.z};
}

std::vector<int> best_permutation(const std::vector<std::vector<double>>& times, double* total) {
    const int n = static_cast<int>(times.size()) - 1;
    std::vector<int> perm(static_cast<std::size_t>(n));
    std::iota(perm.begin(), perm.end(), 0);
    std::vector<int> best = perm;
    double best_cost = std::numeric_limits<double>::infinity();
    do {
        double c = 0.0;
        int at = 0;
        for (const int v : perm) {
            c += times[static_cast<std::size_t>(at)][static_cast<std::size_t>(v + 1)];
            at = v + 1;
        }
        if (c < best_cost) {
            best_cost = c;
            best = perm;
        }
    } while (std::next_permutation(perm.begin(), perm.end()));
    if (total != nullptr) *total = best_cost;
    return best;
}

double max_track_gap(const glide::Box2& region, const std::vector<Vec2>& waypoints, int samples,
                     std::uint64_t seed) {
    glide::Rng rng(seed);
    double worst = 0.0;
    for (int i = 0; i < samples; ++i) {
        const Vec2 p{rng.uniform(region.min.x, region.max.x), rng.uniform(region.min.y, region.max.y)};
        double best = std::numeric_limits<double>::infinity();
        for (std::size_t k = 0; k + 1 < waypoints.size(); ++k) {
            best = std::min(best, point_segment(p, waypoints[k], waypoints[k + 1]));
        }
        worst = std::max(worst, best);
    }
    return worst;
}

double segment_clearance(const glide::worldgen::WorldSpec& world, const Vec2& a, const Vec2& b, double radius) {
    double best = std::numeric_limits<double>::infinity();
    for (const auto& o : world.obstacles) {
        const auto poly = rect_polygon(o);
        double d = (point_in_polygon(poly, a) || point_in_polygon(poly, b)) ? 0.0 : std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < poly.size() && d > 0.0; ++i) {
            d = std::min(d, segment_segment(a, b, poly[i], poly[(i + 1) % poly.size()]));
        }
        best = std::min(best, d);
    }
    return best - radius;
}

}  // namespace oracle
