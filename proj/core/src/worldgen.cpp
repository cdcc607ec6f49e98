#include "glide/worldgen.hpp"

#include <algorithm>
#include <fstream>
#include <limits>
#include <sstream>

#include <nlohmann/json.hpp>

#include "glide/errors.hpp"
#include "glide/random.hpp"

namespace glide::worldgen {
namespace {

using nlohmann::json;

// U-shape corridor geometry, meters.
constexpr double kOpeningMin = 8.0;
constexpr double kOpeningMax = 15.0;
constexpr double kDepthMin = 10.0;
constexpr double kDepthMax = 20.0;

struct Structure {
    std::vector<OrientedRect> parts;
};

/// Three walls in a local frame whose opening faces local +y, rotated by `yaw`
/// about `center` (the middle of the enclosed corridor).
Structure make_ushape(Vec2 center, double opening, double depth, double thickness, double yaw) {
    const double arm_x = 0.5 * (opening + thickness);
    const auto place = [&](Vec2 local, Vec2 size) {
        return OrientedRect{center + rotate(local, yaw), size, yaw};
    };
    Structure s;
    s.parts.push_back(place({-arm_x, 0.0}, {thickness, depth}));
    s.parts.push_back(place({arm_x, 0.0}, {thickness, depth}));
    s.parts.push_back(place({0.0, -0.5 * (depth + thickness)}, {opening + 2.0 * thickness, thickness}));
    return s;
}

Structure make_line(Vec2 center, double length, double thickness, double yaw) {
    return Structure{{OrientedRect{center, {length, thickness}, yaw}}};
}

Structure random_clutter(Rng& rng, const DifficultyLevel& diff, double thickness, double half) {
    const Vec2 center{rng.uniform(-0.55 * half, 0.55 * half), rng.uniform(-0.6 * half, 0.6 * half)};
    const double yaw = rng.uniform(0.0, kTwoPi);
    if (rng.bernoulli(0.4)) {
        const double opening = rng.uniform(kOpeningMin, kOpeningMax);
        const double depth = rng.uniform(kDepthMin, kDepthMax);
        return make_ushape(center, opening, depth, thickness, yaw);
    }
    return make_line(center, rng.uniform(diff.min_size, diff.max_size), thickness, yaw);
}

bool inside_strictly(const Box2& bounds, const OrientedRect& r) {
    const auto corners = r.corners();
    return std::all_of(corners.begin(), corners.end(),
                       [&](const Vec2& c) { return bounds.strictly_contains(c); });
}

double clearance(const std::vector<OrientedRect>& obstacles, const Vec2& p) {
    double best = std::numeric_limits<double>::infinity();
    for (const auto& o : obstacles) best = std::min(best, o.distance_to(p));
    return best;
}

Box2 search_region_for(Rng& rng, const Vec2& victim, const Box2& bounds, double size) {
    const double h = 0.5 * size;
    const double slack = 0.25 * size;
    Vec2 c{victim.x + rng.uniform(-slack, slack), victim.y + rng.uniform(-slack, slack)};
    c.x = std::clamp(c.x, bounds.min.x + h, bounds.max.x - h);
    c.y = std::clamp(c.y, bounds.min.y + h, bounds.max.y - h);
    return Box2::centered(c, h, h);
}

json vec_json(const Vec2& v) { return json::array({v.x, v.y}); }

Vec2 vec_from(const json& j) {
    if (!j.is_array() || j.size() != 2) throw ConfigError("expected [x, y] pair");
    return {j.at(0).get<double>(), j.at(1).get<double>()};
}

json box_json(const Box2& b) { return {{"min", vec_json(b.min)}, {"max", vec_json(b.max)}}; }

Box2 box_from(const json& j) { return {vec_from(j.at("min")), vec_from(j.at("max"))}; }

}  // namespace

DifficultyLevel DifficultyLevel::easy() { return {Difficulty::Easy, 2, 4, 6.0, 14.0}; }
DifficultyLevel DifficultyLevel::hard() { return {Difficulty::Hard, 5, 8, 8.0, 18.0}; }
DifficultyLevel DifficultyLevel::preset(Difficulty d) { return d == Difficulty::Hard ? hard() : easy(); }

WorldSpec generate_world(std::uint64_t seed, const DifficultyLevel& difficulty, Template templ,
                         const GenerationParams& params) {
    if (difficulty.min_count < 0 || difficulty.max_count < difficulty.min_count ||
        !(difficulty.min_size > 0.0) || difficulty.max_size < difficulty.min_size) {
        throw ConfigError("malformed difficulty level");
    }
    Rng rng = Rng::derive(seed, 0x776f726c64ULL);
    const double h = params.half_extent;
    const double t = params.wall_thickness;
    const Box2 bounds{{-h, -h}, {h, h}};

    for (int attempt = 0; attempt < params.max_attempts; ++attempt) {
        WorldSpec w;
        w.bounds = bounds;
        w.seed = seed;
        w.spawn_center = {rng.uniform(-0.2 * h, 0.2 * h), rng.uniform(0.37 * h, 0.48 * h)};
        const Vec2 victim{rng.uniform(-0.2 * h, 0.2 * h), rng.uniform(-0.48 * h, -0.37 * h)};
        w.spawn_heading = (victim - w.spawn_center).bearing();

        // Primary structure straddles the spawn-victim line: the hardware scenarios.
        Template primary = templ;
        if (templ == Template::Mixed) primary = rng.bernoulli(0.5) ? Template::UShape : Template::Line;
        const double along = rng.uniform(0.4, 0.6);
        const Vec2 mid = w.spawn_center + (victim - w.spawn_center) * along;
        Structure main;
        if (primary == Template::Line) {
            const double length = rng.uniform(20.0, 35.0);
            const Vec2 c{mid.x + rng.uniform(-0.25, 0.25) * length, mid.y};
            main = make_line(c, length, t, 0.0);
        } else {
            const double opening = rng.uniform(kOpeningMin, kOpeningMax);
            const double depth = rng.uniform(kDepthMin, kDepthMax);
            const Vec2 c{mid.x + rng.uniform(-0.2, 0.2) * opening, mid.y};
            main = make_ushape(c, opening, depth, t, 0.0);
        }
        w.obstacles = main.parts;

        const auto count = rng.uniform_int(difficulty.min_count, difficulty.max_count);
        for (std::int64_t i = 0; i < count; ++i) {
            // clutter is drawn until it clears the spawn; a bounded number of redraws
            for (int redraw = 0; redraw < 20; ++redraw) {
                Structure s = random_clutter(rng, difficulty, t, h);
                if (clearance(s.parts, w.spawn_center) < params.spawn_clearance) continue;
                if (clearance(s.parts, victim) < params.victim_clearance + params.inflation) continue;
                w.obstacles.insert(w.obstacles.end(), s.parts.begin(), s.parts.end());
                break;
            }
        }
        w.victims = {victim};
        w.search_region = search_region_for(rng, victim, bounds, params.search_region_size);

        if (validate(w, 2.0 * params.inflation)) continue;
        if (clearance(w.obstacles, w.spawn_center) < params.spawn_clearance) continue;
        if (clearance(w.obstacles, victim) < params.victim_clearance + params.inflation) continue;

        const TruthGrid grid = rasterize(w, params.resolution, params.inflation);
        const CellIndex start = grid.geometry.world_to_cell(w.spawn_center);
        const CellIndex goal = grid.geometry.world_to_cell(victim);
        if (grid.is_occupied(start) || grid.is_occupied(goal)) continue;
        if (flood_fill(grid, start)[grid.geometry.index(goal)] == 0) continue;
        return w;
    }
    throw GenerationFailed("no reachable victim placement after " +
                           std::to_string(params.max_attempts) + " attempts");
}

TruthGrid rasterize(const WorldSpec& world, double resolution, double inflation) {
    TruthGrid grid;
    grid.geometry = GridGeometry::covering(world.bounds, resolution);
    grid.occupied.assign(grid.geometry.cell_count(), 0);
    for (const auto& obstacle : world.obstacles) {
        const auto range = grid.geometry.cells_overlapping(obstacle.bounding_box(inflation));
        if (range.empty()) continue;
        for (int y = range.y0; y <= range.y1; ++y) {
            for (int x = range.x0; x <= range.x1; ++x) {
                const CellIndex c{x, y};
                const auto idx = grid.geometry.index(c);
                if (grid.occupied[idx] == 0 && obstacle.contains(grid.geometry.cell_center(c), inflation)) {
                    grid.occupied[idx] = 1;
                }
            }
        }
    }
    return grid;
}

std::vector<std::uint8_t> flood_fill(const TruthGrid& grid, CellIndex start) {
    const auto& geo = grid.geometry;
    std::vector<std::uint8_t> reached(geo.cell_count(), 0);
    if (!geo.in_bounds(start) || grid.is_occupied(start)) return reached;
    std::vector<CellIndex> stack{start};
    reached[geo.index(start)] = 1;
    constexpr int dx[] = {1, -1, 0, 0};
    constexpr int dy[] = {0, 0, 1, -1};
    while (!stack.empty()) {
        const CellIndex c = stack.back();
        stack.pop_back();
        for (int k = 0; k < 4; ++k) {
            const CellIndex n{c.x + dx[k], c.y + dy[k]};
            if (!geo.in_bounds(n)) continue;
            const auto idx = geo.index(n);
            if (reached[idx] != 0 || grid.occupied[idx] != 0) continue;
            reached[idx] = 1;
            stack.push_back(n);
        }
    }
    return reached;
}

std::optional<std::string> validate(const WorldSpec& world, double footprint_diameter) {
    if (world.bounds.empty()) return "bounds are empty";
    for (std::size_t i = 0; i < world.obstacles.size(); ++i) {
        const auto& o = world.obstacles[i];
        if (!(o.size.x > 0.0 && o.size.y > 0.0)) return "obstacle " + std::to_string(i) + " has no area";
        if (!inside_strictly(world.bounds, o)) return "obstacle " + std::to_string(i) + " leaves bounds";
    }
    for (std::size_t i = 0; i < world.victims.size(); ++i) {
        const auto& v = world.victims[i];
        if (!world.bounds.strictly_contains(v)) return "victim " + std::to_string(i) + " leaves bounds";
        for (const auto& o : world.obstacles) {
            if (o.contains(v)) return "victim " + std::to_string(i) + " inside an obstacle";
        }
    }
    if (!world.bounds.strictly_contains(world.spawn_center)) return "spawn leaves bounds";
    if (clearance(world.obstacles, world.spawn_center) < footprint_diameter) {
        return "spawn closer than one footprint diameter to an obstacle";
    }
    return std::nullopt;
}

std::string to_json(const WorldSpec& world, int indent) {
    json obstacles = json::array();
    for (const auto& o : world.obstacles) {
        obstacles.push_back({{"center", vec_json(o.center)}, {"size", vec_json(o.size)}, {"yaw", o.yaw}});
    }
    json victims = json::array();
    for (const auto& v : world.victims) victims.push_back(vec_json(v));
    const json doc = {
        {"schema_version", 1},
        {"units", {{"length", "m"}, {"angle", "rad"}}},
        {"frame", "ENU"},
        {"seed", world.seed},
        {"bounds", box_json(world.bounds)},
        {"spawn", {{"center", vec_json(world.spawn_center)}, {"heading", world.spawn_heading}}},
        {"search_region", box_json(world.search_region)},
        {"obstacles", std::move(obstacles)},
        {"victims", std::move(victims)},
    };
    return doc.dump(indent);
}

WorldSpec from_json(std::string_view text) {
    try {
        const json doc = json::parse(text);
        if (doc.at("schema_version").get<int>() != 1) throw ConfigError("unsupported world schema_version");
        const json& units = doc.at("units");
        if (units.at("length") != "m" || units.at("angle") != "rad") {
            throw ConfigError("world files must use meters and radians");
        }
        WorldSpec w;
        w.seed = doc.value("seed", std::uint64_t{0});
        w.bounds = box_from(doc.at("bounds"));
        w.spawn_center = vec_from(doc.at("spawn").at("center"));
        w.spawn_heading = doc.at("spawn").value("heading", 0.0);
        for (const auto& o : doc.at("obstacles")) {
            w.obstacles.push_back({vec_from(o.at("center")), vec_from(o.at("size")), o.value("yaw", 0.0)});
        }
        for (const auto& v : doc.at("victims")) w.victims.push_back(vec_from(v));
        w.search_region = doc.contains("search_region") ? box_from(doc.at("search_region")) : w.bounds;
        return w;
    } catch (const json::exception& e) {
        throw ConfigError(std::string("malformed world document: ") + e.what());
    }
}

void save(const WorldSpec& world, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot write " + path);
    out << to_json(world) << '\n';
}

WorldSpec load(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot read " + path);
    std::stringstream buffer;
    buffer << in.rdbuf();
    return from_json(buffer.str());
}

std::string_view to_string(Template t) noexcept {
    switch (t) {
        case Template::UShape: return "ushape";
        case Template::Line: return "line";
        case Template::Mixed: return "mixed";
    }
    return "?";
}

std::string_view to_string(Difficulty d) noexcept { return d == Difficulty::Hard ? "hard" : "easy"; }

Template parse_template(std::string_view s) {
    if (s == "ushape" || s == "u" || s == "UShape") return Template::UShape;
    if (s == "line" || s == "Line") return Template::Line;
    if (s == "mixed" || s == "Mixed") return Template::Mixed;
    throw ConfigError("unknown template '" + std::string(s) + "'");
}

Difficulty parse_difficulty(std::string_view s) {
    if (s == "easy" || s == "Easy") return Difficulty::Easy;
    if (s == "hard" || s == "Hard") return Difficulty::Hard;
    throw ConfigError("unknown difficulty '" + std::string(s) + "'");
}

}  // namespace glide::worldgen
