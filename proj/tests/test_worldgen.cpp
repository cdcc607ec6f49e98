#include "glide/worldgen.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>

#include "glide/errors.hpp"
#include "glide/random.hpp"
#include "oracles.hpp"

namespace glide::worldgen {
namespace {

WorldSpec empty_world(double half = 10.0) {
    WorldSpec w;
    w.bounds = {{-half, -half}, {half, half}};
    w.spawn_center = {0.0, half / 2};
    w.victims = {{0.0, -half / 2}};
    w.search_region = Box2::centered(w.victims[0], 4.0, 4.0);
    return w;
}

TEST(GenerateWorld, EasyLineHasBarrierAcrossTheRoute) {
    const WorldSpec w = generate_world(1, DifficultyLevel::easy(), Template::Line);
    ASSERT_FALSE(w.obstacles.empty());
    ASSERT_EQ(w.victims.size(), 1u);
    const OrientedRect& barrier = w.obstacles.front();
    EXPECT_EQ(barrier.yaw, 0.0);
    EXPECT_GT(barrier.size.x, barrier.size.y);
    const Vec2 victim = w.victims.front();
    EXPECT_GT(w.spawn_center.y, barrier.center.y);
    EXPECT_LT(victim.y, barrier.center.y);
    // the straight spawn-victim segment is blocked by the barrier
    EXPECT_EQ(segment_distance(barrier, w.spawn_center, victim), 0.0);
}

TEST(GenerateWorld, SameSeedSameWorld) {
    for (const Template t : {Template::UShape, Template::Line, Template::Mixed}) {
        for (const auto& level : {DifficultyLevel::easy(), DifficultyLevel::hard()}) {
            EXPECT_EQ(generate_world(42, level, t), generate_world(42, level, t));
        }
    }
}

TEST(GenerateWorld, DifferentSeedsDiffer) {
    EXPECT_NE(generate_world(1, DifficultyLevel::easy(), Template::Mixed),
              generate_world(2, DifficultyLevel::easy(), Template::Mixed));
}

TEST(GenerateWorld, UShapeVictimReachableByFloodFill) {
    const WorldSpec w = generate_world(2, DifficultyLevel::easy(), Template::UShape);
    ASSERT_GE(w.obstacles.size(), 3u);
    const TruthGrid grid = rasterize(w, 0.5);
    const auto reach = oracle::reachable(grid, grid.geometry.world_to_cell(w.spawn_center));
    EXPECT_TRUE(reach[grid.geometry.index(grid.geometry.world_to_cell(w.victims[0]))]);
}

TEST(GenerateWorld, EveryWorldReachableAndValid) {
    for (std::uint64_t seed = 0; seed < 30; ++seed) {
        const auto level = seed % 2 == 0 ? DifficultyLevel::easy() : DifficultyLevel::hard();
        const WorldSpec w = generate_world(seed, level, Template::Mixed);
        EXPECT_FALSE(validate(w).has_value()) << "seed " << seed;
        const TruthGrid grid = rasterize(w, 0.5);
        EXPECT_EQ(grid.geometry.width(), 300);
        EXPECT_EQ(grid.geometry.height(), 300);
        const auto reach = oracle::reachable(grid, grid.geometry.world_to_cell(w.spawn_center));
        for (const auto& v : w.victims) {
            EXPECT_TRUE(reach[grid.geometry.index(grid.geometry.world_to_cell(v))]) << "seed " << seed;
        }
    }
}

TEST(GenerateWorld, FloodFillMatchesOracle) {
    const WorldSpec w = generate_world(5, DifficultyLevel::hard(), Template::Mixed);
    const TruthGrid grid = rasterize(w, 0.5);
    const CellIndex start = grid.geometry.world_to_cell(w.spawn_center);
    EXPECT_EQ(flood_fill(grid, start), oracle::reachable(grid, start));
}

TEST(GenerateWorld, ImpossibleBudgetFails) {
    GenerationParams p;
    p.max_attempts = 1;
    p.spawn_clearance = 1000.0;
    EXPECT_THROW((void)generate_world(1, DifficultyLevel::easy(), Template::Line, p), GenerationFailed);
}

TEST(GenerateWorld, MalformedDifficultyRejected) {
    DifficultyLevel bad = DifficultyLevel::easy();
    bad.max_count = bad.min_count - 1;
    EXPECT_THROW((void)generate_world(1, bad, Template::Line), ConfigError);
}

TEST(Rasterize, EmptyWorldAllFree) {
    const TruthGrid grid = rasterize(empty_world(), 0.5);
    EXPECT_EQ(grid.geometry.width(), 40);
    EXPECT_EQ(grid.occupied_count(), 0u);
}

TEST(Rasterize, AxisAlignedBlock) {
    WorldSpec w = empty_world();
    w.obstacles = {{{0.0, 0.0}, {10.0, 2.0}, 0.0}};
    const TruthGrid grid = rasterize(w, 0.5, 0.0);
    EXPECT_EQ(grid.occupied_count(), 80u);
    for (int y = 0; y < grid.geometry.height(); ++y) {
        for (int x = 0; x < grid.geometry.width(); ++x) {
            const bool inside = x >= 10 && x < 30 && y >= 18 && y < 22;
            EXPECT_EQ(grid.is_occupied({x, y}), inside) << x << "," << y;
        }
    }
}

TEST(Rasterize, RotatedObstacleMatchesPolygonOracle) {
    WorldSpec w = empty_world();
    w.obstacles = {{{0.3, -0.7}, {9.0, 2.5}, kPi / 4}};
    for (const double inflation : {0.0, 1.5}) {
        const TruthGrid grid = rasterize(w, 0.5, inflation);
        EXPECT_EQ(grid.occupied, oracle::rasterize(w, 0.5, inflation)) << "inflation " << inflation;
    }
}

TEST(Rasterize, RandomWorldsMatchOracle) {
    Rng rng(99);
    for (int i = 0; i < 100; ++i) {
        WorldSpec w = empty_world(12.0);
        const int n = static_cast<int>(rng.uniform_int(1, 4));
        for (int k = 0; k < n; ++k) {
            w.obstacles.push_back({{rng.uniform(-10, 10), rng.uniform(-10, 10)},
                                   {rng.uniform(0.5, 8), rng.uniform(0.5, 3)},
                                   rng.uniform(-kPi, kPi)});
        }
        const double inflation = rng.uniform(0.0, 1.5);
        EXPECT_EQ(rasterize(w, 0.5, inflation).occupied, oracle::rasterize(w, 0.5, inflation)) << "world " << i;
    }
}

TEST(WorldFile, JsonRoundTrip) {
    const WorldSpec w = generate_world(11, DifficultyLevel::hard(), Template::Mixed);
    EXPECT_EQ(from_json(to_json(w)), w);
    const auto path = std::filesystem::temp_directory_path() / "glide_world_roundtrip.json";
    save(w, path.string());
    EXPECT_EQ(load(path.string()), w);
    std::filesystem::remove(path);
}

TEST(WorldFile, RejectsWrongSchemaAndGarbage) {
    std::string text = to_json(empty_world());
    const auto pos = text.find("\"schema_version\": 1");
    ASSERT_NE(pos, std::string::npos);
    text.replace(pos, 19, "\"schema_version\": 7");
    EXPECT_THROW((void)from_json(text), ConfigError);
    EXPECT_THROW((void)from_json("{not json"), ConfigError);
    EXPECT_THROW((void)load("/nonexistent/world.json"), ConfigError);
}

TEST(WorldFile, FixturesLoadAndValidate) {
    for (const char* name : {"u_shape.json", "serpentine.json"}) {
        const WorldSpec w = load(std::string(GLIDE_FIXTURE_DIR) + "/" + name);
        EXPECT_FALSE(validate(w).has_value()) << name;
    }
}

TEST(Validate, VictimInsideObstacleReported) {
    WorldSpec w = empty_world();
    w.obstacles = {{w.victims[0], {4.0, 4.0}, 0.0}};
    EXPECT_TRUE(validate(w).has_value());
}

TEST(Names, ParseAndPrint) {
    for (const Template t : {Template::UShape, Template::Line, Template::Mixed}) EXPECT_EQ(parse_template(to_string(t)), t);
    for (const Difficulty d : {Difficulty::Easy, Difficulty::Hard}) EXPECT_EQ(parse_difficulty(to_string(d)), d);
    EXPECT_THROW((void)parse_template("spiral"), ConfigError);
    EXPECT_THROW((void)parse_difficulty("brutal"), ConfigError);
}

}  // namespace
}  // namespace glide::worldgen
