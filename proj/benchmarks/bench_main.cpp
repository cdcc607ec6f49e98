#include <benchmark/benchmark.h>

#include <string>

#include "glide/mapping.hpp"
#include "glide/planner.hpp"
#include "glide/sim.hpp"
#include "glide/worldgen.hpp"

using namespace glide;

namespace {

worldgen::WorldSpec fixture(const std::string& name) {
    return worldgen::load(std::string(GLIDE_FIXTURE_DIR) + "/" + name + ".json");
}

mapping::OccupancyBelief truth_belief(const worldgen::WorldSpec& world) {
    auto belief = mapping::new_belief(world.bounds, 0.5);
    mapping::apply_full_truth(belief, worldgen::rasterize(world, 0.5));
    return belief;
}

void plan_on(benchmark::State& state, const worldgen::WorldSpec& world, const mapping::OccupancyBelief& belief) {
    const auto& geo = belief.geometry();
    const planner::PoseState start{geo.world_to_cell(world.spawn_center), planner::discretize_heading(world.spawn_heading)};
    const planner::Goal goal{world.victims.front(), planner::GoalKind::Victim, world.victims.front()};
    const planner::HeuristicParams params{static_cast<double>(state.range(0)) / 10.0};
    for (auto _ : state) {
        auto plan = planner::plan_path(belief, start, goal, params);
        benchmark::DoNotOptimize(plan);
    }
}

void BM_PlanEmptyGrid(benchmark::State& state) {
    auto world = fixture("u_shape");
    world.obstacles.clear();
    plan_on(state, world, truth_belief(world));
}
BENCHMARK(BM_PlanEmptyGrid)->Arg(0)->Arg(10)->Arg(25)->Unit(benchmark::kMillisecond);

void BM_PlanUShapeTruth(benchmark::State& state) {
    const auto world = fixture("u_shape");
    plan_on(state, world, truth_belief(world));
}
BENCHMARK(BM_PlanUShapeTruth)->Arg(0)->Arg(10)->Arg(25)->Unit(benchmark::kMillisecond);

void BM_PlanSerpentineTruth(benchmark::State& state) {
    const auto world = fixture("serpentine");
    plan_on(state, world, truth_belief(world));
}
BENCHMARK(BM_PlanSerpentineTruth)->Arg(0)->Arg(10)->Unit(benchmark::kMillisecond);

void BM_Rasterize(benchmark::State& state) {
    const auto world = worldgen::generate_world(7, worldgen::DifficultyLevel::hard(), worldgen::Template::Mixed);
    for (auto _ : state) {
        auto grid = worldgen::rasterize(world, 0.5);
        benchmark::DoNotOptimize(grid);
    }
}
BENCHMARK(BM_Rasterize)->Unit(benchmark::kMillisecond);

void BM_GenerateWorld(benchmark::State& state) {
    std::uint64_t seed = 1;
    for (auto _ : state) {
        auto world = worldgen::generate_world(seed++, worldgen::DifficultyLevel::hard(), worldgen::Template::Mixed);
        benchmark::DoNotOptimize(world);
    }
}
BENCHMARK(BM_GenerateWorld)->Unit(benchmark::kMillisecond);

void BM_TrialGlideHard(benchmark::State& state) {
    sim::TrialConfig cfg;
    cfg.world = worldgen::generate_world(201, worldgen::DifficultyLevel::hard(), worldgen::Template::Mixed);
    cfg.setting = sim::Setting::GLIDE;
    for (auto _ : state) {
        auto result = sim::run_trial(cfg);
        benchmark::DoNotOptimize(result);
    }
}
BENCHMARK(BM_TrialGlideHard)->Unit(benchmark::kMillisecond);

void BM_TrialGlideSerpentine(benchmark::State& state) {
    sim::TrialConfig cfg;
    cfg.world = fixture("serpentine");
    cfg.setting = sim::Setting::GLIDE;
    for (auto _ : state) {
        auto result = sim::run_trial(cfg);
        benchmark::DoNotOptimize(result);
    }
}
BENCHMARK(BM_TrialGlideSerpentine)->Unit(benchmark::kMillisecond)->Iterations(1);

}  // namespace

BENCHMARK_MAIN();
