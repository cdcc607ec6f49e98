// Batch execution of paired trials across settings and lambdas, aggregation
// into result tables, and the suite file format.

#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "glide/sim.hpp"
#include "glide/worldgen.hpp"

namespace glide::harness {

struct ScenarioSuite {
    std::string name{"scenario"};
    worldgen::Template templ{worldgen::Template::Mixed};
    worldgen::Difficulty difficulty{worldgen::Difficulty::Easy};
    std::vector<sim::Setting> settings{sim::Setting::GT, sim::Setting::Local, sim::Setting::GLIDE};
    std::vector<double> lambdas{1.0};
    int trial_count{10};
    std::uint64_t base_seed{1};
    double start_jitter{5.0};
    /// Trial i uses world seed base_seed + i; otherwise every trial shares base_seed.
    bool vary_world{true};
    /// Fixed world for every trial; generation is skipped.
    std::optional<worldgen::WorldSpec> fixture;
    worldgen::GenerationParams generation;
    /// Template for per-trial parameters; world, setting, lambda, seed and start are overwritten.
    sim::TrialConfig trial;
};

/// @throws ConfigError when an invariant is violated.
void validate(const ScenarioSuite& suite);

struct TrialRecord {
    std::string scenario;
    sim::Setting setting{sim::Setting::GLIDE};
    double lambda{1.0};
    int trial{0};
    std::uint64_t world_seed{0};
    std::uint64_t seed{0};
    Vec2 start;
    sim::TrialResult result;
};

struct AggregateRow {
    std::string scenario;
    sim::Setting setting{sim::Setting::GLIDE};
    double lambda{1.0};
    std::optional<double> mean_duration;   ///< over successful trials; empty when none succeeded
    std::optional<double> mean_distance;
    double success_rate{0.0};              ///< percent
    int trial_count{0};
    int successes{0};
    std::optional<double> ci95_duration;   ///< 1.96 s / sqrt(n) over successful trials, n >= 2
};

struct SuiteOutcome {
    std::vector<AggregateRow> rows;
    std::vector<TrialRecord> trials;
    std::optional<std::string> skipped;    ///< set when world generation failed
};

struct RunOptions {
    int jobs{1};
    std::optional<std::filesystem::path> trajectory_dir;
};

/// World i and start pose i are shared by every (setting, lambda) pair.
/// Output order depends only on the suite, never on `jobs`.
[[nodiscard]] SuiteOutcome run_suite(const ScenarioSuite& suite, const RunOptions& options = {});

/// The inputs of trial `index`, as run_suite would build them.
/// @throws GenerationFailed
[[nodiscard]] sim::TrialConfig trial_config(const ScenarioSuite& suite, sim::Setting setting, double lambda, int index);

/// Groups by (scenario, setting, lambda) in first-seen order.
[[nodiscard]] std::vector<AggregateRow> aggregate(const std::vector<TrialRecord>& trials);

enum class TableFormat { CSV, Markdown };

[[nodiscard]] std::string render_table(const std::vector<AggregateRow>& rows, TableFormat format);
/// @throws std::invalid_argument when rows is empty.
void emit_tables(const std::vector<AggregateRow>& rows, TableFormat format, const std::filesystem::path& path);

[[nodiscard]] std::string to_json_line(const TrialRecord& record);
[[nodiscard]] TrialRecord record_from_json(const std::string& line);
[[nodiscard]] std::vector<TrialRecord> load_records(const std::filesystem::path& path);

/// Directional checks per scenario and lambda: success(GLIDE) >= success(Local)
/// and, where defined, distance GT <= GLIDE <= Local. Empty when all hold.
[[nodiscard]] std::vector<std::string> check_trends(const std::vector<AggregateRow>& rows);

/// Reads a TOML-style suite file. Top-level keys are defaults; each [section]
/// is one scenario named after it. A file without sections is one scenario.
/// @throws ConfigError
[[nodiscard]] std::vector<ScenarioSuite> load_suites(const std::filesystem::path& path);

}  // namespace glide::harness
