// glide: world generation, benchmark suites, result tables and trajectory replay.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "glide/errors.hpp"
#include "glide/harness.hpp"
#include "glide/mapping.hpp"
#include "glide/sim.hpp"
#include "glide/worldgen.hpp"

namespace fs = std::filesystem;
using namespace glide;

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitGeneration = 3;
constexpr int kExitCheck = 4;

fs::path default_out_dir() {
    if (const char* env = std::getenv("GLIDE_OUT_DIR"); env != nullptr && *env != '\0') return env;
    return "glide_out";
}

void write_file(const fs::path& path, const std::string& content) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot write " + path.string());
    out << content;
}

struct GenArgs {
    std::string templ{"mixed"};
    std::string difficulty{"easy"};
    std::uint64_t seed{1};
    int count{1};
    std::optional<std::string> out;
    bool snapshot{false};
};

int run_gen(const GenArgs& a) {
    const auto templ = worldgen::parse_template(a.templ);
    const auto level = worldgen::DifficultyLevel::preset(worldgen::parse_difficulty(a.difficulty));
    const fs::path dir = a.out ? fs::path(*a.out) : default_out_dir() / "worlds";
    fs::create_directories(dir);
    for (int i = 0; i < a.count; ++i) {
        const std::uint64_t seed = a.seed + static_cast<std::uint64_t>(i);
        const auto world = worldgen::generate_world(seed, level, templ);
        const auto stem = dir / ("world_" + std::to_string(seed));
        worldgen::save(world, stem.string() + ".json");
        if (a.snapshot) {
            const worldgen::GenerationParams gp;
            auto belief = mapping::new_belief(world.bounds, gp.resolution);
            mapping::apply_full_truth(belief, worldgen::rasterize(world, gp.resolution, gp.inflation));
            mapping::export_snapshot(belief, stem.string());
        }
        std::cout << stem.string() << ".json\n";
    }
    return 0;
}

struct RunArgs {
    std::string suite;
    std::vector<std::string> settings;
    std::vector<double> lambdas;
    std::optional<int> trials;
    std::optional<std::uint64_t> seed;
    int jobs{1};
    std::optional<std::string> out;
    bool check{false};
    bool trajectories{false};
};

std::vector<harness::ScenarioSuite> suites_with_overrides(const RunArgs& a) {
    auto suites = harness::load_suites(a.suite);
    for (auto& s : suites) {
        if (!a.settings.empty()) {
            s.settings.clear();
            for (const auto& x : a.settings) s.settings.push_back(sim::parse_setting(x));
        }
        if (!a.lambdas.empty()) s.lambdas = a.lambdas;
        if (a.trials) s.trial_count = *a.trials;
        if (a.seed) s.base_seed = *a.seed;
        harness::validate(s);
    }
    return suites;
}

int run_run(const RunArgs& a) {
    const auto suites = suites_with_overrides(a);
    const fs::path dir = a.out ? fs::path(*a.out) : default_out_dir();
    fs::create_directories(dir);

    std::vector<harness::TrialRecord> trials;
    std::vector<harness::AggregateRow> rows;
    bool skipped = false;
    for (const auto& s : suites) {
        harness::RunOptions opts;
        opts.jobs = a.jobs;
        if (a.trajectories) opts.trajectory_dir = dir / "trajectories";
        auto outcome = harness::run_suite(s, opts);
        if (outcome.skipped) {
            std::cerr << "skipped " << *outcome.skipped << '\n';
            skipped = true;
            continue;
        }
        trials.insert(trials.end(), outcome.trials.begin(), outcome.trials.end());
        rows.insert(rows.end(), outcome.rows.begin(), outcome.rows.end());
    }

    std::string jsonl;
    for (const auto& t : trials) jsonl += harness::to_json_line(t) + "\n";
    write_file(dir / "results.jsonl", jsonl);
    if (!rows.empty()) {
        harness::emit_tables(rows, harness::TableFormat::CSV, dir / "aggregate.csv");
        harness::emit_tables(rows, harness::TableFormat::Markdown, dir / "aggregate.md");
        std::cout << harness::render_table(rows, harness::TableFormat::Markdown);
    }
    if (skipped) return kExitGeneration;
    if (a.check) {
        const auto violations = harness::check_trends(rows);
        for (const auto& v : violations) std::cerr << "check failed: " << v << '\n';
        if (!violations.empty()) return kExitCheck;
    }
    return 0;
}

struct TableArgs {
    std::string results;
    std::string format{"md"};
    std::optional<std::string> out;
};

int run_table(const TableArgs& a) {
    const auto rows = harness::aggregate(harness::load_records(a.results));
    if (rows.empty()) throw ConfigError("no trial records in " + a.results);
    harness::TableFormat fmt;
    if (a.format == "csv") {
        fmt = harness::TableFormat::CSV;
    } else if (a.format == "md" || a.format == "markdown") {
        fmt = harness::TableFormat::Markdown;
    } else {
        throw ConfigError("unknown table format '" + a.format + "'");
    }
    if (a.out) {
        harness::emit_tables(rows, fmt, *a.out);
    } else {
        std::cout << harness::render_table(rows, fmt);
    }
    return 0;
}

struct ReplayArgs {
    std::string suite;
    std::optional<std::string> scenario;
    std::string setting{"GLIDE"};
    double lambda{1.0};
    int trial{0};
    std::optional<std::string> out;
};

int run_replay(const ReplayArgs& a) {
    const auto suites = harness::load_suites(a.suite);
    const harness::ScenarioSuite* chosen = nullptr;
    for (const auto& s : suites) {
        if (!a.scenario || s.name == *a.scenario) {
            chosen = &s;
            break;
        }
    }
    if (chosen == nullptr) throw ConfigError("no scenario named '" + a.scenario.value_or("") + "'");
    if (a.trial < 0 || a.trial >= chosen->trial_count) throw ConfigError("trial index out of range");
    const auto cfg = harness::trial_config(*chosen, sim::parse_setting(a.setting), a.lambda, a.trial);
    sim::TrialResult result;
    if (a.out) {
        const fs::path p(*a.out);
        if (p.has_parent_path()) fs::create_directories(p.parent_path());
        std::ofstream out(p);
        result = sim::run_trial(cfg, &out);
    } else {
        result = sim::run_trial(cfg, &std::cout);
    }
    std::cerr << sim::to_json(result) << '\n';
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Cooperative UAV-UGV search-and-rescue simulator and benchmark harness"};
    app.require_subcommand(1);

    GenArgs gen;
    auto* gen_cmd = app.add_subcommand("gen", "Generate benchmark worlds");
    gen_cmd->add_option("--template", gen.templ, "ushape | line | mixed")->capture_default_str();
    gen_cmd->add_option("--difficulty", gen.difficulty, "easy | hard")->capture_default_str();
    gen_cmd->add_option("--seed", gen.seed, "First world seed")->capture_default_str();
    gen_cmd->add_option("--count", gen.count, "Number of consecutive seeds")->check(CLI::PositiveNumber);
    gen_cmd->add_option("--out", gen.out, "Output directory (default $GLIDE_OUT_DIR/worlds)");
    gen_cmd->add_flag("--snapshot", gen.snapshot, "Also write a PGM raster of each world");

    RunArgs run;
    auto* run_cmd = app.add_subcommand("run", "Run a benchmark suite");
    run_cmd->add_option("--suite", run.suite, "Suite file")->required()->check(CLI::ExistingFile);
    run_cmd->add_option("--setting", run.settings, "Restrict to settings (GT, Local, GLIDE)");
    run_cmd->add_option("--lambda", run.lambdas, "Override heuristic weights");
    run_cmd->add_option("--trials", run.trials, "Override trial count")->check(CLI::PositiveNumber);
    run_cmd->add_option("--seed", run.seed, "Override base seed");
    run_cmd->add_option("--jobs", run.jobs, "Worker threads")->check(CLI::PositiveNumber)->capture_default_str();
    run_cmd->add_option("--out", run.out, "Output directory (default $GLIDE_OUT_DIR)");
    run_cmd->add_flag("--check", run.check, "Exit 4 when a directional trend is violated");
    run_cmd->add_flag("--trajectories", run.trajectories, "Write per-trial trajectory logs");

    TableArgs table;
    auto* table_cmd = app.add_subcommand("table", "Aggregate a results.jsonl file");
    table_cmd->add_option("results", table.results, "results.jsonl")->required()->check(CLI::ExistingFile);
    table_cmd->add_option("--format", table.format, "csv | md")->capture_default_str();
    table_cmd->add_option("--out", table.out, "Output file (default stdout)");

    ReplayArgs replay;
    auto* replay_cmd = app.add_subcommand("replay", "Re-run one trial and emit its trajectory");
    replay_cmd->add_option("--suite", replay.suite, "Suite file")->required()->check(CLI::ExistingFile);
    replay_cmd->add_option("--scenario", replay.scenario, "Scenario name (default first)");
    replay_cmd->add_option("--setting", replay.setting, "GT | Local | GLIDE")->capture_default_str();
    replay_cmd->add_option("--lambda", replay.lambda, "Heuristic weight")->capture_default_str();
    replay_cmd->add_option("--trial", replay.trial, "Trial index")->capture_default_str();
    replay_cmd->add_option("--out", replay.out, "Trajectory file (default stdout)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitConfig;
    }

    try {
        if (*gen_cmd) return run_gen(gen);
        if (*run_cmd) return run_run(run);
        if (*table_cmd) return run_table(table);
        if (*replay_cmd) return run_replay(replay);
    } catch (const GenerationFailed& e) {
        std::cerr << "generation failed: " << e.what() << '\n';
        return kExitGeneration;
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
