#include "glide/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <fstream>
#include <limits>
#include <map>
#include <mutex>
#include <sstream>
#include <stdexcept>
#include <thread>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "glide/errors.hpp"
#include "glide/random.hpp"

namespace glide::harness {

void validate(const ScenarioSuite& s) {
    if (s.name.empty()) throw ConfigError("scenario name is empty");
    if (s.trial_count < 1) throw ConfigError("trial_count must be at least 1");
    if (s.lambdas.empty()) throw ConfigError("lambdas must be nonempty");
    if (s.settings.empty()) throw ConfigError("settings must be nonempty");
    if (s.start_jitter < 0.0) throw ConfigError("start_jitter must be non-negative");
    for (double l : s.lambdas) {
        if (!(l >= 0.0)) throw ConfigError("lambda must be non-negative");
    }
}

namespace {

constexpr std::uint64_t kJitterSalt = 0x6a6974746572ULL;

worldgen::WorldSpec world_for(const ScenarioSuite& s, int index) {
    if (s.fixture) return *s.fixture;
    const std::uint64_t seed = s.vary_world ? s.base_seed + static_cast<std::uint64_t>(index) : s.base_seed;
    return worldgen::generate_world(seed, worldgen::DifficultyLevel::preset(s.difficulty), s.templ, s.generation);
}

std::uint64_t world_seed_for(const ScenarioSuite& s, int index) {
    if (s.fixture) return s.fixture->seed;
    return s.vary_world ? s.base_seed + static_cast<std::uint64_t>(index) : s.base_seed;
}

sim::TrialConfig make_config(const ScenarioSuite& s, const worldgen::WorldSpec& world, sim::Setting setting,
                             double lambda, int index) {
    sim::TrialConfig c = s.trial;
    c.world = world;
    c.setting = setting;
    c.heuristic.lambda = lambda;
    c.seed = s.base_seed + static_cast<std::uint64_t>(index);
    Rng rng = Rng::derive(c.seed, kJitterSalt);
    const double dx = rng.uniform(-s.start_jitter, s.start_jitter);
    const double dy = rng.uniform(-s.start_jitter, s.start_jitter);
    c.start_position = world.spawn_center + Vec2{dx, dy};
    c.start_heading = world.spawn_heading;
    return c;
}

std::string format_lambda(double l) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", l);
    return buf;
}

std::string trajectory_name(const std::string& scenario, sim::Setting setting, double lambda, int index) {
    return scenario + "_" + std::string(sim::to_string(setting)) + "_l" + format_lambda(lambda) + "_t" +
           std::to_string(index) + ".jsonl";
}

}  // namespace

sim::TrialConfig trial_config(const ScenarioSuite& suite, sim::Setting setting, double lambda, int index) {
    validate(suite);
    return make_config(suite, world_for(suite, index), setting, lambda, index);
}

SuiteOutcome run_suite(const ScenarioSuite& suite, const RunOptions& options) {
    validate(suite);
    SuiteOutcome outcome;

    std::vector<worldgen::WorldSpec> worlds;
    worlds.reserve(static_cast<std::size_t>(suite.trial_count));
    try {
        for (int i = 0; i < suite.trial_count; ++i) worlds.push_back(world_for(suite, i));
    } catch (const GenerationFailed& e) {
        outcome.skipped = suite.name + ": " + e.what();
        return outcome;
    }

    struct Task {
        sim::Setting setting;
        double lambda;
        int index;
    };
    std::vector<Task> tasks;
    for (auto setting : suite.settings) {
        // lambda only affects the planner, but GT/Local rows are still reported per lambda
        for (double lambda : suite.lambdas) {
            for (int i = 0; i < suite.trial_count; ++i) tasks.push_back({setting, lambda, i});
        }
    }

    if (options.trajectory_dir) std::filesystem::create_directories(*options.trajectory_dir);

    std::vector<TrialRecord> records(tasks.size());
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    auto worker = [&] {
        for (std::size_t k = next++; k < tasks.size(); k = next++) {
            try {
                const Task& task = tasks[k];
                const auto& world = worlds[static_cast<std::size_t>(task.index)];
                const sim::TrialConfig cfg = make_config(suite, world, task.setting, task.lambda, task.index);
                sim::TrialResult result;
                if (options.trajectory_dir) {
                    std::ofstream out(*options.trajectory_dir /
                                      trajectory_name(suite.name, task.setting, task.lambda, task.index));
                    result = sim::run_trial(cfg, &out);
                } else {
                    result = sim::run_trial(cfg);
                }
                records[k] = {suite.name, task.setting, task.lambda, task.index, world_seed_for(suite, task.index),
                              cfg.seed, *cfg.start_position, result};
            } catch (...) {
                const std::lock_guard lock(failure_mutex);
                if (!failure) failure = std::current_exception();
                next = tasks.size();
            }
        }
    };

    const int jobs = std::max(1, std::min<int>(options.jobs, static_cast<int>(tasks.size())));
    if (jobs == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(static_cast<std::size_t>(jobs));
        for (int j = 0; j < jobs; ++j) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }
    if (failure) std::rethrow_exception(failure);

    outcome.rows = aggregate(records);
    outcome.trials = std::move(records);
    return outcome;
}

std::vector<AggregateRow> aggregate(const std::vector<TrialRecord>& trials) {
    std::vector<AggregateRow> rows;
    std::vector<std::vector<const TrialRecord*>> members;
    for (const auto& t : trials) {
        auto it = std::find_if(rows.begin(), rows.end(), [&](const AggregateRow& r) {
            return r.scenario == t.scenario && r.setting == t.setting && r.lambda == t.lambda;
        });
        if (it == rows.end()) {
            rows.push_back({t.scenario, t.setting, t.lambda, {}, {}, 0.0, 0, 0, {}});
            members.emplace_back();
            it = rows.end() - 1;
        }
        members[static_cast<std::size_t>(it - rows.begin())].push_back(&t);
    }
    for (std::size_t r = 0; r < rows.size(); ++r) {
        AggregateRow& row = rows[r];
        row.trial_count = static_cast<int>(members[r].size());
        double sum_d = 0.0;
        double sum_l = 0.0;
        std::vector<double> durations;
        for (const auto* t : members[r]) {
            if (!t->result.success) continue;
            durations.push_back(t->result.duration);
            sum_d += t->result.duration;
            sum_l += t->result.distance;
        }
        row.successes = static_cast<int>(durations.size());
        row.success_rate = row.trial_count > 0 ? 100.0 * row.successes / row.trial_count : 0.0;
        if (durations.empty()) continue;
        const double n = static_cast<double>(durations.size());
        row.mean_duration = sum_d / n;
        row.mean_distance = sum_l / n;
        if (durations.size() >= 2) {
            double ss = 0.0;
            for (double d : durations) ss += (d - *row.mean_duration) * (d - *row.mean_duration);
            row.ci95_duration = 1.96 * std::sqrt(ss / (n - 1.0)) / std::sqrt(n);
        }
    }
    return rows;
}

namespace {

std::string fixed2(const std::optional<double>& v) {
    if (!v) return "n/a";
    char buf[48];
    std::snprintf(buf, sizeof buf, "%.2f", *v);
    return buf;
}

std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + "\"";
}

}  // namespace

std::string render_table(const std::vector<AggregateRow>& rows, TableFormat format) {
    std::ostringstream out;
    if (format == TableFormat::CSV) {
        out << "Scenario,Setting,Lambda,Duration (s),Mean Distance (m),Success Rate (%),Trials,Successes,"
               "CI95 Duration (s)\n";
        for (const auto& r : rows) {
            out << csv_field(r.scenario) << ',' << sim::to_string(r.setting) << ',' << format_lambda(r.lambda) << ','
                << fixed2(r.mean_duration) << ',' << fixed2(r.mean_distance) << ',' << fixed2(r.success_rate) << ','
                << r.trial_count << ',' << r.successes << ',' << fixed2(r.ci95_duration) << '\n';
        }
        return out.str();
    }
    out << "| Scenario | Setting | λ | Duration (s) | Mean Distance (m) | Success Rate (%) | Trials |\n";
    out << "|---|---|---:|---:|---:|---:|---:|\n";
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const auto& r = rows[i];
        const bool first = i == 0 || rows[i - 1].scenario != r.scenario;
        if (first && i > 0) out << "|---|---|---|---|---|---|---|\n";
        std::string duration = fixed2(r.mean_duration);
        if (r.ci95_duration) duration += " ± " + fixed2(r.ci95_duration);
        out << "| " << (first ? r.scenario : "") << " | " << sim::to_string(r.setting) << " | "
            << format_lambda(r.lambda) << " | " << duration << " | " << fixed2(r.mean_distance) << " | "
            << fixed2(r.success_rate) << " | " << r.trial_count << " |\n";
    }
    out << "\nDuration and distance are means over successful trials only (± is a 95% interval); "
           "n/a marks rows without a success.\n";
    return out.str();
}

void emit_tables(const std::vector<AggregateRow>& rows, TableFormat format, const std::filesystem::path& path) {
    if (rows.empty()) throw std::invalid_argument("no aggregate rows to emit");
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot write " + path.string());
    out << render_table(rows, format);
}

std::string to_json_line(const TrialRecord& r) {
    nlohmann::ordered_json doc = {
        {"scenario", r.scenario},
        {"setting", sim::to_string(r.setting)},
        {"lambda", r.lambda},
        {"trial", r.trial},
        {"world_seed", r.world_seed},
        {"seed", r.seed},
        {"start", {r.start.x, r.start.y}},
    };
    const auto result = nlohmann::ordered_json::parse(sim::to_json(r.result));
    for (const auto& [key, value] : result.items()) doc[key] = value;
    return doc.dump();
}

TrialRecord record_from_json(const std::string& line) {
    try {
        const auto doc = nlohmann::json::parse(line);
        TrialRecord r;
        r.scenario = doc.at("scenario").get<std::string>();
        r.setting = sim::parse_setting(doc.at("setting").get<std::string>());
        r.lambda = doc.at("lambda").get<double>();
        r.trial = doc.at("trial").get<int>();
        r.world_seed = doc.at("world_seed").get<std::uint64_t>();
        r.seed = doc.at("seed").get<std::uint64_t>();
        r.start = {doc.at("start").at(0).get<double>(), doc.at("start").at(1).get<double>()};
        auto& res = r.result;
        res.success = doc.at("success").get<bool>();
        const auto term = doc.at("termination").get<std::string>();
        for (auto t : {sim::Termination::GoalReached, sim::Termination::Collision, sim::Termination::Timeout,
                       sim::Termination::Immobilized}) {
            if (sim::to_string(t) == term) res.termination = t;
        }
        res.duration = doc.at("duration").get<double>();
        res.distance = doc.at("distance").get<double>();
        res.replan_count = doc.at("replan_count").get<int>();
        const auto& link = doc.at("link");
        res.link_stats = {link.at("sent").get<std::uint64_t>(), link.at("delivered").get<std::uint64_t>(),
                          link.at("dropped").get<std::uint64_t>(), link.at("overflow").get<std::uint64_t>(),
                          link.at("queued_max").get<std::uint64_t>()};
        res.final_belief_coverage = doc.at("final_belief_coverage").get<double>();
        res.release_time = doc.at("release_time").get<double>();
        res.victims_confirmed = doc.at("victims_confirmed").get<int>();
        res.victims_reached = doc.at("victims_reached").get<int>();
        const auto& mc = doc.at("min_clearance");
        res.min_clearance = mc.is_null() ? std::numeric_limits<double>::infinity() : mc.get<double>();
        return r;
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("malformed trial record: ") + e.what());
    }
}

std::vector<TrialRecord> load_records(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read " + path.string());
    std::vector<TrialRecord> out;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty()) out.push_back(record_from_json(line));
    }
    return out;
}

std::vector<std::string> check_trends(const std::vector<AggregateRow>& rows) {
    std::vector<std::string> violations;
    auto find = [&](const std::string& scenario, double lambda, sim::Setting s) -> const AggregateRow* {
        for (const auto& r : rows) {
            if (r.scenario == scenario && r.lambda == lambda && r.setting == s) return &r;
        }
        return nullptr;
    };
    std::vector<std::pair<std::string, double>> groups;
    for (const auto& r : rows) {
        const std::pair<std::string, double> key{r.scenario, r.lambda};
        if (std::find(groups.begin(), groups.end(), key) == groups.end()) groups.push_back(key);
    }
    for (const auto& [scenario, lambda] : groups) {
        const auto* gt = find(scenario, lambda, sim::Setting::GT);
        const auto* local = find(scenario, lambda, sim::Setting::Local);
        const auto* glide = find(scenario, lambda, sim::Setting::GLIDE);
        const std::string where = scenario + " (lambda " + format_lambda(lambda) + "): ";
        if (glide && local && glide->success_rate < local->success_rate) {
            violations.push_back(where + "GLIDE success below Local");
        }
        if (gt && glide && gt->mean_distance && glide->mean_distance && *gt->mean_distance > *glide->mean_distance) {
            violations.push_back(where + "GT distance above GLIDE");
        }
        if (glide && local && glide->mean_distance && local->mean_distance &&
            *glide->mean_distance > *local->mean_distance) {
            violations.push_back(where + "GLIDE distance above Local");
        }
    }
    return violations;
}

namespace {

using Entries = std::vector<std::pair<std::string, std::vector<std::string>>>;

double as_double(const std::string& key, const std::vector<std::string>& v) {
    if (v.size() != 1) throw ConfigError("'" + key + "' expects one value");
    try {
        std::size_t used = 0;
        const double d = std::stod(v[0], &used);
        if (used != v[0].size()) throw std::invalid_argument(v[0]);
        return d;
    } catch (const std::exception&) {
        throw ConfigError("'" + key + "' is not a number: " + v[0]);
    }
}

std::int64_t as_int(const std::string& key, const std::vector<std::string>& v) {
    const double d = as_double(key, v);
    if (d != std::floor(d)) throw ConfigError("'" + key + "' must be an integer");
    return static_cast<std::int64_t>(d);
}

bool as_bool(const std::string& key, const std::vector<std::string>& v) {
    if (v.size() == 1 && (v[0] == "true" || v[0] == "1")) return true;
    if (v.size() == 1 && (v[0] == "false" || v[0] == "0")) return false;
    throw ConfigError("'" + key + "' must be true or false");
}

std::string as_string(const std::string& key, const std::vector<std::string>& v) {
    if (v.size() != 1) throw ConfigError("'" + key + "' expects one value");
    return v[0];
}

void apply(ScenarioSuite& s, const std::string& key, const std::vector<std::string>& v,
           const std::filesystem::path& base_dir) {
    auto& t = s.trial;
    if (key == "name") s.name = as_string(key, v);
    else if (key == "template") s.templ = worldgen::parse_template(as_string(key, v));
    else if (key == "difficulty") s.difficulty = worldgen::parse_difficulty(as_string(key, v));
    else if (key == "settings") {
        s.settings.clear();
        for (const auto& x : v) s.settings.push_back(sim::parse_setting(x));
    } else if (key == "lambdas") {
        s.lambdas.clear();
        for (const auto& x : v) s.lambdas.push_back(as_double(key, {x}));
    } else if (key == "trials") s.trial_count = static_cast<int>(as_int(key, v));
    else if (key == "base_seed") s.base_seed = static_cast<std::uint64_t>(as_int(key, v));
    else if (key == "start_jitter") s.start_jitter = as_double(key, v);
    else if (key == "vary_world") s.vary_world = as_bool(key, v);
    else if (key == "world") {
        std::filesystem::path p = as_string(key, v);
        if (p.is_relative()) p = base_dir / p;
        s.fixture = worldgen::load(p.string());
    } else if (key == "half_extent") s.generation.half_extent = as_double(key, v);
    else if (key == "tick") t.tick = as_double(key, v);
    else if (key == "timeout") t.timeout = as_double(key, v);
    else if (key == "goal_tolerance") t.goal_tolerance = as_double(key, v);
    else if (key == "local_window") t.local_window = as_double(key, v);
    else if (key == "reveal_extent") t.reveal_extent = as_double(key, v);
    else if (key == "lead_offset") t.scout.lead_offset = as_double(key, v);
    else if (key == "scout_altitude") t.scout.altitude = as_double(key, v);
    else if (key == "scout_head_start") t.scout_head_start = as_double(key, v);
    else if (key == "connect_range") t.link.connect_range = as_double(key, v);
    else if (key == "disconnect_range") t.link.disconnect_range = as_double(key, v);
    else if (key == "latency") t.link.latency = as_double(key, v);
    else if (key == "drop_probability") t.link.drop_probability = as_double(key, v);
    else if (key == "noise_sigma") t.detector.noise_sigma = as_double(key, v);
    else if (key == "resolution") {
        t.resolution = as_double(key, v);
        s.generation.resolution = t.resolution;
    } else if (key == "inflation") {
        t.inflation = as_double(key, v);
        s.generation.inflation = t.inflation;
    } else if (key == "footprint_radius") t.footprint_radius = as_double(key, v);
    else if (key == "search_timeout") t.search_timeout = as_double(key, v);
    else if (key == "survey_spacing") t.survey_spacing = as_double(key, v);
    else if (key == "lookahead") t.ugv.lookahead = as_double(key, v);
    else throw ConfigError("unknown suite key '" + key + "'");
}

}  // namespace

std::vector<ScenarioSuite> load_suites(const std::filesystem::path& path) {
    std::vector<CLI::ConfigItem> items;
    try {
        items = CLI::ConfigTOML().from_file(path.string());
    } catch (const CLI::Error& e) {
        throw ConfigError("cannot read suite " + path.string() + ": " + e.what());
    }
    Entries defaults;
    std::map<std::string, Entries> sections;
    std::vector<std::string> order;
    for (const auto& item : items) {
        if (item.name == "++" || item.name == "--") continue;
        if (item.parents.empty()) {
            defaults.emplace_back(item.name, item.inputs);
            continue;
        }
        if (item.parents.size() != 1) throw ConfigError("nested suite sections are not supported: " + item.fullname());
        const auto& sec = item.parents.front();
        if (!sections.count(sec)) order.push_back(sec);
        sections[sec].emplace_back(item.name, item.inputs);
    }
    const auto base_dir = path.parent_path();
    std::vector<ScenarioSuite> out;
    auto build = [&](const std::string& name, const Entries* section) {
        ScenarioSuite s;
        s.name = name;
        for (const auto& [k, v] : defaults) apply(s, k, v, base_dir);
        if (section) {
            s.name = name;
            for (const auto& [k, v] : *section) apply(s, k, v, base_dir);
        }
        validate(s);
        out.push_back(std::move(s));
    };
    if (order.empty()) {
        build(path.stem().string(), nullptr);
        // a top-level name key wins over the file stem
        for (const auto& [k, v] : defaults) {
            if (k == "name") out.back().name = as_string(k, v);
        }
    } else {
        for (const auto& sec : order) build(sec, &sections[sec]);
    }
    return out;
}

}  // namespace glide::harness
