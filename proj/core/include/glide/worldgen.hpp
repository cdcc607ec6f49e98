// Procedural ground-truth worlds: U-shaped corridors and linear barriers
// scattered between a northern spawn and a southern victim.

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "glide/geometry.hpp"
#include "glide/grid.hpp"

namespace glide::worldgen {

/// Default planning inflation: half the cart width plus a safety margin.
inline constexpr double kDefaultInflation = 1.5;

enum class Template { UShape, Line, Mixed };
enum class Difficulty { Easy, Hard };

struct WorldSpec {
    Box2 bounds;
    std::vector<OrientedRect> obstacles;
    std::vector<Vec2> victims;
    Vec2 spawn_center;
    double spawn_heading{0.0};
    /// Region the goal-searching UAV surveys (supplied externally in the field).
    Box2 search_region;
    std::uint64_t seed{0};

    friend bool operator==(const WorldSpec&, const WorldSpec&) = default;
};

struct DifficultyLevel {
    Difficulty label{Difficulty::Easy};
    int min_count{0};       ///< clutter structures, inclusive
    int max_count{0};
    double min_size{0.0};   ///< barrier length, meters
    double max_size{0.0};

    [[nodiscard]] static DifficultyLevel easy();
    [[nodiscard]] static DifficultyLevel hard();
    [[nodiscard]] static DifficultyLevel preset(Difficulty d);
};

/// Layout knobs shared by all templates. Defaults reproduce the benchmark worlds.
struct GenerationParams {
    double half_extent{75.0};           ///< bounds are [-h, h]^2 (300x300 cells at 0.5 m)
    double resolution{0.5};
    double inflation{kDefaultInflation};
    double spawn_clearance{10.0};       ///< keeps jittered starts (+-5 m) off obstacles
    double victim_clearance{3.0};
    double wall_thickness{1.0};
    double search_region_size{40.0};
    int max_attempts{1000};
};

/// Deterministic in (seed, difficulty, template, params).
/// @throws GenerationFailed when no reachable layout is found within the attempt cap.
[[nodiscard]] WorldSpec generate_world(std::uint64_t seed, const DifficultyLevel& difficulty,
                                       Template templ, const GenerationParams& params = {});

/// Cell is occupied iff its center lies inside an obstacle inflated by `inflation`.
[[nodiscard]] TruthGrid rasterize(const WorldSpec& world, double resolution,
                                  double inflation = kDefaultInflation);

/// 4-connected flood fill over free cells from `start`; returns a reached mask.
[[nodiscard]] std::vector<std::uint8_t> flood_fill(const TruthGrid& grid, CellIndex start);

/// Checks the WorldSpec invariants (bounds, victims clear, spawn clearance).
/// Returns a description of the first violation, if any.
[[nodiscard]] std::optional<std::string> validate(const WorldSpec& world,
                                                  double footprint_diameter = 2.0 * kDefaultInflation);

[[nodiscard]] std::string to_json(const WorldSpec& world, int indent = 2);
/// @throws ConfigError on malformed documents or schema mismatch.
[[nodiscard]] WorldSpec from_json(std::string_view text);

void save(const WorldSpec& world, const std::string& path);
[[nodiscard]] WorldSpec load(const std::string& path);

[[nodiscard]] std::string_view to_string(Template t) noexcept;
[[nodiscard]] std::string_view to_string(Difficulty d) noexcept;
[[nodiscard]] Template parse_template(std::string_view s);
[[nodiscard]] Difficulty parse_difficulty(std::string_view s);

}  // namespace glide::worldgen
