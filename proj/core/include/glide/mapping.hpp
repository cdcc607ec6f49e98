// Persistent tri-state occupancy belief the ego-vehicle plans on. Knowledge is
// monotone: cells only leave Unknown, and Occupied is permanent within a trial.

#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "glide/geometry.hpp"
#include "glide/grid.hpp"

namespace glide::mapping {

enum class CellState : std::uint8_t { Unknown = 0, Free = 1, Occupied = 2 };
enum class UnknownPolicy { Optimistic, Pessimistic };

struct RevealFootprint {
    Vec2 center;
    double half_extent_x{0.0};
    double half_extent_y{0.0};

    [[nodiscard]] Box2 box() const noexcept { return Box2::centered(center, half_extent_x, half_extent_y); }
};

class OccupancyBelief {
public:
    OccupancyBelief() = default;
    explicit OccupancyBelief(GridGeometry geometry);

    [[nodiscard]] const GridGeometry& geometry() const noexcept { return geometry_; }
    [[nodiscard]] std::uint64_t revision() const noexcept { return revision_; }

    [[nodiscard]] CellState at(const CellIndex& c) const noexcept { return cells_[geometry_.index(c)]; }
    [[nodiscard]] CellState at(std::size_t index) const noexcept { return cells_[index]; }

    /// Revision at which the cell last changed (0 = never).
    [[nodiscard]] std::uint64_t changed_at(std::size_t index) const noexcept { return changed_at_[index]; }

    [[nodiscard]] const std::vector<CellState>& cells() const noexcept { return cells_; }

    /// Fraction of cells that are no longer Unknown.
    [[nodiscard]] double coverage() const noexcept;
    [[nodiscard]] std::size_t known_count() const noexcept { return known_; }

    /// Copies ground truth into every cell whose center lies in `box`.
    /// Returns the number of cells that changed; bumps the revision iff > 0.
    std::size_t sync_with_truth(const Box2& box, const TruthGrid& truth);

private:
    GridGeometry geometry_;
    std::vector<CellState> cells_;
    std::vector<std::uint64_t> changed_at_;
    std::uint64_t revision_{0};
    std::size_t known_{0};
};

/// Fresh belief covering `bounds`; every cell Unknown, revision 0.
[[nodiscard]] OccupancyBelief new_belief(const Box2& bounds, double resolution);

/// Sets every cell centered in the footprint to its ground-truth state.
/// @return number of changed cells.
std::size_t apply_reveal(OccupancyBelief& belief, const RevealFootprint& footprint, const TruthGrid& truth);

/// Square sensing window of side `window_extent` centered on the ego-vehicle.
std::size_t apply_local_window(OccupancyBelief& belief, const Vec2& ego_position, double window_extent,
                               const TruthGrid& truth);

/// Reveals the complete ground truth (GT setting).
std::size_t apply_full_truth(OccupancyBelief& belief, const TruthGrid& truth);

/// @throws OutOfBounds when `cell` lies outside the grid.
[[nodiscard]] bool is_traversable(const OccupancyBelief& belief, const CellIndex& cell,
                                  UnknownPolicy policy = UnknownPolicy::Optimistic);

/// Unchecked variant for hot loops; `index` must be valid.
[[nodiscard]] inline bool traversable_at(const OccupancyBelief& belief, std::size_t index,
                                         UnknownPolicy policy) noexcept {
    const CellState s = belief.at(index);
    return s == CellState::Free || (s == CellState::Unknown && policy == UnknownPolicy::Optimistic);
}

/// Binary PGM (P5), north up: 255 free, 0 occupied, 128 unknown.
[[nodiscard]] std::string to_pgm(const OccupancyBelief& belief);
/// Sidecar describing how to place the PGM in ENU.
[[nodiscard]] std::string pgm_sidecar_json(const OccupancyBelief& belief, const std::string& image_name);
void export_snapshot(const OccupancyBelief& belief, const std::string& path_stem);

}  // namespace glide::mapping
