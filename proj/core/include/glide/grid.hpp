// Uniform ENU grid layout and the binary ground-truth raster built on it.

#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <vector>

#include "glide/geometry.hpp"

namespace glide {

struct CellIndex {
    int x{0};
    int y{0};
    friend constexpr bool operator==(const CellIndex&, const CellIndex&) = default;
};

/// Row-major cell layout: cell (x, y) covers
/// [origin.x + x*res, origin.x + (x+1)*res) x [origin.y + y*res, ...).
class GridGeometry {
public:
    GridGeometry() = default;
    GridGeometry(Vec2 origin, double resolution, int width, int height);

    /// Smallest grid that covers `bounds` (exactly, when the extent is a
    /// multiple of the resolution).
    [[nodiscard]] static GridGeometry covering(const Box2& bounds, double resolution);

    [[nodiscard]] const Vec2& origin() const noexcept { return origin_; }
    [[nodiscard]] double resolution() const noexcept { return resolution_; }
    [[nodiscard]] int width() const noexcept { return width_; }
    [[nodiscard]] int height() const noexcept { return height_; }
    [[nodiscard]] std::size_t cell_count() const noexcept {
        return static_cast<std::size_t>(width_) * static_cast<std::size_t>(height_);
    }

    [[nodiscard]] Box2 extent() const noexcept {
        return {origin_, {origin_.x + width_ * resolution_, origin_.y + height_ * resolution_}};
    }

    [[nodiscard]] bool in_bounds(const CellIndex& c) const noexcept {
        return c.x >= 0 && c.x < width_ && c.y >= 0 && c.y < height_;
    }
    [[nodiscard]] bool contains(const Vec2& p) const noexcept { return in_bounds(world_to_cell(p)); }

    [[nodiscard]] std::size_t index(const CellIndex& c) const noexcept {
        return static_cast<std::size_t>(c.y) * static_cast<std::size_t>(width_) +
               static_cast<std::size_t>(c.x);
    }
    [[nodiscard]] CellIndex cell(std::size_t index) const noexcept {
        return {static_cast<int>(index % static_cast<std::size_t>(width_)),
                static_cast<int>(index / static_cast<std::size_t>(width_))};
    }

    [[nodiscard]] Vec2 cell_center(const CellIndex& c) const noexcept {
        return {origin_.x + (c.x + 0.5) * resolution_, origin_.y + (c.y + 0.5) * resolution_};
    }

    [[nodiscard]] CellIndex world_to_cell(const Vec2& p) const noexcept {
        return {static_cast<int>(std::floor((p.x - origin_.x) / resolution_)),
                static_cast<int>(std::floor((p.y - origin_.y) / resolution_))};
    }

    /// Inclusive cell range whose centers may fall inside `box`, clipped to the grid.
    struct CellRange {
        int x0, y0, x1, y1;
        [[nodiscard]] bool empty() const noexcept { return x0 > x1 || y0 > y1; }
    };
    [[nodiscard]] CellRange cells_overlapping(const Box2& box) const noexcept;

    friend bool operator==(const GridGeometry&, const GridGeometry&) = default;

private:
    Vec2 origin_{};
    double resolution_{1.0};
    int width_{0};
    int height_{0};
};

/// Binary occupancy of the true world, rasterized at planning resolution.
struct TruthGrid {
    GridGeometry geometry;
    std::vector<std::uint8_t> occupied;  ///< 1 = occupied, row-major

    [[nodiscard]] bool is_occupied(const CellIndex& c) const noexcept {
        return occupied[geometry.index(c)] != 0;
    }
    [[nodiscard]] std::size_t occupied_count() const noexcept;
};

}  // namespace glide
