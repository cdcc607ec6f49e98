#include "glide/grid.hpp"

#include <algorithm>
#include <numeric>

#include "glide/errors.hpp"

namespace glide {

GridGeometry::GridGeometry(Vec2 origin, double resolution, int width, int height)
    : origin_(origin), resolution_(resolution), width_(width), height_(height) {
    if (!(resolution > 0.0) || width <= 0 || height <= 0) {
        throw ConfigError("grid requires positive resolution and dimensions");
    }
}

GridGeometry GridGeometry::covering(const Box2& bounds, double resolution) {
    if (bounds.empty()) throw ConfigError("grid bounds are empty");
    if (!(resolution > 0.0)) throw ConfigError("grid resolution must be positive");
    auto cells = [resolution](double extent) {
        const double n = extent / resolution;
        const double r = std::round(n);
        // tolerate representation error when the extent is an exact multiple
        return static_cast<int>(std::abs(n - r) < 1e-9 * std::max(1.0, r) ? r : std::ceil(n));
    };
    return {bounds.min, resolution, cells(bounds.width()), cells(bounds.height())};
}

GridGeometry::CellRange GridGeometry::cells_overlapping(const Box2& box) const noexcept {
    // cell x has its center inside [lo, hi] iff lo <= origin + (x + .5) res <= hi
    const double limit = static_cast<double>(std::max(width_, height_)) + 2.0;
    const auto lo = [&](double v, double o) {
        return static_cast<int>(std::clamp(std::ceil((v - o) / resolution_ - 0.5), -2.0, limit));
    };
    const auto hi = [&](double v, double o) {
        return static_cast<int>(std::clamp(std::floor((v - o) / resolution_ - 0.5), -2.0, limit));
    };
    CellRange r{lo(box.min.x, origin_.x), lo(box.min.y, origin_.y), hi(box.max.x, origin_.x),
                hi(box.max.y, origin_.y)};
    // widen by one to absorb rounding; callers re-test the exact predicate
    r.x0 = std::max(r.x0 - 1, 0);
    r.y0 = std::max(r.y0 - 1, 0);
    r.x1 = std::min(r.x1 + 1, width_ - 1);
    r.y1 = std::min(r.y1 + 1, height_ - 1);
    return r;
}

std::size_t TruthGrid::occupied_count() const noexcept {
    return static_cast<std::size_t>(std::count(occupied.begin(), occupied.end(), std::uint8_t{1}));
}

}  // namespace glide
