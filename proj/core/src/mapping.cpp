#include "glide/mapping.hpp"

#include <fstream>

#include <nlohmann/json.hpp>

#include "glide/errors.hpp"

namespace glide::mapping {

OccupancyBelief::OccupancyBelief(GridGeometry geometry)
    : geometry_(geometry),
      cells_(geometry.cell_count(), CellState::Unknown),
      changed_at_(geometry.cell_count(), 0) {}

double OccupancyBelief::coverage() const noexcept {
    return cells_.empty() ? 0.0 : static_cast<double>(known_) / static_cast<double>(cells_.size());
}

std::size_t OccupancyBelief::sync_with_truth(const Box2& box, const TruthGrid& truth) {
    if (!(truth.geometry == geometry_)) throw ConfigError("truth grid does not match belief layout");
    auto range = geometry_.cells_overlapping(box);
    if (range.empty()) return 0;
    // The box is axis-aligned, so "center inside" separates per axis.
    const auto center = [&](int x, int y) { return geometry_.cell_center(CellIndex{x, y}); };
    while (range.x0 <= range.x1 && center(range.x0, range.y0).x < box.min.x) ++range.x0;
    while (range.x1 >= range.x0 && center(range.x1, range.y0).x > box.max.x) --range.x1;
    while (range.y0 <= range.y1 && center(range.x0, range.y0).y < box.min.y) ++range.y0;
    while (range.y1 >= range.y0 && center(range.x0, range.y1).y > box.max.y) --range.y1;
    const std::uint64_t next = revision_ + 1;
    std::size_t changed = 0;
    for (int y = range.y0; y <= range.y1; ++y) {
        for (int x = range.x0; x <= range.x1; ++x) {
            const auto idx = geometry_.index(CellIndex{x, y});
            const CellState current = cells_[idx];
            // Occupied is terminal; truth is static so nothing ever contradicts it.
            if (current == CellState::Occupied) continue;
            const CellState target = truth.occupied[idx] != 0 ? CellState::Occupied : CellState::Free;
            if (current == target) continue;
            if (current == CellState::Unknown) ++known_;
            cells_[idx] = target;
            changed_at_[idx] = next;
            ++changed;
        }
    }
    if (changed > 0) revision_ = next;
    return changed;
}

OccupancyBelief new_belief(const Box2& bounds, double resolution) {
    return OccupancyBelief(GridGeometry::covering(bounds, resolution));
}

std::size_t apply_reveal(OccupancyBelief& belief, const RevealFootprint& footprint, const TruthGrid& truth) {
    return belief.sync_with_truth(footprint.box(), truth);
}

std::size_t apply_local_window(OccupancyBelief& belief, const Vec2& ego_position, double window_extent,
                               const TruthGrid& truth) {
    const double half = 0.5 * window_extent;
    return apply_reveal(belief, {ego_position, half, half}, truth);
}

std::size_t apply_full_truth(OccupancyBelief& belief, const TruthGrid& truth) {
    return belief.sync_with_truth(belief.geometry().extent(), truth);
}

bool is_traversable(const OccupancyBelief& belief, const CellIndex& cell, UnknownPolicy policy) {
    if (!belief.geometry().in_bounds(cell)) {
        throw OutOfBounds("cell (" + std::to_string(cell.x) + ", " + std::to_string(cell.y) +
                          ") outside belief grid");
    }
    return traversable_at(belief, belief.geometry().index(cell), policy);
}

std::string to_pgm(const OccupancyBelief& belief) {
    const auto& geo = belief.geometry();
    std::string out = "P5\n" + std::to_string(geo.width()) + " " + std::to_string(geo.height()) + "\n255\n";
    out.reserve(out.size() + geo.cell_count());
    for (int y = geo.height() - 1; y >= 0; --y) {
        for (int x = 0; x < geo.width(); ++x) {
            switch (belief.at(CellIndex{x, y})) {
                case CellState::Free: out.push_back(static_cast<char>(255)); break;
                case CellState::Occupied: out.push_back(static_cast<char>(0)); break;
                case CellState::Unknown: out.push_back(static_cast<char>(128)); break;
            }
        }
    }
    return out;
}

std::string pgm_sidecar_json(const OccupancyBelief& belief, const std::string& image_name) {
    const auto& geo = belief.geometry();
    const nlohmann::json doc = {
        {"image", image_name},
        {"origin", {geo.origin().x, geo.origin().y}},
        {"resolution", geo.resolution()},
        {"width", geo.width()},
        {"height", geo.height()},
        {"revision", belief.revision()},
        {"frame", "ENU"},
        {"row_order", "north_first"},
        {"values", {{"free", 255}, {"unknown", 128}, {"occupied", 0}}},
    };
    return doc.dump(2);
}

void export_snapshot(const OccupancyBelief& belief, const std::string& path_stem) {
    const std::string pgm_path = path_stem + ".pgm";
    std::ofstream pgm(pgm_path, std::ios::binary);
    if (!pgm) throw ConfigError("cannot write " + pgm_path);
    pgm << to_pgm(belief);
    const auto slash = pgm_path.find_last_of('/');
    const std::string name = slash == std::string::npos ? pgm_path : pgm_path.substr(slash + 1);
    std::ofstream side(path_stem + ".json", std::ios::binary);
    if (!side) throw ConfigError("cannot write " + path_stem + ".json");
    side << pgm_sidecar_json(belief, name) << '\n';
}

}  // namespace glide::mapping
