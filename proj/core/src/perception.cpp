#include "glide/perception.hpp"

#include <cmath>
#include <limits>

#include <nlohmann/json.hpp>

#include "glide/errors.hpp"

namespace glide::perception {
namespace {

// Nadir mount: camera x -> body +x, camera y -> body -y, optical axis -> body -z.
Vec3 camera_to_body(const Vec3& c) noexcept { return {c.x, -c.y, -c.z}; }
Vec3 body_to_camera(const Vec3& b) noexcept { return {b.x, -b.y, -b.z}; }

// Absorbs rounding in the quaternion-to-Euler conversion at the gate boundary.
constexpr double kGateSlack = 1e-9;

}  // namespace

void validate(const CameraIntrinsics& in) {
    if (!(in.focal_length_px > 0.0)) throw ConfigError("focal length must be positive");
    if (in.image_width <= 0 || in.image_height <= 0) throw ConfigError("image size must be positive");
    const auto& pp = in.principal_point;
    if (pp.x < 0.0 || pp.y < 0.0 || pp.x > in.image_width || pp.y > in.image_height) {
        throw ConfigError("principal point outside the image");
    }
}

bool attitude_gate(const UavPose& pose, double max_tilt) noexcept {
    const double limit = max_tilt + kGateSlack;
    return std::abs(pose.attitude.roll()) <= limit && std::abs(pose.attitude.pitch()) <= limit;
}

bool center_gate(const BoundingBox& bbox, int image_width, int image_height, double center_fraction) noexcept {
    const Vec2 p = bbox.contact_pixel();
    const double half_w = 0.5 * center_fraction * image_width;
    const double half_h = 0.5 * center_fraction * image_height;
    const double cx = 0.5 * image_width;
    const double cy = 0.5 * image_height;
    return std::abs(p.x - cx) <= half_w && std::abs(p.y - cy) <= half_h;
}

Vec3 pixel_ray(const Vec2& pixel, const Quaternion& attitude, const CameraIntrinsics& in) {
    const Vec3 cam{(pixel.x - in.principal_point.x) / in.focal_length_px,
                   (pixel.y - in.principal_point.y) / in.focal_length_px, 1.0};
    return attitude.rotate(camera_to_body(cam));
}

Vec2 project_to_ground(const RawDetection& detection, const CameraIntrinsics& intrinsics) {
    const Vec3 dir = pixel_ray(detection.bbox.contact_pixel(), detection.pose.attitude, intrinsics);
    const Vec3& origin = detection.pose.position;
    if (!(dir.z < 0.0) || !(origin.z > 0.0)) {
        throw NoGroundIntersection("viewing ray does not descend to the ground plane");
    }
    const double t = -origin.z / dir.z;
    return {origin.x + t * dir.x, origin.y + t * dir.y};
}

std::optional<Vec2> back_project(const Vec2& ground_point, const UavPose& pose, const CameraIntrinsics& in) {
    const Vec3 world{ground_point.x - pose.position.x, ground_point.y - pose.position.y, -pose.position.z};
    const Vec3 cam = body_to_camera(pose.attitude.conjugate().rotate(world));
    if (!(cam.z > 0.0)) return std::nullopt;
    return Vec2{in.principal_point.x + in.focal_length_px * cam.x / cam.z,
                in.principal_point.y + in.focal_length_px * cam.y / cam.z};
}

std::vector<RawDetection> simulate_detection(const worldgen::WorldSpec& world, const UavPose& pose,
                                             const CameraIntrinsics& in, const SimulatedDetectorParams& params,
                                             Rng& rng) {
    std::vector<RawDetection> out;
    if (!(pose.position.z > 0.0)) return out;
    for (const auto& victim : world.victims) {
        auto pixel = back_project(victim, pose, in);
        if (!pixel) continue;
        const Vec3 rel{victim.x - pose.position.x, victim.y - pose.position.y, -pose.position.z};
        const double depth = body_to_camera(pose.attitude.conjugate().rotate(rel)).z;
        if (params.noise_sigma > 0.0) {
            const double sigma_px = params.noise_sigma * in.focal_length_px / depth;
            pixel->x += rng.normal(0.0, sigma_px);
            pixel->y += rng.normal(0.0, sigma_px);
        }
        const double size = params.target_size * in.focal_length_px / depth;
        const BoundingBox box{pixel->x - 0.5 * size, pixel->y - size, pixel->x + 0.5 * size, pixel->y};
        if (box.x_min < 0.0 || box.y_min < 0.0 || box.x_max > in.image_width || box.y_max > in.image_height) {
            continue;
        }
        out.push_back({box, ClassLabel::Victim, params.confidence, pose});
    }
    return out;
}

ConsensusTracker::ConsensusTracker(double radius, int required_hits, double suppression_radius)
    : radius_(radius), required_hits_(required_hits), suppression_radius_(suppression_radius) {
    if (!(radius > 0.0)) throw ConfigError("consensus radius must be positive");
    if (required_hits < 1) throw ConfigError("required_hits must be at least 1");
    if (suppression_radius < 0.0) throw ConfigError("suppression radius must be non-negative");
}

std::optional<ConfirmedVictim> ConsensusTracker::update(const DetectionEvent& event) {
    const Vec2 p = event.world_position;
    std::size_t best = clusters_.size();
    double best_distance = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < clusters_.size(); ++i) {
        const Cluster& c = clusters_[i];
        const double d = distance(c.centroid, p);
        if (d > radius_ || !(d < best_distance)) continue;
        const double n = static_cast<double>(c.hits.size());
        const Vec2 moved = (c.centroid * n + p) * (1.0 / (n + 1.0));
        bool compact = distance(moved, p) <= radius_;
        for (const auto& h : c.hits) compact = compact && distance(moved, h) <= radius_;
        if (!compact) continue;
        best = i;
        best_distance = d;
    }
    if (best == clusters_.size()) clusters_.push_back({p, {}, false, false});

    Cluster& cluster = clusters_[best];
    cluster.hits.push_back(p);
    Vec2 sum{};
    for (const auto& h : cluster.hits) sum += h;
    cluster.centroid = sum * (1.0 / static_cast<double>(cluster.hits.size()));

    if (cluster.confirmed || cluster.suppressed ||
        cluster.hits.size() != static_cast<std::size_t>(required_hits_)) {
        return std::nullopt;
    }
    for (std::size_t i = 0; i < clusters_.size(); ++i) {
        if (i != best && clusters_[i].confirmed &&
            distance(clusters_[i].centroid, cluster.centroid) <= suppression_radius_) {
            cluster.suppressed = true;
            return std::nullopt;
        }
    }
    cluster.confirmed = true;
    return ConfirmedVictim{cluster.centroid, best};
}

std::string encode_event(const DetectionEvent& event) {
    if (event.source_uav.size() > kMaxUavIdLength) throw ConfigError("uav_id longer than 64 bytes");
    const nlohmann::json doc = {
        {"world_x", event.world_position.x},
        {"world_y", event.world_position.y},
        {"class", to_string(event.class_label)},
        {"confidence", event.confidence},
        {"uav_id", event.source_uav},
        {"t", event.timestamp},
    };
    const std::string payload = doc.dump();
    const auto len = static_cast<std::uint32_t>(payload.size());
    std::string frame;
    frame.reserve(4 + payload.size());
    for (int shift = 24; shift >= 0; shift -= 8) frame.push_back(static_cast<char>((len >> shift) & 0xffU));
    frame += payload;
    if (frame.size() >= kMaxEventBytes) throw ConfigError("detection event exceeds 1 kB");
    return frame;
}

DetectionEvent decode_event(std::string_view frame) {
    if (frame.size() < 4) throw ConfigError("truncated detection frame");
    std::uint32_t len = 0;
    for (int i = 0; i < 4; ++i) len = (len << 8) | static_cast<std::uint8_t>(frame[static_cast<std::size_t>(i)]);
    if (frame.size() != 4 + static_cast<std::size_t>(len)) throw ConfigError("detection frame length mismatch");
    try {
        const auto doc = nlohmann::json::parse(frame.substr(4));
        DetectionEvent e;
        e.world_position = {doc.at("world_x").get<double>(), doc.at("world_y").get<double>()};
        const auto label = doc.at("class").get<std::string>();
        if (label == "victim") {
            e.class_label = ClassLabel::Victim;
        } else if (label == "non_traversable") {
            e.class_label = ClassLabel::NonTraversable;
        } else {
            throw ConfigError("unknown detection class '" + label + "'");
        }
        e.confidence = doc.at("confidence").get<double>();
        e.source_uav = doc.at("uav_id").get<std::string>();
        e.timestamp = doc.at("t").get<double>();
        return e;
    } catch (const nlohmann::json::exception& ex) {
        throw ConfigError(std::string("malformed detection payload: ") + ex.what());
    }
}

std::string_view to_string(ClassLabel label) noexcept {
    return label == ClassLabel::Victim ? "victim" : "non_traversable";
}

}  // namespace glide::perception
