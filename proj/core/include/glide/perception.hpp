// Detection-to-world pipeline of the goal-searching UAV: attitude and
// image-center gates, closed-form ground projection, multi-hit consensus,
// and a simulated detector standing in for the onboard network.
//
// Camera model: pinhole, nadir-mounted. Image u grows to the right and v
// downward. With identity attitude the image right edge points East and
// the image top edge points North; the optical axis points straight down.

#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "glide/geometry.hpp"
#include "glide/random.hpp"
#include "glide/worldgen.hpp"

namespace glide::perception {

struct CameraIntrinsics {
    double focal_length_px{640.0};
    Vec2 principal_point{640.0, 400.0};
    int image_width{1280};
    int image_height{800};
};

/// @throws ConfigError when the intrinsics violate their invariants.
void validate(const CameraIntrinsics& intrinsics);

struct UavPose {
    Vec3 position;  ///< z is altitude above the ground plane
    Quaternion attitude;
    double timestamp{0.0};
};

enum class ClassLabel { Victim, NonTraversable };

/// Pixel rectangle, [x_min, x_max] x [y_min, y_max].
struct BoundingBox {
    double x_min{0.0};
    double y_min{0.0};
    double x_max{0.0};
    double y_max{0.0};

    /// Bottom-edge midpoint, the assumed ground contact.
    [[nodiscard]] Vec2 contact_pixel() const noexcept { return {0.5 * (x_min + x_max), y_max}; }
};

struct RawDetection {
    BoundingBox bbox;
    ClassLabel class_label{ClassLabel::Victim};
    double confidence{1.0};
    UavPose pose;
};

struct DetectionEvent {
    Vec2 world_position;
    ClassLabel class_label{ClassLabel::Victim};
    double confidence{1.0};
    std::string source_uav;
    double timestamp{0.0};

    friend bool operator==(const DetectionEvent&, const DetectionEvent&) = default;
};

inline constexpr std::size_t kMaxEventBytes = 1024;
inline constexpr std::size_t kMaxUavIdLength = 64;

/// Accepts iff |roll| and |pitch| are both within `max_tilt` (inclusive).
[[nodiscard]] bool attitude_gate(const UavPose& pose, double max_tilt) noexcept;

/// Accepts iff the contact pixel lies in the central rectangle whose sides are
/// `center_fraction` of the image dimensions (inclusive).
[[nodiscard]] bool center_gate(const BoundingBox& bbox, int image_width, int image_height,
                               double center_fraction) noexcept;

/// World-frame direction of the viewing ray through pixel (u, v).
[[nodiscard]] Vec3 pixel_ray(const Vec2& pixel, const Quaternion& attitude, const CameraIntrinsics& intrinsics);

/// Intersects the contact-pixel ray with the ground plane z = 0.
/// @throws NoGroundIntersection when the ray points at or above the horizon.
[[nodiscard]] Vec2 project_to_ground(const RawDetection& detection, const CameraIntrinsics& intrinsics);

/// Pixel at which a ground point is imaged, or nullopt when behind the camera.
[[nodiscard]] std::optional<Vec2> back_project(const Vec2& ground_point, const UavPose& pose,
                                               const CameraIntrinsics& intrinsics);

struct SimulatedDetectorParams {
    double noise_sigma{0.0};        ///< ground-plane standard deviation, meters
    double target_size{0.8};        ///< apparent victim size, meters
    double confidence{0.9};
};

/// One detection per victim whose box fits inside the image. Contact pixels
/// carry Gaussian noise equivalent to `noise_sigma` meters on the ground.
[[nodiscard]] std::vector<RawDetection> simulate_detection(const worldgen::WorldSpec& world, const UavPose& pose,
                                                           const CameraIntrinsics& intrinsics,
                                                           const SimulatedDetectorParams& params, Rng& rng);

struct Cluster {
    Vec2 centroid;
    std::vector<Vec2> hits;
    bool confirmed{false};
    bool suppressed{false};  ///< reached the hit count next to an earlier confirmation
};

struct ConfirmedVictim {
    Vec2 position;
    std::size_t cluster{0};
};

/// Spatial multi-hit consensus. An event joins the nearest cluster whose
/// centroid is within `radius` (earliest cluster wins ties) provided every
/// member stays within `radius` of the updated centroid; otherwise it seeds a
/// new cluster. A cluster confirms once, on reaching `required_hits`, unless a
/// confirmed cluster already lies within `suppression_radius`.
class ConsensusTracker {
public:
    explicit ConsensusTracker(double radius = 1.0, int required_hits = 3, double suppression_radius = 3.0);

    [[nodiscard]] double radius() const noexcept { return radius_; }
    [[nodiscard]] int required_hits() const noexcept { return required_hits_; }
    [[nodiscard]] const std::vector<Cluster>& clusters() const noexcept { return clusters_; }

    /// Returns the confirmation, if this event completed one.
    std::optional<ConfirmedVictim> update(const DetectionEvent& event);

private:
    double radius_;
    int required_hits_;
    double suppression_radius_;
    std::vector<Cluster> clusters_;
};

/// Free-function form of ConsensusTracker::update.
inline std::optional<ConfirmedVictim> consensus_update(ConsensusTracker& tracker, const DetectionEvent& event) {
    return tracker.update(event);
}

/// Length-prefixed JSON: 4-byte big-endian length, then
/// {"world_x","world_y","class","confidence","uav_id","t"}.
/// @throws ConfigError if the encoding would reach kMaxEventBytes.
[[nodiscard]] std::string encode_event(const DetectionEvent& event);
/// @throws ConfigError on malformed frames.
[[nodiscard]] DetectionEvent decode_event(std::string_view frame);

[[nodiscard]] std::string_view to_string(ClassLabel label) noexcept;

}  // namespace glide::perception
