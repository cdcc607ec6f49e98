#include "glide/perception.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <algorithm>
#include <numeric>

#include "glide/errors.hpp"
#include "oracles.hpp"

namespace glide::perception {
namespace {

UavPose pose_at(const Vec3& p, double roll = 0, double pitch = 0, double yaw = 0) {
    return {p, Quaternion::from_euler(roll, pitch, yaw), 0.0};
}

UavPose random_gated_pose(Rng& rng) {
    const double lim = deg_to_rad(15.0);
    return pose_at({rng.uniform(-50, 50), rng.uniform(-50, 50), rng.uniform(10, 30)}, rng.uniform(-lim, lim),
                   rng.uniform(-lim, lim), rng.uniform(-kPi, kPi));
}

BoundingBox box_with_contact(const Vec2& pixel) { return {pixel.x - 10, pixel.y - 20, pixel.x + 10, pixel.y}; }

DetectionEvent event_at(const Vec2& p) { return {p, ClassLabel::Victim, 0.9, "searcher", 0.0}; }

TEST(AttitudeGate, Examples) {
    const double limit = deg_to_rad(15.0);
    EXPECT_TRUE(attitude_gate(pose_at({0, 0, 15}), limit));
    EXPECT_FALSE(attitude_gate(pose_at({0, 0, 15}, deg_to_rad(16.0), 0), limit));
    EXPECT_TRUE(attitude_gate(pose_at({0, 0, 15}, 0, deg_to_rad(15.0)), limit));
    EXPECT_FALSE(attitude_gate(pose_at({0, 0, 15}, 0, deg_to_rad(-15.5)), limit));
    EXPECT_TRUE(attitude_gate(pose_at({0, 0, 15}, 0, 0, 2.5), limit));  // yaw is irrelevant
}

TEST(CenterGate, Examples) {
    EXPECT_TRUE(center_gate(box_with_contact({640, 400}), 1280, 800, 0.5));
    EXPECT_FALSE(center_gate(box_with_contact({30, 780}), 1280, 800, 0.5));
    EXPECT_TRUE(center_gate(box_with_contact({960, 600}), 1280, 800, 0.5));
    EXPECT_TRUE(center_gate(box_with_contact({320, 200}), 1280, 800, 0.5));
    EXPECT_FALSE(center_gate(box_with_contact({960.01, 400}), 1280, 800, 0.5));
}

TEST(Gates, LooseningNeverRejectsMore) {
    Rng rng(4);
    for (int i = 0; i < 500; ++i) {
        const UavPose p = pose_at({0, 0, 15}, rng.uniform(-0.6, 0.6), rng.uniform(-0.6, 0.6));
        const double tilt = rng.uniform(0, 0.5);
        if (attitude_gate(p, tilt)) EXPECT_TRUE(attitude_gate(p, tilt + rng.uniform(0, 0.3)));
        const BoundingBox b = box_with_contact({rng.uniform(0, 1280), rng.uniform(0, 800)});
        const double f = rng.uniform(0, 1);
        if (center_gate(b, 1280, 800, f)) EXPECT_TRUE(center_gate(b, 1280, 800, std::min(1.0, f + rng.uniform(0, 0.5))));
    }
}

TEST(Projection, PrincipalPointIsBelow) {
    const CameraIntrinsics in;
    const RawDetection d{box_with_contact(in.principal_point), ClassLabel::Victim, 1.0, pose_at({12, -7, 15})};
    const Vec2 g = project_to_ground(d, in);
    EXPECT_NEAR(g.x, 12, 1e-12);
    EXPECT_NEAR(g.y, -7, 1e-12);
}

TEST(Projection, SimilarTriangles) {
    CameraIntrinsics in;
    in.focal_length_px = 500;
    const RawDetection d{box_with_contact({in.principal_point.x + 100, in.principal_point.y}), ClassLabel::Victim, 1.0,
                         pose_at({0, 0, 15})};
    const Vec2 g = project_to_ground(d, in);
    EXPECT_NEAR(g.x, 3.0, 1e-12);
    EXPECT_NEAR(g.y, 0.0, 1e-12);
    // image up is North
    const RawDetection up{box_with_contact({in.principal_point.x, in.principal_point.y - 100}), ClassLabel::Victim, 1.0,
                          pose_at({0, 0, 15})};
    EXPECT_NEAR(project_to_ground(up, in).y, 3.0, 1e-12);
}

TEST(Projection, AboveHorizonThrows) {
    const CameraIntrinsics in;
    const RawDetection d{box_with_contact(in.principal_point), ClassLabel::Victim, 1.0, pose_at({0, 0, 15}, kPi, 0)};
    EXPECT_THROW((void)project_to_ground(d, in), NoGroundIntersection);
    const RawDetection grounded{box_with_contact(in.principal_point), ClassLabel::Victim, 1.0, pose_at({0, 0, 0})};
    EXPECT_THROW((void)project_to_ground(grounded, in), NoGroundIntersection);
}

TEST(Projection, RayMatchesIndependentCameraModel) {
    const CameraIntrinsics in;
    Rng rng(6);
    for (int i = 0; i < 200; ++i) {
        const UavPose p = random_gated_pose(rng);
        const Vec2 px{rng.uniform(0, 1280), rng.uniform(0, 800)};
        const Vec3 a = pixel_ray(px, p.attitude, in);
        const Vec3 b = oracle::camera_ray(px, p.attitude, in);
        EXPECT_NEAR(a.x, b.x, 1e-12);
        EXPECT_NEAR(a.y, b.y, 1e-12);
        EXPECT_NEAR(a.z, b.z, 1e-12);
    }
}

TEST(Projection, AgreesWithRayMarching) {
    const CameraIntrinsics in;
    Rng rng(7);
    for (int i = 0; i < 200; ++i) {
        const UavPose p = random_gated_pose(rng);
        const Vec2 px{rng.uniform(0, 1280), rng.uniform(0, 800)};
        const RawDetection d{box_with_contact(px), ClassLabel::Victim, 1.0, p};
        const Vec2 g = project_to_ground(d, in);
        const Vec2 m = oracle::ray_march_ground(p.position, oracle::camera_ray(px, p.attitude, in));
        EXPECT_LT(distance(g, m), 1e-6) << "pose " << i;
    }
}

TEST(Projection, RoundTripAtZeroNoise) {
    const CameraIntrinsics in;
    Rng rng(8);
    for (int i = 0; i < 200; ++i) {
        const UavPose p = random_gated_pose(rng);
        const Vec2 truth{p.position.x + rng.uniform(-8, 8), p.position.y + rng.uniform(-8, 8)};
        const auto px = back_project(truth, p, in);
        ASSERT_TRUE(px.has_value());
        const RawDetection d{box_with_contact(*px), ClassLabel::Victim, 1.0, p};
        EXPECT_LT(distance(project_to_ground(d, in), truth), 1e-9) << "pose " << i;
    }
}

TEST(SimulateDetection, OutsideFootprintEmpty) {
    worldgen::WorldSpec w;
    w.victims = {{500, 500}};
    Rng rng(1);
    EXPECT_TRUE(simulate_detection(w, pose_at({0, 0, 15}), {}, {}, rng).empty());
}

TEST(SimulateDetection, ZeroNoiseRecoversVictim) {
    worldgen::WorldSpec w;
    w.victims = {{3.0, -2.0}};
    Rng rng(1);
    const UavPose p = pose_at({1, 1, 15}, 0.05, -0.08, 0.7);
    const auto dets = simulate_detection(w, p, {}, {0.0, 0.8, 0.9}, rng);
    ASSERT_EQ(dets.size(), 1u);
    EXPECT_LT(distance(project_to_ground(dets[0], {}), w.victims[0]), 1e-9);
    EXPECT_EQ(dets[0].confidence, 0.9);
}

TEST(SimulateDetection, NoiseSigmaMatches) {
    worldgen::WorldSpec w;
    w.victims = {{0.5, 0.5}};
    Rng rng(2);
    const UavPose p = pose_at({0, 0, 15});
    double sx = 0, sy = 0, sxx = 0, syy = 0;
    const int n = 10000;
    for (int i = 0; i < n; ++i) {
        const auto dets = simulate_detection(w, p, {}, {0.5, 0.8, 0.9}, rng);
        ASSERT_EQ(dets.size(), 1u);
        const Vec2 e = project_to_ground(dets[0], {}) - w.victims[0];
        sx += e.x;
        sy += e.y;
        sxx += e.x * e.x;
        syy += e.y * e.y;
    }
    const double sdx = std::sqrt(sxx / n - (sx / n) * (sx / n));
    const double sdy = std::sqrt(syy / n - (sy / n) * (sy / n));
    EXPECT_NEAR(sdx, 0.5, 0.1);
    EXPECT_NEAR(sdy, 0.5, 0.1);
}

TEST(SimulateDetection, SameSeedSameOutput) {
    worldgen::WorldSpec w;
    w.victims = {{0.5, 0.5}, {3, 2}};
    Rng a(9), b(9);
    for (int i = 0; i < 20; ++i) {
        const auto da = simulate_detection(w, pose_at({0, 0, 15}), {}, {0.3, 0.8, 0.9}, a);
        const auto db = simulate_detection(w, pose_at({0, 0, 15}), {}, {0.3, 0.8, 0.9}, b);
        ASSERT_EQ(da.size(), db.size());
        for (std::size_t k = 0; k < da.size(); ++k) EXPECT_EQ(da[k].bbox.y_max, db[k].bbox.y_max);
    }
}

TEST(Consensus, ThreeHitsConfirmAtCentroid) {
    ConsensusTracker t(1.0, 3);
    EXPECT_FALSE(t.update(event_at({0, 0})));
    EXPECT_FALSE(t.update(event_at({0.3, 0})));
    const auto c = t.update(event_at({0, 0.4}));
    ASSERT_TRUE(c.has_value());
    EXPECT_NEAR(c->position.x, 0.1, 1e-12);
    EXPECT_NEAR(c->position.y, 0.4 / 3, 1e-12);
    EXPECT_FALSE(t.update(event_at({0.1, 0.1})));  // at most one confirmation per cluster
}

TEST(Consensus, FarHitsStayPending) {
    ConsensusTracker t(1.0, 3);
    EXPECT_FALSE(t.update(event_at({0, 0})));
    EXPECT_FALSE(t.update(event_at({5, 0})));
    EXPECT_EQ(t.clusters().size(), 2u);
    for (const auto& c : t.clusters()) EXPECT_FALSE(c.confirmed);
}

TEST(Consensus, MembersStayWithinRadius) {
    ConsensusTracker t(1.0, 3);
    Rng rng(10);
    for (int i = 0; i < 300; ++i) (void)t.update(event_at({rng.normal(0, 0.8), rng.normal(0, 0.8)}));
    for (const auto& c : t.clusters()) {
        for (const auto& h : c.hits) EXPECT_LE(distance(h, c.centroid), 1.0 + 1e-12);
    }
}

TEST(Consensus, TwoVictimsFromThousandNoisyHits) {
    ConsensusTracker t(1.0, 3);
    Rng rng(2025);
    const Vec2 a{0, 0}, b{20, 0};
    std::vector<ConfirmedVictim> confirmed;
    for (int i = 0; i < 1000; ++i) {
        const Vec2 truth = i % 2 == 0 ? a : b;
        if (auto c = t.update(event_at({truth.x + rng.normal(0, 0.5), truth.y + rng.normal(0, 0.5)}))) confirmed.push_back(*c);
    }
    ASSERT_EQ(confirmed.size(), 2u);
    const double da = std::min(distance(confirmed[0].position, a), distance(confirmed[1].position, a));
    const double db = std::min(distance(confirmed[0].position, b), distance(confirmed[1].position, b));
    EXPECT_LT(da, 1.0);
    EXPECT_LT(db, 1.0);
}

TEST(Consensus, PermutationStableForSeparatedClusters) {
    std::vector<Vec2> hits;
    for (int v = 0; v < 3; ++v) {
        for (int k = 0; k < 3; ++k) hits.push_back({v * 10.0 + 0.1 * k, 0.05 * k});
    }
    std::vector<std::size_t> idx(hits.size());
    std::iota(idx.begin(), idx.end(), 0);
    Rng rng(3);
    for (int trial = 0; trial < 20; ++trial) {
        for (std::size_t i = idx.size() - 1; i > 0; --i) std::swap(idx[i], idx[static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(i)))]);
        ConsensusTracker t(1.0, 3);
        std::vector<Vec2> out;
        for (const auto i : idx) {
            if (auto c = t.update(event_at(hits[i]))) out.push_back(c->position);
        }
        ASSERT_EQ(out.size(), 3u);
        std::sort(out.begin(), out.end(), [](const Vec2& l, const Vec2& r) { return l.x < r.x; });
        for (int v = 0; v < 3; ++v) {
            EXPECT_NEAR(out[static_cast<std::size_t>(v)].x, v * 10.0 + 0.1, 1e-9);
            EXPECT_NEAR(out[static_cast<std::size_t>(v)].y, 0.05, 1e-9);
        }
    }
}

TEST(Consensus, InvalidParameters) {
    EXPECT_THROW(ConsensusTracker(0.0, 3), ConfigError);
    EXPECT_THROW(ConsensusTracker(1.0, 0), ConfigError);
}

TEST(EventCodec, RoundTrip) {
    const DetectionEvent e{{12.5, -3.25}, ClassLabel::NonTraversable, 0.75, "uav-2", 41.3};
    const std::string frame = encode_event(e);
    ASSERT_GE(frame.size(), 4u);
    const auto len = (static_cast<unsigned char>(frame[0]) << 24) | (static_cast<unsigned char>(frame[1]) << 16) |
                     (static_cast<unsigned char>(frame[2]) << 8) | static_cast<unsigned char>(frame[3]);
    EXPECT_EQ(static_cast<std::size_t>(len) + 4, frame.size());
    for (const char* key : {"world_x", "world_y", "class", "confidence", "uav_id", "\"t\""}) {
        EXPECT_NE(frame.find(key), std::string::npos) << key;
    }
    EXPECT_EQ(decode_event(frame), e);
}

TEST(EventCodec, FuzzedEventsStayUnderOneKilobyte) {
    Rng rng(11);
    for (int i = 0; i < 5000; ++i) {
        std::string id(static_cast<std::size_t>(rng.uniform_int(0, kMaxUavIdLength)), 'x');
        for (auto& ch : id) ch = static_cast<char>(rng.uniform_int(1, 126));
        const DetectionEvent e{{rng.uniform(-1e12, 1e12), rng.uniform(-1e12, 1e12)},
                               rng.bernoulli(0.5) ? ClassLabel::Victim : ClassLabel::NonTraversable,
                               rng.uniform(), id, rng.uniform(0, 1e9)};
        const std::string frame = encode_event(e);
        ASSERT_LT(frame.size(), kMaxEventBytes);
        EXPECT_EQ(decode_event(frame), e);
    }
}

TEST(EventCodec, RejectsBadInput) {
    DetectionEvent e = event_at({1, 2});
    e.source_uav.assign(kMaxUavIdLength + 1, 'a');
    EXPECT_THROW((void)encode_event(e), ConfigError);
    EXPECT_THROW((void)decode_event("ab"), ConfigError);
    std::string frame = encode_event(event_at({1, 2}));
    EXPECT_THROW((void)decode_event(frame.substr(0, frame.size() - 1)), ConfigError);
    frame.back() = '!';
    EXPECT_THROW((void)decode_event(frame), ConfigError);
}

TEST(Intrinsics, Validation) {
    CameraIntrinsics in;
    EXPECT_NO_THROW(validate(in));
    in.focal_length_px = 0;
    EXPECT_THROW(validate(in), ConfigError);
    in = {};
    in.principal_point = {2000, 10};
    EXPECT_THROW(validate(in), ConfigError);
}

}  // namespace
}  // namespace glide::perception
