// UAV <-> UGV link: binary availability with range hysteresis, fixed latency,
// random loss, and an onboard FIFO that is flushed on reconnection.

#pragma once

#include <cstdint>
#include <deque>
#include <string>
#include <vector>

#include "glide/geometry.hpp"
#include "glide/perception.hpp"
#include "glide/random.hpp"

namespace glide::comms {

struct LinkModel {
    double connect_range{200.0};
    double disconnect_range{250.0};
    double latency{0.05};
    double drop_probability{0.0};
};

/// @throws ConfigError on invariant violations.
void validate(const LinkModel& model);

enum class LinkState { Connected, Disconnected };

/// Hysteresis: connect at <= connect_range, disconnect beyond disconnect_range.
[[nodiscard]] LinkState link_state(const LinkModel& model, const Vec3& uav_position, const Vec3& ugv_position,
                                   LinkState previous) noexcept;

struct LinkStats {
    std::uint64_t sent{0};
    std::uint64_t delivered{0};
    std::uint64_t dropped{0};    ///< random loss plus overflow evictions
    std::uint64_t overflow{0};   ///< subset of dropped evicted from a full queue
    std::uint64_t queued_max{0};

    friend bool operator==(const LinkStats&, const LinkStats&) = default;
};

enum class SendOutcome { Scheduled, Dropped, Queued, QueueOverflow };

struct Delivery {
    perception::DetectionEvent event;
    double sent_at{0.0};
    double delivered_at{0.0};
    std::uint64_t sequence{0};
};

inline constexpr std::size_t kDefaultQueueCapacity = 4096;

/// One directional link. Messages travel as encoded frames.
class Link {
public:
    Link(LinkModel model, std::uint64_t seed, std::size_t capacity = kDefaultQueueCapacity,
         LinkState initial = LinkState::Connected);

    [[nodiscard]] LinkState state() const noexcept { return state_; }
    [[nodiscard]] const LinkStats& stats() const noexcept { return stats_; }
    [[nodiscard]] const LinkModel& model() const noexcept { return model_; }

    /// Messages sent but neither delivered nor dropped (onboard queue + in flight).
    [[nodiscard]] std::size_t queued() const noexcept { return outbound_.size() + in_flight_.size(); }
    [[nodiscard]] std::size_t outbound_size() const noexcept { return outbound_.size(); }

    /// Re-evaluates availability from positions; a reconnect flushes the queue.
    LinkState update(const Vec3& uav_position, const Vec3& ugv_position, double now);

    /// Forces the state, flushing the queue on a Disconnected -> Connected edge.
    void set_state(LinkState state, double now);

    /// Connected: scheduled for now + latency unless randomly dropped.
    /// Disconnected: appended to the onboard FIFO, evicting the oldest when full.
    SendOutcome send(const perception::DetectionEvent& event, double now);

    /// Removes and returns every message due by `now`, in delivery order.
    [[nodiscard]] std::vector<Delivery> poll(double now);

private:
    struct Pending {
        std::string frame;
        double sent_at;
        std::uint64_t sequence;
    };
    struct InFlight {
        std::string frame;
        double sent_at;
        double due;
        std::uint64_t sequence;
    };

    void transmit(Pending msg, double now);
    void note_queue_depth() noexcept;

    LinkModel model_;
    Rng rng_;
    std::size_t capacity_;
    LinkState state_;
    std::deque<Pending> outbound_;
    std::deque<InFlight> in_flight_;  // ordered by (due, sequence)
    LinkStats stats_;
    std::uint64_t next_sequence_{0};
};

[[nodiscard]] std::string_view to_string(LinkState s) noexcept;

}  // namespace glide::comms
