#include "glide/comms.hpp"

#include <algorithm>

#include "glide/errors.hpp"

namespace glide::comms {

void validate(const LinkModel& model) {
    if (!(model.connect_range >= 0.0)) throw ConfigError("connect_range must be non-negative");
    if (model.disconnect_range < model.connect_range) throw ConfigError("disconnect_range below connect_range");
    if (!(model.latency >= 0.0)) throw ConfigError("latency must be non-negative");
    if (!(model.drop_probability >= 0.0 && model.drop_probability <= 1.0)) {
        throw ConfigError("drop_probability outside [0, 1]");
    }
}

LinkState link_state(const LinkModel& model, const Vec3& uav_position, const Vec3& ugv_position,
                     LinkState previous) noexcept {
    const double d = (uav_position - ugv_position).norm();
    if (previous == LinkState::Disconnected && d <= model.connect_range) return LinkState::Connected;
    if (previous == LinkState::Connected && d > model.disconnect_range) return LinkState::Disconnected;
    return previous;
}

Link::Link(LinkModel model, std::uint64_t seed, std::size_t capacity, LinkState initial)
    : model_(model), rng_(Rng::derive(seed, 0x6c696e6bULL)), capacity_(capacity), state_(initial) {
    validate(model_);
    if (capacity_ == 0) throw ConfigError("queue capacity must be positive");
}

LinkState Link::update(const Vec3& uav_position, const Vec3& ugv_position, double now) {
    set_state(link_state(model_, uav_position, ugv_position, state_), now);
    return state_;
}

void Link::set_state(LinkState state, double now) {
    const bool reconnect = state_ == LinkState::Disconnected && state == LinkState::Connected;
    state_ = state;
    if (!reconnect) return;
    while (!outbound_.empty()) {
        Pending msg = std::move(outbound_.front());
        outbound_.pop_front();
        transmit(std::move(msg), now);
    }
}

void Link::transmit(Pending msg, double now) {
    if (model_.drop_probability > 0.0 && rng_.bernoulli(model_.drop_probability)) {
        ++stats_.dropped;
        return;
    }
    InFlight f{std::move(msg.frame), msg.sent_at, now + model_.latency, msg.sequence};
    const auto pos = std::upper_bound(in_flight_.begin(), in_flight_.end(), f, [](const InFlight& a, const InFlight& b) {
        return a.due < b.due || (a.due == b.due && a.sequence < b.sequence);
    });
    in_flight_.insert(pos, std::move(f));
}

void Link::note_queue_depth() noexcept {
    stats_.queued_max = std::max<std::uint64_t>(stats_.queued_max, outbound_.size());
}

SendOutcome Link::send(const perception::DetectionEvent& event, double now) {
    ++stats_.sent;
    Pending msg{perception::encode_event(event), now, next_sequence_++};
    if (state_ == LinkState::Connected) {
        const auto before = stats_.dropped;
        transmit(std::move(msg), now);
        return stats_.dropped > before ? SendOutcome::Dropped : SendOutcome::Scheduled;
    }
    SendOutcome outcome = SendOutcome::Queued;
    if (outbound_.size() >= capacity_) {
        outbound_.pop_front();
        ++stats_.dropped;
        ++stats_.overflow;
        outcome = SendOutcome::QueueOverflow;
    }
    outbound_.push_back(std::move(msg));
    note_queue_depth();
    return outcome;
}

std::vector<Delivery> Link::poll(double now) {
    std::vector<Delivery> out;
    while (!in_flight_.empty() && in_flight_.front().due <= now) {
        InFlight f = std::move(in_flight_.front());
        in_flight_.pop_front();
        out.push_back({perception::decode_event(f.frame), f.sent_at, f.due, f.sequence});
        ++stats_.delivered;
    }
    return out;
}

std::string_view to_string(LinkState s) noexcept {
    return s == LinkState::Connected ? "connected" : "disconnected";
}

}  // namespace glide::comms
