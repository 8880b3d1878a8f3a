#pragma once

#include <deque>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "parksim/radio.hpp"
#include "parksim/traffic.hpp"

namespace parksim {

enum class MacMode : std::uint8_t { Schedule, Contention };
const char* to_string(MacMode m);

struct DutyCycleConfig {
    MacMode mode = MacMode::Schedule;
    Seconds slot = 0.1;
    std::optional<Seconds> inactive;  // unset: per-mode default
    int cw_min = 32;
    int cw_max = 256;
    Seconds micro_slot = 320e-6;
    int max_retries = 5;
    std::size_t queue_capacity = 64;
    std::size_t packet_bytes = 84;

    Seconds inactive_period() const;
    void validate(const RadioParams& radio) const;
};

Seconds default_inactive(MacMode m);

// Airtime of one complete beacon, grant, data, ack exchange with turnarounds.
Seconds transaction_time(const DutyCycleConfig& mac, const RadioParams& radio);

Seconds duty_cycle_length(const DutyCycleConfig& cfg, std::size_t n_members);

class SlotLayout {
public:
    SlotLayout() = default;
    SlotLayout(NodeId coordinator, std::vector<NodeId> members);

    // Slot 0 belongs to the coordinator, slot i to member i-1.
    NodeId owner(std::size_t slot) const;
    std::size_t slot_of(NodeId member) const;
    std::size_t slots() const { return members_.size() + 1; }
    NodeId coordinator() const { return coordinator_; }
    const std::vector<NodeId>& members() const { return members_; }

private:
    NodeId coordinator_ = kNoNode;
    std::vector<NodeId> members_;
};

NodeId schedule_slot_owner(const SlotLayout& layout, std::size_t slot);

// Start of the first owned slot at or after now.
Seconds next_owned_slot(Seconds cycle_origin, Seconds t_dc, std::size_t slot, Seconds slot_len, Seconds now);

int contention_draw(int cw, RngStream& rng);

struct Contender {
    NodeId node;
    int cw;
};

struct ContentionOutcome {
    std::optional<NodeId> winner;
    std::vector<NodeId> collided;
    bool idle = false;
    int backoff = 0;  // micro-slots before the first beacon
};

// Abstract single-slot race: everybody draws, the minimum transmits. A unique
// minimum wins; a tie collides.
ContentionOutcome contention_slot(std::span<const Contender> contenders, RngStream& rng);

enum class AttemptOutcome : std::uint8_t { Success, Collision, Lost };
int backoff_window_update(int cw, AttemptOutcome outcome, const DutyCycleConfig& cfg);

struct Packet {
    NodeId source = kNoNode;
    std::uint64_t seq = 0;
    Occupancy status = Occupancy::Vacant;
    Seconds status_changed_at = 0.0;
    Seconds created_at = 0.0;
    std::size_t size = 84;
    int retries_used = 0;
    int hop_count = 0;
};

enum class QueuePolicy : std::uint8_t { Append, ReplaceUnsent };

struct EnqueueResult {
    bool replaced = false;         // an unsent report was superseded
    bool overflow_dropped = false; // the oldest packet was discarded
};

class TxQueue {
public:
    explicit TxQueue(std::size_t capacity = 64) : capacity_(capacity) {
        if (capacity_ == 0) throw std::invalid_argument("queue capacity must be >= 1");
    }

    bool empty() const { return items_.empty(); }
    std::size_t size() const { return items_.size(); }
    std::size_t capacity() const { return capacity_; }
    Packet& front() { return items_.front(); }
    const Packet& front() const { return items_.front(); }
    const Packet& at(std::size_t i) const { return items_.at(i); }
    void pop() { items_.pop_front(); }

    // Head packet currently being transmitted; ReplaceUnsent leaves it alone.
    bool head_in_flight = false;

    EnqueueResult push(Packet p, QueuePolicy policy);

private:
    std::size_t capacity_;
    std::deque<Packet> items_;
};

EnqueueResult enqueue_status_packet(TxQueue& queue, Packet packet, QueuePolicy policy);

}  // namespace parksim
