#include "parksim/mac.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace parksim {

const char* to_string(MacMode m) { return m == MacMode::Schedule ? "schedule" : "contention"; }

Seconds default_inactive(MacMode m) { return m == MacMode::Schedule ? 0.0 : 0.6; }

Seconds DutyCycleConfig::inactive_period() const { return inactive ? *inactive : default_inactive(mode); }

Seconds transaction_time(const DutyCycleConfig& mac, const RadioParams& radio) {
    Seconds ctrl = airtime(radio.control_bytes, radio.data_rate_bps);
    Seconds data = airtime(mac.packet_bytes, radio.data_rate_bps);
    return 3 * ctrl + data + 3 * radio.turnaround_s;
}

void DutyCycleConfig::validate(const RadioParams& radio) const {
    if (!(slot > 0)) throw std::invalid_argument("mac.slot_s must be > 0");
    if (inactive_period() < 0) throw std::invalid_argument("mac.inactive_s must be >= 0");
    if (cw_min < 1) throw std::invalid_argument("mac.cw_min must be >= 1");
    if (cw_max < cw_min) throw std::invalid_argument("mac.cw_max must be >= mac.cw_min");
    if (!(micro_slot > 0)) throw std::invalid_argument("mac.micro_slot_s must be > 0");
    if (max_retries < 0) throw std::invalid_argument("mac.max_retries must be >= 0");
    if (queue_capacity < 1) throw std::invalid_argument("mac.queue_capacity must be >= 1");
    if (packet_bytes < 1) throw std::invalid_argument("mac.packet_bytes must be >= 1");
    Seconds need = transaction_time(*this, radio);
    if (mode == MacMode::Contention) need += cw_max * micro_slot + radio.cca_s;
    if (need > slot)
        throw std::invalid_argument("mac.slot_s too short: exchange needs " + std::to_string(need) + " s");
}

Seconds duty_cycle_length(const DutyCycleConfig& cfg, std::size_t n) {
    if (cfg.mode == MacMode::Schedule) return cfg.slot * static_cast<double>(n + 1) + cfg.inactive_period();
    return cfg.slot + cfg.inactive_period();
}

SlotLayout::SlotLayout(NodeId coordinator, std::vector<NodeId> members)
    : coordinator_(coordinator), members_(std::move(members)) {}

NodeId SlotLayout::owner(std::size_t slot) const {
    if (slot > members_.size()) throw std::out_of_range("slot index " + std::to_string(slot) + " out of range");
    return slot == 0 ? coordinator_ : members_[slot - 1];
}

std::size_t SlotLayout::slot_of(NodeId member) const {
    for (std::size_t i = 0; i < members_.size(); ++i)
        if (members_[i] == member) return i + 1;
    if (member == coordinator_) return 0;
    throw std::out_of_range("node " + std::to_string(member) + " not in layout");
}

NodeId schedule_slot_owner(const SlotLayout& layout, std::size_t slot) { return layout.owner(slot); }

Seconds next_owned_slot(Seconds origin, Seconds t_dc, std::size_t slot, Seconds slot_len, Seconds now) {
    Seconds base = origin + static_cast<double>(slot) * slot_len;
    double m = std::ceil((now - base) / t_dc);
    if (m < 0) m = 0;
    Seconds t = base + m * t_dc;
    while (t < now) t = base + (++m) * t_dc;
    return t;
}

int contention_draw(int cw, RngStream& rng) {
    if (cw < 1) throw std::invalid_argument("contention window must be >= 1");
    return static_cast<int>(rng.uniform_int(static_cast<std::uint64_t>(cw)));
}

ContentionOutcome contention_slot(std::span<const Contender> contenders, RngStream& rng) {
    ContentionOutcome out;
    if (contenders.empty()) {
        out.idle = true;
        return out;
    }
    std::vector<int> draws;
    draws.reserve(contenders.size());
    for (const auto& c : contenders) draws.push_back(contention_draw(c.cw, rng));
    int best = *std::min_element(draws.begin(), draws.end());
    out.backoff = best;
    for (std::size_t i = 0; i < contenders.size(); ++i)
        if (draws[i] == best) out.collided.push_back(contenders[i].node);
    if (out.collided.size() == 1) {
        out.winner = out.collided.front();
        out.collided.clear();
    }
    return out;
}

int backoff_window_update(int cw, AttemptOutcome outcome, const DutyCycleConfig& cfg) {
    if (outcome == AttemptOutcome::Success) return cfg.cw_min;
    return std::min(2 * cw, cfg.cw_max);
}

EnqueueResult TxQueue::push(Packet p, QueuePolicy policy) {
    EnqueueResult r;
    if (policy == QueuePolicy::ReplaceUnsent) {
        std::size_t first_unsent = head_in_flight ? 1 : 0;
        if (items_.size() > first_unsent) {
            items_.erase(items_.begin() + static_cast<std::ptrdiff_t>(first_unsent), items_.end());
            r.replaced = true;
        }
    }
    if (items_.size() >= capacity_) {
        if (head_in_flight && items_.size() > 1)
            items_.erase(items_.begin() + 1);
        else
            items_.pop_front();
        if (items_.empty()) head_in_flight = false;
        r.overflow_dropped = true;
    }
    items_.push_back(std::move(p));
    return r;
}

EnqueueResult enqueue_status_packet(TxQueue& queue, Packet packet, QueuePolicy policy) {
    return queue.push(std::move(packet), policy);
}

}  // namespace parksim
