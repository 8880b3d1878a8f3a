#pragma once

#include <vector>

#include "parksim/mac.hpp"
#include "parksim/metrics.hpp"
#include "parksim/network.hpp"

namespace parksim {

struct EngineConfig {
    Topology topology;
    RadioParams radio;
    DutyCycleConfig mac;
    TrafficConfig traffic;
    Seconds sim_time = 86400.0;
    std::uint64_t seed = 1;
    std::uint32_t batch = 0;
    DelayPolicy delay_policy = DelayPolicy::Supersede;
    Seconds route_update_period = 600.0;
    bool record_attempts = false;
};

struct NodeReport {
    NodeId id = 0;
    Role role = Role::Sensor;
    EnergyLedger ledger;
    double joules = 0.0;
    Seconds t_dc = 0.0;  // duty cycle of the cell this node transmits into
    std::uint64_t generated = 0;
    std::uint64_t sent = 0;  // acknowledged by the next hop
    std::uint64_t retry_drops = 0;
    std::uint64_t overflow_drops = 0;
    std::uint64_t replaced = 0;
    std::uint64_t queued_at_end = 0;
    std::uint64_t attempts = 0;
    std::uint64_t received_for_forwarding = 0;
    std::uint64_t forwarded = 0;
};

// One gateway delivery of a sensor packet, timed from packet creation.
struct MacDelay {
    NodeId source = kNoNode;
    Seconds delay = 0.0;
    int cycles = 0;
};

struct Attempt {
    Seconds at = 0.0;
    bool ok = false;
};

struct RunResult {
    Seconds sim_time = 0.0;
    std::vector<NodeReport> nodes;
    std::vector<DelaySample> delays;
    std::vector<NodeId> delivered_sources;  // one entry per unique gateway delivery
    std::vector<MacDelay> mac_delays;
    std::vector<std::vector<Attempt>> attempts;  // per node, only with record_attempts
    GradientTable routes;

    std::uint64_t generated = 0;
    std::uint64_t delivered = 0;
    std::uint64_t retry_drops = 0;
    std::uint64_t overflow_drops = 0;
    std::uint64_t replaced = 0;
    std::uint64_t data_collisions = 0;
    std::uint64_t status_changes = 0;
    std::uint64_t missed_changes = 0;
    std::uint64_t route_updates = 0;
    std::uint64_t events = 0;
    std::uint64_t trace_hash = 0;

    double pdr() const { return generated ? static_cast<double>(delivered) / static_cast<double>(generated) : 1.0; }
};

RunResult simulate(const EngineConfig& cfg);

}  // namespace parksim
