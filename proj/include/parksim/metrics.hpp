#pragma once

#include <deque>
#include <optional>
#include <span>
#include <vector>

#include "parksim/mac.hpp"

namespace parksim {

struct DelaySample {
    NodeId sensor = kNoNode;
    Seconds status_changed_at = 0.0;
    Seconds known_at_gateway = 0.0;  // run end for censored samples
    Seconds delay = 0.0;
    int cycles_waited = 0;
    bool censored = false;
};

// counts[i] holds packets first delivered in duty cycle i+1.
struct CycleHistogram {
    std::vector<std::uint64_t> counts;
    std::uint64_t dropped = 0;

    void add(int cycle);
    std::uint64_t delivered() const;
    std::uint64_t attempts() const { return delivered() + dropped; }
};

int cycle_index(Seconds delay, Seconds t_dc);

enum class DelayPolicy : std::uint8_t { Supersede, Strict };
const char* to_string(DelayPolicy p);

class DelayTracker {
public:
    DelayTracker() = default;
    DelayTracker(std::size_t n_nodes, DelayPolicy policy) : pending_(n_nodes), latest_(n_nodes), policy_(policy) {}

    void record_status_change(NodeId sensor, Seconds t);
    // t_dc is the source's duty cycle, used for the cycle index.
    void record_gateway_reception(const Packet& p, Seconds t, Seconds t_dc);
    // Censors everything still pending.
    void finish(Seconds t_end, std::span<const Seconds> t_dc_per_node);

    const std::vector<DelaySample>& samples() const { return samples_; }
    std::uint64_t missed() const { return missed_; }
    std::uint64_t changes() const { return changes_; }

private:
    std::vector<std::deque<Seconds>> pending_;
    std::vector<Seconds> latest_;
    DelayPolicy policy_ = DelayPolicy::Supersede;
    std::vector<DelaySample> samples_;
    std::uint64_t missed_ = 0;
    std::uint64_t changes_ = 0;
};

CycleHistogram build_histogram(std::span<const DelaySample> samples, bool count_censored_as_dropped = true);

std::vector<double> estimate_cycle_probabilities(const CycleHistogram& h);

Seconds analytic_delay_schedule(double p1, Seconds t_dc);
Seconds analytic_delay_contention(double p1, double p2, Seconds t_dc);
Seconds analytic_delay_periodic(Seconds omega, double p1, double p2, Seconds t_dc);
// sum_k p_k prod_{i<k}(1 - p_i) (k - 1/2) T_dc
Seconds expected_delay_from_cycles(std::span<const double> p, Seconds t_dc);

struct InsightParams {
    std::size_t sensors = 24;
    Seconds mean_cycle = 320.0;  // mean T_p + mean T_v
    std::optional<Seconds> omega;
    Seconds slot = 0.1;
    Seconds inactive = 0.0;
};

struct Insights {
    Seconds slot_max = 0.0;                     // upper bound on T_slot
    std::optional<std::int64_t> max_periodic_nodes;  // N_m
    double threshold_nodes = 0.0;              // 0.3 * mean_cycle / 2
    bool schedule_recommended = false;
    bool boundary = false;
};

Insights insight_thresholds(const InsightParams& p);

struct SummaryStats {
    double mean = 0.0;
    double stddev = 0.0;
    std::size_t n = 0;
};
SummaryStats summarize(std::span<const double> xs);

}  // namespace parksim
