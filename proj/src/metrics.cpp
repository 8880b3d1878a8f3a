#include "parksim/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace parksim {

void CycleHistogram::add(int cycle) {
    if (cycle < 1) throw std::invalid_argument("cycle index must be >= 1");
    if (counts.size() < static_cast<std::size_t>(cycle)) counts.resize(static_cast<std::size_t>(cycle), 0);
    ++counts[static_cast<std::size_t>(cycle - 1)];
}

std::uint64_t CycleHistogram::delivered() const {
    std::uint64_t s = 0;
    for (auto c : counts) s += c;
    return s;
}

int cycle_index(Seconds delay, Seconds t_dc) {
    if (!(t_dc > 0)) throw std::invalid_argument("duty cycle must be > 0");
    double c = std::ceil(delay / t_dc);
    return c < 1 ? 1 : static_cast<int>(c);
}

const char* to_string(DelayPolicy p) { return p == DelayPolicy::Supersede ? "supersede" : "strict"; }

void DelayTracker::record_status_change(NodeId sensor, Seconds t) {
    auto& q = pending_.at(sensor);
    if (!q.empty() && t < q.back()) throw std::invalid_argument("status changes must arrive in time order");
    q.push_back(t);
    ++changes_;
}

void DelayTracker::record_gateway_reception(const Packet& p, Seconds t, Seconds t_dc) {
    auto& q = pending_.at(p.source);
    while (!q.empty() && q.front() <= p.status_changed_at) {
        Seconds c = q.front();
        q.pop_front();
        if (policy_ == DelayPolicy::Strict && c != p.status_changed_at) {
            ++missed_;
            continue;
        }
        Seconds d = t - c;
        samples_.push_back(DelaySample{p.source, c, t, d, cycle_index(d, t_dc), false});
    }
}

void DelayTracker::finish(Seconds t_end, std::span<const Seconds> t_dc_per_node) {
    for (std::size_t s = 0; s < pending_.size(); ++s) {
        for (Seconds c : pending_[s]) {
            Seconds d = t_end - c;
            Seconds tdc = s < t_dc_per_node.size() && t_dc_per_node[s] > 0 ? t_dc_per_node[s] : 1.0;
            samples_.push_back(DelaySample{static_cast<NodeId>(s), c, t_end, d, cycle_index(d, tdc), true});
        }
        pending_[s].clear();
    }
}

CycleHistogram build_histogram(std::span<const DelaySample> samples, bool count_censored_as_dropped) {
    CycleHistogram h;
    for (const auto& s : samples) {
        if (s.censored) {
            if (count_censored_as_dropped) ++h.dropped;
        } else {
            h.add(s.cycles_waited);
        }
    }
    return h;
}

std::vector<double> estimate_cycle_probabilities(const CycleHistogram& h) {
    std::uint64_t attempts = h.attempts();
    if (attempts == 0) throw std::invalid_argument("histogram has no attempts");
    std::vector<double> p;
    std::uint64_t survivors = attempts;
    for (auto c : h.counts) {
        if (survivors == 0) break;
        p.push_back(static_cast<double>(c) / static_cast<double>(survivors));
        survivors -= c;
    }
    return p;
}

namespace {
void check_p(double p, const char* name) {
    if (!(p > 0 && p <= 1)) throw std::invalid_argument(std::string(name) + " must lie in (0, 1]");
}
}  // namespace

Seconds analytic_delay_schedule(double p1, Seconds t_dc) {
    check_p(p1, "p1");
    return t_dc * (1.0 / p1 - 0.5);
}

Seconds analytic_delay_contention(double p1, double p2, Seconds t_dc) {
    check_p(p1, "p1");
    check_p(p2, "p2");
    return t_dc * ((1.0 - p1) / p2 + 0.5);
}

Seconds analytic_delay_periodic(Seconds omega, double p1, double p2, Seconds t_dc) {
    if (!(omega > 0)) throw std::invalid_argument("omega must be > 0");
    return omega / 2.0 + analytic_delay_contention(p1, p2, t_dc);
}

Seconds expected_delay_from_cycles(std::span<const double> p, Seconds t_dc) {
    double survive = 1.0, total = 0.0;
    for (std::size_t k = 0; k < p.size(); ++k) {
        total += p[k] * survive * (static_cast<double>(k + 1) - 0.5) * t_dc;
        survive *= 1.0 - p[k];
    }
    return total;
}

Insights insight_thresholds(const InsightParams& p) {
    if (p.sensors == 0 || !(p.mean_cycle > 0) || !(p.slot > 0))
        throw std::invalid_argument("insight_thresholds: parameters must be positive");
    Insights r;
    auto n = static_cast<double>(p.sensors);
    r.slot_max = p.mean_cycle / (2.0 * n);
    if (p.omega) {
        if (!(*p.omega > 0)) throw std::invalid_argument("insight_thresholds: omega must be > 0");
        double nm = (*p.omega - p.inactive) / p.slot - 1.0;
        r.max_periodic_nodes = static_cast<std::int64_t>(std::floor(nm + 1e-9));
    }
    r.threshold_nodes = 0.3 * p.mean_cycle / 2.0;
    double tol = 1e-9 * std::max(1.0, r.threshold_nodes);
    r.boundary = std::abs(n - r.threshold_nodes) <= tol;
    r.schedule_recommended = n > r.threshold_nodes + tol;
    return r;
}

SummaryStats summarize(std::span<const double> xs) {
    SummaryStats s;
    s.n = xs.size();
    if (xs.empty()) return s;
    double sum = 0;
    for (double x : xs) sum += x;
    s.mean = sum / static_cast<double>(s.n);
    if (s.n > 1) {
        double ss = 0;
        for (double x : xs) ss += (x - s.mean) * (x - s.mean);
        s.stddev = std::sqrt(ss / static_cast<double>(s.n - 1));
    }
    return s;
}

}  // namespace parksim
