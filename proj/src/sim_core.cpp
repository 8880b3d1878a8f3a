#include "parksim/sim_core.hpp"

#include <cmath>
#include <limits>
#include <numbers>

namespace parksim {

const char* to_string(EventKind k) {
    switch (k) {
        case EventKind::StatusToggle: return "status-toggle";
        case EventKind::SlotBegin: return "slot-begin";
        case EventKind::BeaconEnd: return "beacon-end";
        case EventKind::DataEnd: return "data-end";
        case EventKind::RadioSwitch: return "radio-switch";
        case EventKind::AppTimer: return "app-timer";
        case EventKind::RouteUpdate: return "route-update";
    }
    return "?";
}

EventHandle Simulator::schedule(SimEvent ev) {
    if (!(ev.fire_at >= clock_))
        throw SchedulingError("event scheduled in the past: t=" + std::to_string(ev.fire_at) +
                              " clock=" + std::to_string(clock_));
    std::uint64_t seq = next_seq_++;
    queue_.push(Entry{ev.fire_at, seq, ev.target, ev.kind, std::move(ev.payload)});
    live_.insert(seq);
    return EventHandle{seq};
}

EventHandle Simulator::schedule_at(Seconds t, NodeId target, EventKind kind, std::function<void()> fn) {
    return schedule(SimEvent{t, target, kind, std::move(fn)});
}

bool Simulator::cancel(EventHandle h) {
    if (!h.valid()) return false;
    auto it = live_.find(h.seq);
    if (it == live_.end()) return false;
    live_.erase(it);
    cancelled_.insert(h.seq);
    return true;
}

std::size_t Simulator::run_until(Seconds t_end) {
    if (t_end < clock_) throw SchedulingError("run_until target precedes clock");
    std::size_t count = 0;
    while (!queue_.empty() && queue_.top().t <= t_end) {
        // top() is const; the entry is moved out before pop.
        Entry e = std::move(const_cast<Entry&>(queue_.top()));
        queue_.pop();
        if (auto c = cancelled_.find(e.seq); c != cancelled_.end()) {
            cancelled_.erase(c);
            continue;
        }
        live_.erase(e.seq);
        clock_ = e.t;
        if (trace_) trace_(TraceRecord{e.t, e.seq, e.target, e.kind});
        if (e.fn) e.fn();
        ++count;
        ++processed_;
    }
    clock_ = t_end;
    return count;
}

std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

std::uint64_t derive_seed(std::uint64_t seed, const StreamId& id) {
    std::uint64_t s = seed;
    std::uint64_t h = splitmix64(s);
    s = h ^ (static_cast<std::uint64_t>(id.batch) << 32 | id.node);
    h = splitmix64(s);
    s = h ^ static_cast<std::uint64_t>(id.purpose);
    return splitmix64(s);
}

std::uint64_t RngStream::uniform_int(std::uint64_t n) {
    if (n == 0) throw std::invalid_argument("uniform_int: n must be >= 1");
    // Lemire's nearly-divisionless method.
    unsigned __int128 m = static_cast<unsigned __int128>(engine_()) * n;
    auto low = static_cast<std::uint64_t>(m);
    if (low < n) {
        std::uint64_t threshold = (0 - n) % n;
        while (low < threshold) {
            m = static_cast<unsigned __int128>(engine_()) * n;
            low = static_cast<std::uint64_t>(m);
        }
    }
    return static_cast<std::uint64_t>(m >> 64);
}

double RngStream::exponential(double mean) {
    return -mean * std::log1p(-uniform01());
}

double RngStream::normal() {
    // Box-Muller, one value per call keeps the stream stateless.
    double u1 = 1.0 - uniform01();
    double u2 = uniform01();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

double RngStream::gamma(double shape) {
    if (shape <= 0) throw std::invalid_argument("gamma: shape must be > 0");
    if (shape < 1.0) {
        double u = 1.0 - uniform01();
        return gamma(shape + 1.0) * std::pow(u, 1.0 / shape);
    }
    // Marsaglia-Tsang
    double d = shape - 1.0 / 3.0;
    double c = 1.0 / std::sqrt(9.0 * d);
    for (;;) {
        double x = normal();
        double v = 1.0 + c * x;
        if (v <= 0) continue;
        v = v * v * v;
        double u = 1.0 - uniform01();
        if (std::log(u) < 0.5 * x * x + d - d * v + d * std::log(v)) return d * v;
    }
}

MetricStat mean_stddev(const std::vector<double>& xs) {
    MetricStat s;
    if (xs.empty()) return s;
    double sum = 0;
    for (double x : xs) sum += x;
    s.mean = sum / static_cast<double>(xs.size());
    if (xs.size() > 1) {
        double ss = 0;
        for (double x : xs) ss += (x - s.mean) * (x - s.mean);
        s.stddev = std::sqrt(ss / static_cast<double>(xs.size() - 1));
    }
    return s;
}

const MetricStat& BatchAggregate::stat(const std::string& name) const {
    for (std::size_t i = 0; i < names.size(); ++i)
        if (names[i] == name) return stats[i];
    throw std::out_of_range("unknown metric: " + name);
}

std::vector<double> BatchAggregate::column(const std::string& name) const {
    for (std::size_t i = 0; i < names.size(); ++i) {
        if (names[i] != name) continue;
        std::vector<double> col;
        for (const auto& row : per_batch) col.push_back(row[i]);
        return col;
    }
    throw std::out_of_range("unknown metric: " + name);
}

BatchAggregate aggregate_batches(const std::vector<NamedMetrics>& batches) {
    BatchAggregate agg;
    if (batches.empty()) return agg;
    for (const auto& [name, v] : batches.front()) agg.names.push_back(name);
    for (const auto& b : batches) {
        if (b.size() != agg.names.size()) throw std::runtime_error("batch metric sets differ");
        std::vector<double> row;
        for (std::size_t i = 0; i < b.size(); ++i) {
            if (b[i].first != agg.names[i]) throw std::runtime_error("batch metric order differs");
            row.push_back(b[i].second);
        }
        agg.per_batch.push_back(std::move(row));
    }
    for (std::size_t i = 0; i < agg.names.size(); ++i) agg.stats.push_back(mean_stddev(agg.column(agg.names[i])));
    return agg;
}

}  // namespace parksim
