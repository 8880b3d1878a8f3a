#pragma once

#include <algorithm>
#include <cstddef>
#include <exception>
#include <cstdint>
#include <functional>
#include <queue>
#include <random>
#include <stdexcept>
#include <string>
#include <thread>
#include <unordered_set>
#include <utility>
#include <vector>

namespace parksim {

using Seconds = double;
using NodeId = std::uint32_t;

inline constexpr NodeId kNoNode = 0xffffffffu;

enum class EventKind : std::uint8_t {
    StatusToggle,
    SlotBegin,
    BeaconEnd,
    DataEnd,
    RadioSwitch,
    AppTimer,
    RouteUpdate,
};

const char* to_string(EventKind k);

struct SimEvent {
    Seconds fire_at = 0.0;
    NodeId target = kNoNode;
    EventKind kind = EventKind::AppTimer;
    std::function<void()> payload;
};

struct EventHandle {
    std::uint64_t seq = 0;
    bool valid() const { return seq != 0; }
};

class SchedulingError : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

// Trace record handed to an optional observer before each event runs.
struct TraceRecord {
    Seconds time;
    std::uint64_t seq;
    NodeId target;
    EventKind kind;
};

class Simulator {
public:
    Seconds now() const { return clock_; }

    EventHandle schedule(SimEvent ev);
    EventHandle schedule_at(Seconds t, NodeId target, EventKind kind, std::function<void()> fn);
    EventHandle schedule_in(Seconds dt, NodeId target, EventKind kind, std::function<void()> fn) {
        return schedule_at(clock_ + dt, target, kind, std::move(fn));
    }

    // Returns false if the event already fired, was cancelled or is unknown.
    bool cancel(EventHandle h);

    std::size_t run_until(Seconds t_end);

    std::size_t pending() const { return queue_.size() - cancelled_.size(); }
    std::uint64_t processed() const { return processed_; }

    void set_trace(std::function<void(const TraceRecord&)> fn) { trace_ = std::move(fn); }

private:
    struct Entry {
        Seconds t;
        std::uint64_t seq;
        NodeId target;
        EventKind kind;
        std::function<void()> fn;
    };
    struct Later {
        bool operator()(const Entry& a, const Entry& b) const {
            if (a.t != b.t) return a.t > b.t;
            return a.seq > b.seq;
        }
    };

    Seconds clock_ = 0.0;
    std::uint64_t next_seq_ = 1;
    std::uint64_t processed_ = 0;
    std::priority_queue<Entry, std::vector<Entry>, Later> queue_;
    std::unordered_set<std::uint64_t> live_;
    std::unordered_set<std::uint64_t> cancelled_;
    std::function<void(const TraceRecord&)> trace_;
};

// Random streams

enum class StreamPurpose : std::uint32_t {
    Traffic = 1,
    InitialStatus = 2,
    PeriodicPhase = 3,
    Backoff = 4,
    Fading = 5,
    CellPhase = 6,
    Test = 99,
};

struct StreamId {
    std::uint32_t batch = 0;
    NodeId node = 0;
    StreamPurpose purpose = StreamPurpose::Test;
};

std::uint64_t splitmix64(std::uint64_t& state);
std::uint64_t derive_seed(std::uint64_t seed, const StreamId& id);

class RngStream {
public:
    RngStream() : RngStream(0, StreamId{}) {}
    RngStream(std::uint64_t seed, StreamId id) : engine_(derive_seed(seed, id)) {}

    std::uint64_t next_u64() { return engine_(); }
    // Uniform on [0, 1) with 53 random bits.
    double uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
    double uniform(double a, double b) { return a + (b - a) * uniform01(); }
    // Uniform integer in [0, n), n >= 1.
    std::uint64_t uniform_int(std::uint64_t n);
    double exponential(double mean = 1.0);
    double normal();
    double gamma(double shape);
    bool bernoulli(double p) { return uniform01() < p; }

private:
    std::mt19937_64 engine_;
};

// Batch statistics

struct MetricStat {
    double mean = 0.0;
    double stddev = 0.0;
};

MetricStat mean_stddev(const std::vector<double>& xs);

using NamedMetrics = std::vector<std::pair<std::string, double>>;

struct BatchAggregate {
    std::vector<std::string> names;
    std::vector<std::vector<double>> per_batch;  // [batch][metric]
    std::vector<MetricStat> stats;               // per metric

    const MetricStat& stat(const std::string& name) const;
    std::vector<double> column(const std::string& name) const;
};

BatchAggregate aggregate_batches(const std::vector<NamedMetrics>& batches);

// Runs fn(batch) for batch in [0, n). Results are stored by batch index, so
// the outcome does not depend on the worker count.
template <class R, class F>
std::vector<R> run_indexed(std::size_t n, unsigned workers, F&& fn) {
    std::vector<R> out(n);
    if (workers <= 1 || n <= 1) {
        for (std::size_t b = 0; b < n; ++b) out[b] = fn(b);
        return out;
    }
    std::vector<std::exception_ptr> errors(n);
    std::vector<std::thread> pool;
    std::size_t w = std::min<std::size_t>(workers, n);
    for (std::size_t k = 0; k < w; ++k) {
        pool.emplace_back([&, k] {
            for (std::size_t b = k; b < n; b += w) {
                try {
                    out[b] = fn(b);
                } catch (...) {
                    errors[b] = std::current_exception();
                }
            }
        });
    }
    for (auto& t : pool) t.join();
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
    return out;
}

// Repeats run_one(batch, base_seed) for each batch and aggregates the named
// metrics it returns.
template <class F>
BatchAggregate run_batches(F&& run_one, std::size_t batches, std::uint64_t base_seed, unsigned workers = 1) {
    if (batches < 1) throw std::invalid_argument("batches must be >= 1");
    auto per = run_indexed<NamedMetrics>(batches, workers, [&](std::size_t b) {
        return run_one(static_cast<std::uint32_t>(b), base_seed);
    });
    return aggregate_batches(per);
}

}  // namespace parksim
