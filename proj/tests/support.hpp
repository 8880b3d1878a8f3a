#pragma once

#include <cmath>
#include <cstdint>

#include "parksim/scenario.hpp"

namespace testsupport {

// Small xorshift generator for property-test inputs, independent of the
// library's own streams.
struct Gen {
    std::uint64_t s;
    explicit Gen(std::uint64_t seed) : s(seed * 0x9e3779b97f4a7c15ULL + 1) {}
    std::uint64_t next() {
        s ^= s << 13;
        s ^= s >> 7;
        s ^= s << 17;
        return s;
    }
    double unit() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }
    double range(double a, double b) { return a + (b - a) * unit(); }
    int between(int lo, int hi) { return lo + static_cast<int>(next() % static_cast<std::uint64_t>(hi - lo + 1)); }
};

// |x - p| within k binomial standard deviations of a proportion over n trials.
inline bool within_binomial(double x, double p, double n, double k = 3.0) {
    return std::abs(x - p) <= k * std::sqrt(p * (1 - p) / n) + 1e-12;
}

inline parksim::EngineConfig cell_config(int n, parksim::MacMode mode, double sim_time = 20000.0,
                                         std::uint64_t seed = 7) {
    parksim::EngineConfig c;
    c.topology = parksim::build_cross_topology(n);
    c.mac.mode = mode;
    c.traffic = parksim::TrafficConfig::event_driven(320.0);
    c.sim_time = sim_time;
    c.seed = seed;
    return c;
}

}  // namespace testsupport
