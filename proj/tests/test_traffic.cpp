#include <cmath>
#include <numeric>
#include <vector>

#include "doctest.h"
#include "parksim/traffic.hpp"
#include "support.hpp"

using namespace parksim;

namespace {
RngStream stream(std::uint32_t node = 0) { return RngStream(2024, {0, node, StreamPurpose::Test}); }

double sample_mean(const WeibullParams& p, int n, RngStream& r) {
    double s = 0;
    for (int i = 0; i < n; ++i) s += sample_weibull(p, r);
    return s / n;
}
}  // namespace

TEST_CASE("weibull mean and heavy tail flag") {
    CHECK(WeibullParams{100.0, 1.0}.mean() == doctest::Approx(100.0));
    CHECK(WeibullParams{100.0, 0.5}.mean() == doctest::Approx(200.0));
    CHECK(WeibullParams{100.0, 0.5}.heavy_tailed());
    CHECK_FALSE(WeibullParams{100.0, 1.0}.heavy_tailed());
    CHECK(WeibullParams::from_mean(160.0, 0.5).scale == doctest::Approx(80.0));
    CHECK_THROWS(WeibullParams{0.0, 1.0}.validate());
    CHECK_THROWS(WeibullParams{1.0, -1.0}.validate());
}

TEST_CASE("weibull sampler: exponential special case") {
    auto r = stream();
    CHECK(sample_mean({50.0, 1.0}, 1000000, r) == doctest::Approx(50.0).epsilon(0.01));
}

TEST_CASE("weibull sampler: shape 0.5 mean is twice the scale") {
    auto r = stream(1);
    CHECK(sample_mean({50.0, 0.5}, 1000000, r) == doctest::Approx(100.0).epsilon(0.02));
}

TEST_CASE("weibull sampler: CDF at the scale is 1 - 1/e for any shape") {
    for (double shape : {0.3, 0.5, 1.0, 2.0}) {
        auto r = stream(static_cast<std::uint32_t>(shape * 10));
        const int n = 200000;
        int below = 0;
        for (int i = 0; i < n; ++i) below += sample_weibull({40.0, shape}, r) <= 40.0;
        CHECK(std::abs(below / double(n) - (1 - std::exp(-1.0))) < 0.01);
        CHECK(weibull_survival({40.0, shape}, 40.0) == doctest::Approx(std::exp(-1.0)));
    }
}

TEST_CASE("parking process alternates and always moves forward") {
    ParkingProcess p(WeibullParams{80.0, 0.5}, WeibullParams{80.0, 0.5});
    auto r = stream(3);
    p.start(0.0, r);
    Occupancy s = p.status();
    Seconds now = 0;
    for (int i = 0; i < 100000; ++i) {
        Seconds t = p.next_toggle_at();
        REQUIRE(t > now);
        now = t;
        auto tr = p.next_transition(now, r);
        REQUIRE(tr.status == flip(s));
        REQUIRE(tr.next_toggle_at > now);
        s = tr.status;
    }
}

TEST_CASE("vacant to occupied draws the occupied holding time") {
    WeibullParams occ{300.0, 0.5}, vac{100.0, 1.0};
    ParkingProcess p(occ, vac);
    auto r = stream(4);
    p.start(0.0, r);
    if (p.status() == Occupancy::Occupied) p.next_transition(p.next_toggle_at(), r);
    REQUIRE(p.status() == Occupancy::Vacant);
    Seconds t = p.next_toggle_at();
    RngStream copy = r;
    auto tr = p.next_transition(t, r);
    CHECK(tr.status == Occupancy::Occupied);
    CHECK(tr.next_toggle_at == t + sample_weibull(occ, copy));
}

TEST_CASE("occupancy rate examples") {
    CHECK(occupancy_rate(100, 0.7, 100, 0.7) == doctest::Approx(0.5));
    CHECK(occupancy_rate(300, 0.5, 100, 1.0) == doctest::Approx(600.0 / 700.0));
    CHECK_THROWS(occupancy_rate(0, 1, 1, 1));
}

TEST_CASE("long-run occupied fraction matches the occupancy rate") {
    WeibullParams occ{300.0, 0.5}, vac{100.0, 1.0};
    ParkingProcess p(occ, vac);
    auto r = stream(5);
    p.start(0.0, r, true);
    const Seconds horizon = 1e6;
    Seconds now = 0, occupied = 0;
    while (now < horizon) {
        Seconds t = std::min(p.next_toggle_at(), horizon);
        if (p.status() == Occupancy::Occupied) occupied += t - now;
        now = t;
        if (now < horizon) p.next_transition(now, r);
    }
    CHECK(std::abs(occupied / horizon - occupancy_rate(occ, vac)) < 0.02);
}

TEST_CASE("renewal consistency: mean turnover equals mean T_p + mean T_v") {
    for (double shape : {0.5, 1.0}) {
        WeibullParams occ = WeibullParams::from_mean(120.0, shape), vac = WeibullParams::from_mean(200.0, shape);
        ParkingProcess p(occ, vac);
        auto r = stream(6);
        p.start(0.0, r);
        while (p.status() != Occupancy::Vacant) p.next_transition(p.next_toggle_at(), r);
        // Turnover: vacant start to next vacant start.
        std::vector<double> z;
        Seconds start = p.next_toggle_at();
        p.next_transition(start, r);
        while (z.size() < 20000) {
            p.next_transition(p.next_toggle_at(), r);  // to vacant
            Seconds end = p.next_toggle_at();
            p.next_transition(end, r);  // to occupied
            z.push_back(end - start);
            start = end;
        }
        double mean = std::accumulate(z.begin(), z.end(), 0.0) / z.size();
        double var = 0;
        for (double v : z) var += (v - mean) * (v - mean);
        double se = std::sqrt(var / (z.size() - 1) / z.size());
        CHECK(std::abs(mean - 320.0) <= 3 * se);
    }
}

namespace {
std::vector<int> window_counts(double shape, Seconds window, int windows, std::uint32_t node) {
    auto tc = TrafficConfig::event_driven(320.0, shape);
    ParkingProcess p(tc.occupied, tc.vacant);
    auto r = stream(node);
    p.start(0.0, r, true);
    std::vector<int> counts(static_cast<std::size_t>(windows), 0);
    const Seconds horizon = window * windows;
    while (p.next_toggle_at() < horizon) {
        Seconds t = p.next_toggle_at();
        ++counts[static_cast<std::size_t>(t / window)];
        p.next_transition(t, r);
    }
    return counts;
}

double variance(const std::vector<int>& v) {
    double m = std::accumulate(v.begin(), v.end(), 0.0) / v.size();
    double s = 0;
    for (int x : v) s += (x - m) * (x - m);
    return s / (v.size() - 1);
}
}  // namespace

TEST_CASE("toggle count over a window follows 2 dt / mean cycle") {
    // Many independent stationary windows of one day each.
    const int runs = 2000;
    const Seconds dt = 86400;
    auto tc = TrafficConfig::event_driven(400.0, 0.5);
    std::vector<double> c;
    for (int i = 0; i < runs; ++i) {
        ParkingProcess p(tc.occupied, tc.vacant);
        RngStream r(77, {static_cast<std::uint32_t>(i), 0, StreamPurpose::Traffic});
        p.start(0.0, r, true);
        int n = 0;
        while (p.next_toggle_at() <= dt) {
            ++n;
            p.next_transition(p.next_toggle_at(), r);
        }
        c.push_back(n);
    }
    double mean = std::accumulate(c.begin(), c.end(), 0.0) / runs;
    double var = 0;
    for (double x : c) var += (x - mean) * (x - mean);
    double se = std::sqrt(var / (runs - 1) / runs);
    CHECK(std::abs(mean - 2 * dt / 400.0) <= 3 * se);
}

TEST_CASE("burstiness: heavier tail gives more variable window counts") {
    auto heavy = window_counts(0.5, 3600, 2000, 8);
    auto light = window_counts(1.0, 3600, 2000, 8);
    CHECK(variance(heavy) > variance(light));
}

TEST_CASE("expected packet count") {
    std::vector<SensorTraffic> s(24, SensorTraffic{{100.0, 0.5}, {100.0, 0.5}});
    CHECK(expected_packet_count(s, 86400) == doctest::Approx(10368.0));
    CHECK(expected_packet_count(std::span<const SensorTraffic>{}, 86400) == 0.0);
    CHECK(expected_packet_count(s, 2 * 86400) == doctest::Approx(2 * expected_packet_count(s, 86400)));
    CHECK_THROWS(expected_packet_count(s, 0));
}

namespace {
// Plain double recursion, independent of the library's log-space table.
double delta_oracle(int j, int k, double nu) {
    if (k == 0) return std::tgamma(nu * j + 1) / std::tgamma(j + 1.0);
    double s = 0;
    for (int m = k - 1; m <= j - 1; ++m)
        s += delta_oracle(m, k - 1, nu) * std::tgamma(nu * (j - m) + 1) / std::tgamma(j - m + 1.0);
    return s;
}
}  // namespace

TEST_CASE("delta coefficients") {
    for (int j = 0; j <= 20; ++j) {
        CHECK(delta_coefficient(j, 0, 1.0) == doctest::Approx(1.0));
        if (j >= 1) CHECK(delta_coefficient(j, 1, 1.0) == doctest::Approx(j));
    }
    CHECK(delta_coefficient(1, 1, 0.5) == doctest::Approx(std::tgamma(1.5) / std::tgamma(2.0)));
    for (double nu : {0.3, 0.5, 0.8})
        for (int k = 0; k <= 4; ++k)
            for (int j = k; j <= 10; ++j) CHECK(delta_coefficient(j, k, nu) == doctest::Approx(delta_oracle(j, k, nu)));
    CHECK_THROWS(delta_coefficient(2, 3, 0.5));
    CHECK_THROWS(delta_coefficient(2, 1, 1.5));
}

TEST_CASE("count probability reductions") {
    for (double x : {0.1, 0.5, 1.0, 2.5, 5.0}) {
        for (int k = 0; k <= 10; ++k) {
            double pois = std::exp(-x) * std::pow(x, k) / std::tgamma(k + 1.0);
            CHECK(std::abs(count_probability(k, x * 10, 10, 1.0) - pois) < 1e-9);
        }
        for (double nu : {0.4, 0.5, 0.75})
            CHECK(std::abs(count_probability(0, x * 10, 10, nu) - std::exp(-std::pow(x, nu))) < 1e-9);
    }
}

TEST_CASE("count probabilities sum to one") {
    for (double nu : {0.5, 1.0}) {
        double s = 0;
        for (int k = 0; k <= 60; ++k) s += count_probability(k, 20, 10, nu);
        CHECK(s > 1 - 1e-6);
        CHECK(s < 1 + 1e-6);
    }
}

TEST_CASE("count probability agrees with sampled renewal paths") {
    const double gamma = 10, t = 15;
    const int paths = 100000;
    for (double nu : {0.5, 1.0}) {
        auto r = stream(static_cast<std::uint32_t>(100 * nu));
        std::vector<int> hist(8, 0);
        for (int i = 0; i < paths; ++i) {
            int k = 0;
            Seconds now = sample_weibull({gamma, nu}, r);
            while (now <= t) {
                ++k;
                now += sample_weibull({gamma, nu}, r);
            }
            if (k < 8) ++hist[static_cast<std::size_t>(k)];
        }
        for (int k = 0; k <= 5; ++k) {
            double p = count_probability(k, t, gamma, nu);
            CHECK(testsupport::within_binomial(hist[static_cast<std::size_t>(k)] / double(paths), p, paths));
        }
    }
}

TEST_CASE("count series signals non-convergence") {
    CHECK_THROWS_AS(count_probability(0, 1e6, 1.0, 0.5), ConvergenceError);
    CHECK_THROWS(count_probability(-1, 1, 1, 0.5));
    CHECK_THROWS(count_probability(0, 0, 1, 0.5));
}

TEST_CASE("periodic emission times") {
    CHECK(periodic_next_emit(60, 0, 0) == 60);
    CHECK(periodic_next_emit(60, 12.5, 100) == 132.5);
    CHECK(periodic_next_emit(60, 12.5, 132.5) == 192.5);
    CHECK_THROWS(periodic_next_emit(60, 60, 0));
    CHECK_THROWS(periodic_next_emit(0, 0, 0));
    testsupport::Gen g(3);
    for (int i = 0; i < 50; ++i) {
        double phase = g.range(0, 60);
        int n = 0;
        for (Seconds t = periodic_next_emit(60, phase, 0); t <= 86400; t = periodic_next_emit(60, phase, t)) ++n;
        CHECK(n == 1440);
    }
}
