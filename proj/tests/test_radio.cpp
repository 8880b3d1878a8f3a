#include <cmath>
#include <vector>

#include "doctest.h"
#include "parksim/radio.hpp"
#include "support.hpp"

using namespace parksim;

TEST_CASE("table defaults") {
    RadioParams r;
    CHECK(r.tpo_dbm == 3.0);
    CHECK(r.sensitivity_dbm == -85.0);
    CHECK(r.data_rate_bps == 250000.0);
    CHECK(r.wavelength_m == 0.125);
    CHECK(r.power.tx_w == doctest::Approx(65.7e-3));
    CHECK(r.power.rx_w == doctest::Approx(56.5e-3));
    CHECK(r.power.cs_w == doctest::Approx(55.8e-3));
    CHECK(r.power.off_w == doctest::Approx(30e-6));
    CHECK(r.switch_energy_j == doctest::Approx(0.16425e-3));
}

TEST_CASE("airtime") {
    CHECK(airtime(84, 250000) == doctest::Approx(2.688e-3));
    CHECK(airtime(12, 250000) == doctest::Approx(0.384e-3));
    CHECK(airtime(168, 250000) == doctest::Approx(2 * airtime(84, 250000)));
    CHECK_THROWS(airtime(0, 250000));
}

TEST_CASE("path loss") {
    RadioParams r;
    double oracle = 20 * std::log10(4 * 3.14159265358979 * 10 / 0.125);
    CHECK(path_loss_db({0, 0}, {10, 0}, 0, r) == doctest::Approx(oracle));
    CHECK(path_loss_db({0, 0}, {10, 0}, 0, r) == doctest::Approx(60.05).epsilon(1e-4));
    CHECK(path_loss_db({0, 0}, {10, 0}, 1, r) == doctest::Approx(80.05).epsilon(1e-4));
    CHECK(path_loss_db({0, 0}, {20, 0}, 0, r) - path_loss_db({0, 0}, {10, 0}, 0, r) ==
          doctest::Approx(6.0206).epsilon(1e-4));
    CHECK_THROWS(path_loss_db({1, 1}, {1, 1}, 0, r));
}

TEST_CASE("link budget outcomes") {
    RadioParams r;
    double mean = r.tpo_dbm - path_loss_db({0, 0}, {10, 0}, 0, r);
    CHECK(mean == doctest::Approx(-57.05).epsilon(1e-4));
    CHECK(link_delivers(mean, 0.0, {}, r) == LinkOutcome::Delivered);

    std::vector<double> equal{mean};
    CHECK(link_delivers(mean, 0.0, equal, r) == LinkOutcome::LostCollision);

    double weak = -7.0 - path_loss_db({0, 0}, {200, 0}, 0, r);
    CHECK(weak == doctest::Approx(-93.07).epsilon(1e-3));
    CHECK(link_delivers(weak, r.max_fade_db, {}, r) == LinkOutcome::BelowSensitivity);

    CHECK(link_delivers(-80.0, -10.0, {}, r) == LinkOutcome::LostFade);
    std::vector<double> faint{mean - 6.0};
    CHECK(link_delivers(mean, 0.0, faint, r) == LinkOutcome::Delivered);
}

TEST_CASE("fading statistics on an isolated link") {
    RadioParams r;
    RngStream rng(4, {0, 0, StreamPurpose::Fading});
    for (double margin : {1.0, 3.0, 10.0}) {
        const int n = 10000;
        int ok = 0;
        for (int i = 0; i < n; ++i)
            ok += link_delivers(r.sensitivity_dbm + margin, rayleigh_fade_db(rng, r), {}, r) == LinkOutcome::Delivered;
        // Exponential power gain: P(gain >= 10^(-margin/10)).
        double p = std::exp(-std::pow(10.0, -margin / 10.0));
        CHECK(testsupport::within_binomial(ok / double(n), p, n));
    }
    RadioParams nofade = r;
    nofade.fading = false;
    CHECK(rayleigh_fade_db(rng, nofade) == 0.0);
    for (int i = 0; i < 10000; ++i) REQUIRE(rayleigh_fade_db(rng, r) <= r.max_fade_db);
}

TEST_CASE("property: capture consistency") {
    RadioParams r;
    testsupport::Gen g(17);
    for (int i = 0; i < 20000; ++i) {
        double mean = g.range(-95, -40), fade = g.range(-20, 8);
        std::vector<double> intf;
        int k = g.between(0, 3);
        for (int j = 0; j < k; ++j) intf.push_back(g.range(-100, -40));
        if (link_delivers(mean, fade, intf, r) == LinkOutcome::Delivered) {
            REQUIRE(mean + fade >= r.sensitivity_dbm);
            for (double x : intf) REQUIRE(mean + fade - x >= r.capture_threshold_db);
        }
    }
}

TEST_CASE("energy ledger accrual and switch charges") {
    RadioParams r;
    EnergyLedger tx;
    tx.accrue(RadioState::Tx, 2.688e-3);
    CHECK(tx.joules(r) == doctest::Approx(1.766e-4).epsilon(1e-3));
    EnergyLedger off;
    off.accrue(RadioState::Off, 1.0);
    CHECK(off.joules(r) == doctest::Approx(3e-5));
    EnergyLedger sw;
    sw.switch_state(RadioState::Rx, RadioState::Cs);
    CHECK(sw.switches() == 0);
    sw.switch_state(RadioState::Off, RadioState::Rx);
    CHECK(sw.switches() == 1);
    CHECK(sw.joules(r) == doctest::Approx(0.16425e-3));
    CHECK_THROWS(sw.accrue(RadioState::Cs, -1.0));
}

TEST_CASE("tracker state priority") {
    RadioTracker t(0.0, RadioState::Off);
    CHECK(t.state() == RadioState::Off);
    t.begin_rx(1.0);
    CHECK(t.state() == RadioState::Rx);
    t.begin_tx(1.5);
    CHECK(t.state() == RadioState::Tx);
    t.end_tx(2.0);
    t.end_rx(2.5);
    t.set_base(3.0, RadioState::Cs);
    t.close(4.0);
    const auto& l = t.ledger();
    CHECK(l.seconds(RadioState::Off) == doctest::Approx(1.0 + 0.5));
    CHECK(l.seconds(RadioState::Rx) == doctest::Approx(0.5 + 0.5));
    CHECK(l.seconds(RadioState::Tx) == doctest::Approx(0.5));
    CHECK(l.seconds(RadioState::Cs) == doctest::Approx(1.0));
    // off->rx, rx->off, off->cs
    CHECK(l.switches() == 3);
    CHECK_THROWS(t.set_base(5.0, RadioState::Tx));
}

TEST_CASE("property: ledger closure and monotone energy") {
    RadioParams r;
    for (std::uint64_t seed = 1; seed <= 30; ++seed) {
        testsupport::Gen g(seed);
        RadioTracker t(0.0, g.unit() < 0.5 ? RadioState::Off : RadioState::Cs);
        Seconds now = 0;
        int tx = 0, rx = 0;
        double last_j = 0;
        for (int i = 0; i < 500; ++i) {
            now += g.range(0, 0.01);
            int op = g.between(0, 5);
            if (op == 0) t.set_base(now, g.unit() < 0.5 ? RadioState::Off : RadioState::Cs);
            if (op == 1) t.begin_tx(now), ++tx;
            if (op == 2 && tx > 0) t.end_tx(now), --tx;
            if (op == 3) t.begin_rx(now), ++rx;
            if (op == 4 && rx > 0) t.end_rx(now), --rx;
            RadioTracker snap = t;
            snap.close(now);
            double j = snap.ledger().joules(r);
            REQUIRE(j >= last_j - 1e-15);
            last_j = j;
        }
        t.close(now + 1.0);
        CHECK(t.ledger().total_seconds() == doctest::Approx(now + 1.0).epsilon(1e-12));
        CHECK(std::abs(t.ledger().total_seconds() - (now + 1.0)) < 1e-9);
    }
}
