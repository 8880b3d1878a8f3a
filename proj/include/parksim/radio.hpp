#pragma once

#include <array>
#include <cstdint>
#include <span>

#include "parksim/sim_core.hpp"

namespace parksim {

struct Point {
    double x = 0.0;
    double y = 0.0;
};

double distance(Point a, Point b);

struct RadioPowers {
    double tx_w = 65.7e-3;
    double rx_w = 56.5e-3;
    double cs_w = 55.8e-3;
    double off_w = 30e-6;
};

struct RadioParams {
    double tpo_dbm = 3.0;
    double sensitivity_dbm = -85.0;
    double data_rate_bps = 250000.0;
    double wavelength_m = 0.125;
    RadioPowers power{};
    double switch_energy_j = 0.16425e-3;
    double corner_loss_db = 20.0;
    double capture_threshold_db = 6.0;
    bool fading = true;
    double max_fade_db = 8.0;
    Seconds turnaround_s = 192e-6;
    Seconds cca_s = 128e-6;
    std::size_t control_bytes = 12;

    void validate() const;
};

Seconds airtime(std::size_t bytes, double rate_bps);

double free_space_loss_db(double d, double wavelength_m);
double path_loss_db(Point tx, Point rx, int corners, const RadioParams& radio);
// Loss along a path of the given length (used when the path bends at corners).
double path_loss_db(double path_length, int corners, const RadioParams& radio);

// Rayleigh block fading: exponential power gain with unit mean, in dB,
// clipped to radio.max_fade_db. Zero when fading is disabled.
double rayleigh_fade_db(RngStream& rng, const RadioParams& radio);

enum class LinkOutcome : std::uint8_t { Delivered, LostFade, LostCollision, BelowSensitivity };
const char* to_string(LinkOutcome o);

// mean_rx_dbm: tpo minus path loss at the receiver. interferers_dbm: received
// powers (faded) of every other frame overlapping this one at the receiver.
LinkOutcome link_delivers(double mean_rx_dbm, double fade_db, std::span<const double> interferers_dbm,
                          const RadioParams& radio);

enum class RadioState : std::uint8_t { Off = 0, Cs = 1, Rx = 2, Tx = 3 };
const char* to_string(RadioState s);
inline bool is_active(RadioState s) { return s != RadioState::Off; }

class EnergyLedger {
public:
    void accrue(RadioState s, Seconds duration);
    // Counts a switch charge only for off <-> active transitions.
    void switch_state(RadioState from, RadioState to);

    Seconds seconds(RadioState s) const { return secs_[static_cast<std::size_t>(s)]; }
    Seconds total_seconds() const;
    std::uint64_t switches() const { return switches_; }
    double joules(const RadioParams& radio) const;

private:
    std::array<Seconds, 4> secs_{};
    std::uint64_t switches_ = 0;
};

// Per-node radio state machine: a base state (off or carrier sense) with
// transmit and receive overlays. Effective state priority tx > rx > base.
class RadioTracker {
public:
    explicit RadioTracker(Seconds start = 0.0, RadioState base = RadioState::Off) : since_(start), base_(base) {}

    void set_base(Seconds now, RadioState base);
    void begin_tx(Seconds now) { change(now, [&] { ++tx_; }); }
    void end_tx(Seconds now) { change(now, [&] { --tx_; }); }
    void begin_rx(Seconds now) { change(now, [&] { ++rx_; }); }
    void end_rx(Seconds now) { change(now, [&] { --rx_; }); }
    void close(Seconds now);

    RadioState state() const;
    RadioState base() const { return base_; }
    bool awake() const { return is_active(state()); }
    bool transmitting() const { return tx_ > 0; }
    const EnergyLedger& ledger() const { return ledger_; }

private:
    template <class F>
    void change(Seconds now, F&& f) {
        RadioState before = state();
        flush(now);
        f();
        ledger_.switch_state(before, state());
    }
    void flush(Seconds now);

    EnergyLedger ledger_;
    Seconds since_;
    RadioState base_;
    int tx_ = 0;
    int rx_ = 0;
};

}  // namespace parksim
