#include "parksim/radio.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace parksim {

double distance(Point a, Point b) { return std::hypot(a.x - b.x, a.y - b.y); }

void RadioParams::validate() const {
    if (!(data_rate_bps > 0)) throw std::invalid_argument("radio.data_rate_bps must be > 0");
    if (!(wavelength_m > 0)) throw std::invalid_argument("radio.wavelength_m must be > 0");
    if (power.tx_w < 0 || power.rx_w < 0 || power.cs_w < 0 || power.off_w < 0)
        throw std::invalid_argument("radio powers must be >= 0");
    if (switch_energy_j < 0) throw std::invalid_argument("radio.switch_energy_j must be >= 0");
    if (corner_loss_db < 0) throw std::invalid_argument("radio.corner_loss_db must be >= 0");
    if (capture_threshold_db < 0) throw std::invalid_argument("radio.capture_threshold_db must be >= 0");
    if (turnaround_s < 0 || cca_s < 0) throw std::invalid_argument("radio turnaround/cca must be >= 0");
    if (control_bytes == 0) throw std::invalid_argument("radio.control_bytes must be > 0");
}

Seconds airtime(std::size_t bytes, double rate_bps) {
    if (bytes == 0) throw std::invalid_argument("airtime: bytes must be > 0");
    return 8.0 * static_cast<double>(bytes) / rate_bps;
}

double free_space_loss_db(double d, double wavelength_m) {
    if (!(d > 0)) throw std::invalid_argument("path loss needs distinct positions");
    return 20.0 * std::log10(4.0 * std::numbers::pi * d / wavelength_m);
}

double path_loss_db(Point tx, Point rx, int corners, const RadioParams& radio) {
    return path_loss_db(distance(tx, rx), corners, radio);
}

double path_loss_db(double path_length, int corners, const RadioParams& radio) {
    return free_space_loss_db(path_length, radio.wavelength_m) + radio.corner_loss_db * corners;
}

double rayleigh_fade_db(RngStream& rng, const RadioParams& radio) {
    if (!radio.fading) return 0.0;
    double g = rng.exponential(1.0);
    if (g <= 0) g = 1e-300;
    return std::min(10.0 * std::log10(g), radio.max_fade_db);
}

const char* to_string(LinkOutcome o) {
    switch (o) {
        case LinkOutcome::Delivered: return "delivered";
        case LinkOutcome::LostFade: return "lost-fade";
        case LinkOutcome::LostCollision: return "lost-collision";
        case LinkOutcome::BelowSensitivity: return "below-sensitivity";
    }
    return "?";
}

LinkOutcome link_delivers(double mean_rx_dbm, double fade_db, std::span<const double> interferers_dbm,
                          const RadioParams& radio) {
    if (mean_rx_dbm + radio.max_fade_db < radio.sensitivity_dbm) return LinkOutcome::BelowSensitivity;
    double rx = mean_rx_dbm + fade_db;
    if (rx < radio.sensitivity_dbm)
        return mean_rx_dbm < radio.sensitivity_dbm ? LinkOutcome::BelowSensitivity : LinkOutcome::LostFade;
    for (double i : interferers_dbm)
        if (rx - i < radio.capture_threshold_db) return LinkOutcome::LostCollision;
    return LinkOutcome::Delivered;
}

const char* to_string(RadioState s) {
    switch (s) {
        case RadioState::Off: return "off";
        case RadioState::Cs: return "cs";
        case RadioState::Rx: return "rx";
        case RadioState::Tx: return "tx";
    }
    return "?";
}

void EnergyLedger::accrue(RadioState s, Seconds duration) {
    if (duration < 0) throw std::invalid_argument("negative duration in energy ledger");
    secs_[static_cast<std::size_t>(s)] += duration;
}

void EnergyLedger::switch_state(RadioState from, RadioState to) {
    if (is_active(from) != is_active(to)) ++switches_;
}

Seconds EnergyLedger::total_seconds() const { return secs_[0] + secs_[1] + secs_[2] + secs_[3]; }

double EnergyLedger::joules(const RadioParams& radio) const {
    const auto& p = radio.power;
    return seconds(RadioState::Tx) * p.tx_w + seconds(RadioState::Rx) * p.rx_w + seconds(RadioState::Cs) * p.cs_w +
           seconds(RadioState::Off) * p.off_w + static_cast<double>(switches_) * radio.switch_energy_j;
}

RadioState RadioTracker::state() const {
    if (tx_ > 0) return RadioState::Tx;
    if (rx_ > 0) return RadioState::Rx;
    return base_;
}

void RadioTracker::flush(Seconds now) {
    if (now < since_) throw std::invalid_argument("radio tracker time went backwards");
    ledger_.accrue(state(), now - since_);
    since_ = now;
}

void RadioTracker::set_base(Seconds now, RadioState base) {
    if (base != RadioState::Off && base != RadioState::Cs) throw std::invalid_argument("base state must be off or cs");
    change(now, [&] { base_ = base; });
}

void RadioTracker::close(Seconds now) { flush(now); }

}  // namespace parksim
