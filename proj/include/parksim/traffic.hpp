#pragma once

#include <span>
#include <stdexcept>
#include <vector>

#include "parksim/sim_core.hpp"

namespace parksim {

struct WeibullParams {
    Seconds scale = 1.0;
    double shape = 1.0;

    double mean() const;
    bool heavy_tailed() const { return shape < 1.0; }
    void validate() const;
    static WeibullParams from_mean(Seconds mean, double shape);
};

Seconds sample_weibull(const WeibullParams& p, RngStream& rng);
double weibull_survival(const WeibullParams& p, Seconds t);

enum class Occupancy : std::uint8_t { Vacant, Occupied };

inline Occupancy flip(Occupancy s) { return s == Occupancy::Vacant ? Occupancy::Occupied : Occupancy::Vacant; }
const char* to_string(Occupancy s);

struct Transition {
    Seconds next_toggle_at;
    Occupancy status;
};

class ParkingProcess {
public:
    ParkingProcess() = default;
    ParkingProcess(WeibullParams occupied, WeibullParams vacant);

    // Initial status is Bernoulli(occupancy rate). With equilibrium=false
    // the first holding time is a fresh full draw; otherwise it is drawn from
    // the stationary residual-life law.
    void start(Seconds now, RngStream& rng, bool equilibrium = false);

    // Pre: now == next_toggle_at(). Flips the status and draws the holding
    // time of the new status.
    Transition next_transition(Seconds now, RngStream& rng);

    Occupancy status() const { return status_; }
    Seconds next_toggle_at() const { return next_toggle_at_; }
    const WeibullParams& occupied() const { return occupied_; }
    const WeibullParams& vacant() const { return vacant_; }

private:
    const WeibullParams& params_for(Occupancy s) const { return s == Occupancy::Occupied ? occupied_ : vacant_; }
    Seconds residual(const WeibullParams& p, RngStream& rng) const;

    WeibullParams occupied_{};
    WeibullParams vacant_{};
    Occupancy status_ = Occupancy::Vacant;
    Seconds next_toggle_at_ = 0.0;
};

enum class TrafficMode : std::uint8_t { EventDriven, Periodic };

struct TrafficConfig {
    TrafficMode mode = TrafficMode::EventDriven;
    Seconds interval = 60.0;  // omega, periodic only
    WeibullParams occupied = WeibullParams::from_mean(160.0, 0.5);
    WeibullParams vacant = WeibullParams::from_mean(160.0, 0.5);
    bool equilibrium_start = false;

    Seconds mean_cycle() const { return occupied.mean() + vacant.mean(); }
    void validate() const;
    // Both states share the shape and half of the mean cycle each.
    static TrafficConfig event_driven(Seconds mean_cycle, double shape = 0.5);
    static TrafficConfig periodic(Seconds omega, Seconds mean_cycle = 320.0, double shape = 0.5);
};

// lambda, mu are Weibull scales; alpha, beta shapes.
double occupancy_rate(double lambda, double alpha, double mu, double beta);
double occupancy_rate(const WeibullParams& occupied, const WeibullParams& vacant);

struct SensorTraffic {
    WeibullParams occupied;
    WeibullParams vacant;
};

double expected_packet_count(std::span<const SensorTraffic> sensors, Seconds dt);

class ConvergenceError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

double delta_coefficient(int j, int k, double nu);
double log_delta_coefficient(int j, int k, double nu);

// P(N(t) = k) for a renewal process with Weibull(gamma, nu) interarrivals.
double count_probability(int k, Seconds t, Seconds gamma, double nu);

Seconds periodic_next_emit(Seconds omega, Seconds phase, Seconds now);

}  // namespace parksim
