#include "parksim/traffic.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <memory>
#include <mutex>
#include <string>

namespace parksim {

double WeibullParams::mean() const { return scale * std::tgamma(1.0 + 1.0 / shape); }

void WeibullParams::validate() const {
    if (!(scale > 0) || !std::isfinite(scale)) throw std::invalid_argument("weibull scale must be > 0");
    if (!(shape > 0) || !std::isfinite(shape)) throw std::invalid_argument("weibull shape must be > 0");
}

WeibullParams WeibullParams::from_mean(Seconds mean, double shape) {
    WeibullParams p{mean / std::tgamma(1.0 + 1.0 / shape), shape};
    p.validate();
    return p;
}

Seconds sample_weibull(const WeibullParams& p, RngStream& rng) {
    for (;;) {
        double e = -std::log(1.0 - rng.uniform01());
        double x = p.scale * std::pow(e, 1.0 / p.shape);
        if (x > 0) return x;
    }
}

double weibull_survival(const WeibullParams& p, Seconds t) {
    if (t <= 0) return 1.0;
    return std::exp(-std::pow(t / p.scale, p.shape));
}

const char* to_string(Occupancy s) { return s == Occupancy::Occupied ? "occupied" : "vacant"; }

ParkingProcess::ParkingProcess(WeibullParams occupied, WeibullParams vacant)
    : occupied_(occupied), vacant_(vacant) {
    occupied_.validate();
    vacant_.validate();
}

Seconds ParkingProcess::residual(const WeibullParams& p, RngStream& rng) const {
    // Length-biased holding time: (L/scale)^shape ~ Gamma(1 + 1/shape).
    double g = rng.gamma(1.0 + 1.0 / p.shape);
    double len = p.scale * std::pow(g, 1.0 / p.shape);
    double r = len * (1.0 - rng.uniform01());
    return r > 0 ? r : len;
}

void ParkingProcess::start(Seconds now, RngStream& rng, bool equilibrium) {
    status_ = rng.bernoulli(occupancy_rate(occupied_, vacant_)) ? Occupancy::Occupied : Occupancy::Vacant;
    const auto& p = params_for(status_);
    next_toggle_at_ = now + (equilibrium ? residual(p, rng) : sample_weibull(p, rng));
}

Transition ParkingProcess::next_transition(Seconds now, RngStream& rng) {
    status_ = flip(status_);
    Seconds d = sample_weibull(params_for(status_), rng);
    next_toggle_at_ = now + d;
    // Guard against a duration lost to rounding at large clock values.
    if (!(next_toggle_at_ > now)) next_toggle_at_ = std::nextafter(now, std::numeric_limits<double>::infinity());
    return {next_toggle_at_, status_};
}

void TrafficConfig::validate() const {
    if (mode == TrafficMode::Periodic && !(interval > 0)) throw std::invalid_argument("periodic interval must be > 0");
    occupied.validate();
    vacant.validate();
}

TrafficConfig TrafficConfig::event_driven(Seconds mean_cycle, double shape) {
    TrafficConfig c;
    c.mode = TrafficMode::EventDriven;
    c.occupied = WeibullParams::from_mean(mean_cycle / 2.0, shape);
    c.vacant = c.occupied;
    return c;
}

TrafficConfig TrafficConfig::periodic(Seconds omega, Seconds mean_cycle, double shape) {
    TrafficConfig c = event_driven(mean_cycle, shape);
    c.mode = TrafficMode::Periodic;
    c.interval = omega;
    return c;
}

double occupancy_rate(double lambda, double alpha, double mu, double beta) {
    if (!(lambda > 0 && alpha > 0 && mu > 0 && beta > 0))
        throw std::invalid_argument("occupancy_rate: parameters must be > 0");
    double tp = lambda * std::tgamma(1.0 + 1.0 / alpha);
    double tv = mu * std::tgamma(1.0 + 1.0 / beta);
    return tp / (tp + tv);
}

double occupancy_rate(const WeibullParams& occupied, const WeibullParams& vacant) {
    return occupancy_rate(occupied.scale, occupied.shape, vacant.scale, vacant.shape);
}

double expected_packet_count(std::span<const SensorTraffic> sensors, Seconds dt) {
    if (!(dt > 0)) throw std::invalid_argument("expected_packet_count: dt must be > 0");
    double total = 0;
    for (const auto& s : sensors) total += 2.0 * dt / (s.occupied.mean() + s.vacant.mean());
    return total;
}

// Count model coefficients

namespace {

constexpr int kMaxTerms = 500;
constexpr double kTermTol = 1e-12;
constexpr double kMaxTermMagnitude = 1e7;

double log_sum_exp(const std::vector<double>& xs) {
    double mx = -std::numeric_limits<double>::infinity();
    for (double x : xs) mx = std::max(mx, x);
    if (!std::isfinite(mx)) return mx;
    double s = 0;
    for (double x : xs) s += std::exp(x - mx);
    return mx + std::log(s);
}

// log Delta_j^k for one nu, rows extended on demand. All coefficients are
// positive so the recursion runs in log space without cancellation.
class DeltaTable {
public:
    explicit DeltaTable(double nu) : nu_(nu) {}

    double log_delta(int j, int k) {
        std::lock_guard<std::mutex> lock(mu_);
        ensure(j, k);
        return rows_[static_cast<std::size_t>(k)][static_cast<std::size_t>(j - k)];
    }

private:
    double lg_nu(int d) {
        while (static_cast<int>(lg_nu_.size()) <= d) {
            double x = static_cast<double>(lg_nu_.size());
            lg_nu_.push_back(std::lgamma(nu_ * x + 1.0));
            lg_int_.push_back(std::lgamma(x + 1.0));
        }
        return lg_nu_[static_cast<std::size_t>(d)];
    }
    double lg_int(int d) {
        lg_nu(d);
        return lg_int_[static_cast<std::size_t>(d)];
    }

    // rows_[k][j-k] = log Delta_j^k
    void ensure(int j, int k) {
        while (static_cast<int>(rows_.size()) <= k) rows_.emplace_back();
        for (int kk = 0; kk <= k; ++kk) {
            auto& row = rows_[static_cast<std::size_t>(kk)];
            while (kk + static_cast<int>(row.size()) <= j) {
                int jj = kk + static_cast<int>(row.size());
                if (kk == 0) {
                    row.push_back(lg_nu(jj) - lg_int(jj));
                } else {
                    auto& prev = rows_[static_cast<std::size_t>(kk - 1)];
                    std::vector<double> terms;
                    terms.reserve(static_cast<std::size_t>(jj - kk + 1));
                    for (int m = kk - 1; m <= jj - 1; ++m) {
                        double ld = prev[static_cast<std::size_t>(m - (kk - 1))];
                        // Gamma(nu*j - nu*m + 1) / Gamma(j - m + 1)
                        terms.push_back(ld + lg_nu(jj - m) - lg_int(jj - m));
                    }
                    row.push_back(log_sum_exp(terms));
                }
            }
        }
    }

    double nu_;
    std::mutex mu_;
    std::vector<double> lg_nu_, lg_int_;
    std::vector<std::vector<double>> rows_;
};

DeltaTable& table_for(double nu) {
    static std::mutex registry_mu;
    static std::map<double, std::unique_ptr<DeltaTable>> registry;
    std::lock_guard<std::mutex> lock(registry_mu);
    auto& slot = registry[nu];
    if (!slot) slot = std::make_unique<DeltaTable>(nu);
    return *slot;
}

void check_nu(double nu) {
    if (!(nu > 0 && nu <= 1)) throw std::invalid_argument("nu must lie in (0, 1]");
}

}  // namespace

double log_delta_coefficient(int j, int k, double nu) {
    if (k < 0 || j < k) throw std::invalid_argument("delta_coefficient requires j >= k >= 0");
    check_nu(nu);
    return table_for(nu).log_delta(j, k);
}

double delta_coefficient(int j, int k, double nu) { return std::exp(log_delta_coefficient(j, k, nu)); }

double count_probability(int k, Seconds t, Seconds gamma, double nu) {
    if (k < 0) throw std::invalid_argument("count_probability: k must be >= 0");
    if (!(t > 0 && gamma > 0)) throw std::invalid_argument("count_probability: t and gamma must be > 0");
    check_nu(nu);
    auto& table = table_for(nu);
    double lx = std::log(t / gamma);
    double sum = 0, comp = 0;
    double prev_mag = std::numeric_limits<double>::infinity();
    double max_mag = 0;
    for (int j = k; j < k + kMaxTerms; ++j) {
        double lmag = nu * j * lx + table.log_delta(j, k) - std::lgamma(nu * j + 1.0);
        double mag = std::exp(lmag);
        max_mag = std::max(max_mag, mag);
        if (max_mag > kMaxTermMagnitude)
            throw ConvergenceError("count series cancellation too severe at t/gamma=" + std::to_string(t / gamma));
        double term = ((j - k) % 2 == 0) ? mag : -mag;
        // Kahan summation
        double y = term - comp;
        double s = sum + y;
        comp = (s - sum) - y;
        sum = s;
        if (mag < kTermTol && mag <= prev_mag) return std::clamp(sum, 0.0, 1.0);
        prev_mag = mag;
    }
    throw ConvergenceError("count series did not converge in " + std::to_string(kMaxTerms) + " terms");
}

Seconds periodic_next_emit(Seconds omega, Seconds phase, Seconds now) {
    if (!(omega > 0)) throw std::invalid_argument("periodic_next_emit: omega must be > 0");
    if (phase < 0 || phase >= omega) throw std::invalid_argument("periodic_next_emit: phase outside [0, omega)");
    double m = std::floor((now - phase) / omega) + 1.0;
    Seconds t = phase + m * omega;
    while (t <= now) t = phase + (++m) * omega;
    while (phase + (m - 1.0) * omega > now) t = phase + (--m) * omega;
    return t;
}

}  // namespace parksim
