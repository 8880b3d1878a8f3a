#pragma once

#include <functional>
#include <string>
#include <vector>

#include "parksim/scenario.hpp"

namespace parksim {

extern const char* const kVersion;

struct RunSummary {
    MacMode mode = MacMode::Schedule;
    TrafficMode traffic = TrafficMode::EventDriven;
    Seconds interval = 0.0;
};

// Scalar metrics of one run, in a fixed order.
NamedMetrics summarize_run(const RunResult& r, const RunSummary& ctx);

struct PointResult {
    SweepPoint point;
    Topology topology;
    std::vector<RunResult> batches;
    BatchAggregate aggregate;
};

// Validates every sweep point first, then runs all batches of every point.
// on_point sees each point with its batches; they are released afterwards
// unless keep_batches is set.
std::vector<PointResult> run_scenario(const Scenario& s, unsigned workers = 1,
                                      const std::function<void(const PointResult&)>& on_point = {},
                                      bool keep_batches = true);
PointResult run_point(const SweepPoint& p, unsigned workers = 1);

std::string format_double(double v);

inline const char* const kDelayHeader = "batch,sensor_id,status_changed_at,delay_s,cycles_waited,censored";
inline const char* const kEnergyHeader = "batch,node_id,role,joules,tx_s,rx_s,cs_s,off_s,switches";
inline const char* const kCyclesHeader = "batch,cycle,delivered,p";
inline const char* const kRoutersHeader = "batch,node_id,tier,gradient,received,forwarded,retry_drops,overflow_drops,queued";

std::string delays_csv(const PointResult& p);
std::string energy_csv(const PointResult& p);
std::string cycles_csv(const PointResult& p);
std::string routers_csv(const PointResult& p);
std::string summary_csv(const Scenario& s, const std::vector<PointResult>& pts);
std::string aggregate_csv(const Scenario& s, const std::vector<PointResult>& pts);
std::string metadata_json(const Scenario& s, const std::vector<PointResult>& pts);

// Writes <dir>/summary.csv, aggregate.csv, metadata.json, scenario.json and
// one p<NNN>/ directory per sweep point.
void write_point(const std::string& dir, const PointResult& p);
void write_results(const std::string& dir, const Scenario& s, const std::vector<PointResult>& pts);
void write_top_level(const std::string& dir, const Scenario& s, const std::vector<PointResult>& pts);

}  // namespace parksim
