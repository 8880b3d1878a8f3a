#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"
#include "parksim/engine.hpp"

namespace parksim {

using ojson = nlohmann::ordered_json;

// Raised for anything wrong with a scenario; the message starts with the
// offending field path.
class ScenarioError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class TopologyKind : std::uint8_t { Cross, ParkingMap, File };
const char* to_string(TopologyKind k);

struct TopologySpec {
    TopologyKind kind = TopologyKind::Cross;
    int sensors = 24;
    double tpo_dbm = 3.0;
    std::string path;
};

struct TrafficSpec {
    TrafficMode mode = TrafficMode::EventDriven;
    Seconds mean_cycle = 320.0;
    double shape = 0.5;
    Seconds interval = 60.0;
    bool equilibrium_start = false;
    std::optional<WeibullParams> occupied;
    std::optional<WeibullParams> vacant;

    TrafficConfig resolve() const;
};

struct SweepAxis {
    std::string path;
    std::vector<ojson> values;
};

struct Scenario {
    std::string name = "scenario";
    TopologySpec topology;
    DutyCycleConfig mac;
    TrafficSpec traffic;
    RadioParams radio;
    Seconds sim_time = 86400.0;
    std::size_t batches = 20;
    std::uint64_t seed = 1;
    DelayPolicy delay_policy = DelayPolicy::Supersede;
    Seconds route_update = 600.0;
    std::vector<SweepAxis> sweep;
};

Scenario scenario_from_json(const ojson& j);
ojson scenario_to_json(const Scenario& s);
Scenario parse_scenario(const std::string& text);
Scenario load_scenario(const std::string& path);
std::string serialize_scenario(const Scenario& s);
std::uint64_t scenario_hash(const Scenario& s);

struct SweepPoint {
    std::size_t index = 0;
    std::vector<std::pair<std::string, ojson>> values;
    Scenario scenario;  // sweep removed, values applied
    std::string label() const;
};

// Cartesian product of the sweep axes in declaration order, first axis
// outermost. A scenario without sweep yields one point.
std::vector<SweepPoint> expand_sweep(const Scenario& s);

Topology build_topology(const Scenario& s);
EngineConfig make_engine_config(const Scenario& s, const Topology& topo, std::uint32_t batch);
// Builds topology and routes and checks every parameter without running.
void preflight(const Scenario& s);

struct FigureEntry {
    std::string id;
    std::string description;
    std::vector<Scenario> scenarios;
};

const std::vector<FigureEntry>& figure_catalog();
const FigureEntry* find_figure(const std::string& id);

}  // namespace parksim
