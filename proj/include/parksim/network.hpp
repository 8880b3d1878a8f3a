#pragma once

#include <map>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "parksim/radio.hpp"

namespace parksim {

enum class Role : std::uint8_t { Sensor, Repeater, Gateway };
const char* to_string(Role r);
inline bool is_ffd(Role r) { return r != Role::Sensor; }

struct Node {
    NodeId id = 0;
    Point position{};
    Role role = Role::Sensor;
    double tpo_dbm = 3.0;
    std::string tier;  // repeater tier label, empty otherwise
    bool enabled = true;
};

// Axis-aligned street centrelines used for corner counting.
struct StreetGrid {
    std::vector<double> horizontal_y;
    std::vector<double> vertical_x;
    double half_width = 8.0;

    struct Route {
        double length;
        int corners;
    };
    Route route(Point a, Point b) const;
};

struct Topology {
    std::string name;
    std::vector<Node> nodes;  // nodes[i].id == i
    StreetGrid streets;
    NodeId gateway = 0;
    double sensor_margin_db = 10.0;
    double router_margin_db = 6.0;

    std::vector<NodeId> sensors() const;
    std::vector<NodeId> ffds() const;
    std::vector<NodeId> repeaters() const;
    std::size_t sensor_count() const { return sensors().size(); }

    double path_loss(NodeId from, NodeId to, const RadioParams& radio) const;
    double mean_rx_dbm(NodeId from, NodeId to, const RadioParams& radio) const;
    double margin_db(NodeId from, NodeId to, const RadioParams& radio) const {
        return mean_rx_dbm(from, to, radio) - radio.sensitivity_dbm;
    }
    bool linked(NodeId a, NodeId b, const RadioParams& radio) const;
    void validate() const;
};

class TopologyError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class DisconnectedError : public TopologyError {
public:
    explicit DisconnectedError(std::vector<NodeId> ids);
    const std::vector<NodeId>& nodes() const { return ids_; }

private:
    std::vector<NodeId> ids_;
};

Topology build_cross_topology(int n_sensors, double sensor_tpo_dbm = 3.0);
bool cross_topology_supported(int n_sensors);

// Street-grid description (see data/parking-map.json for the schema).
struct MapSegment {
    Point from{};
    Point to{};
    int count = 0;
    double first_offset_m = 0.0;
    double pitch_m = 5.0;
    double lateral_m = 5.0;
};

struct MapRepeater {
    Point at{};
    std::string tier;
};

struct MapDescription {
    std::string name = "map";
    StreetGrid streets;
    Point gateway{};
    std::vector<MapRepeater> repeaters;
    std::vector<MapSegment> segments;
    std::vector<std::vector<std::string>> tiers;  // cumulative tier sets, tried in order
    double repeater_tpo_dbm = 3.0;
    double sensor_margin_db = 10.0;
    double router_margin_db = 6.0;
    double min_tpo_dbm = -10.0;
};

MapDescription parse_map_description(const std::string& json_text);
MapDescription load_map_description(const std::string& path);
const MapDescription& default_parking_map();
const std::string& default_parking_map_json();

// Chooses the smallest cumulative tier set under which every sensor reaches a
// full-function device with the sensor margin. Returns its index in map.tiers.
std::size_t select_tier(const MapDescription& map, double sensor_tpo_dbm, const RadioParams& radio);
Topology build_from_map(const MapDescription& map, double sensor_tpo_dbm, const RadioParams& radio = {});
Topology build_parking_map(double sensor_tpo_dbm, const RadioParams& radio = {});

struct GradientTable {
    std::vector<int> gradient;  // -1 when not routed (disabled nodes)
    std::vector<NodeId> next_hop;
    Seconds update_period = 600.0;
};

GradientTable compute_gradients(const Topology& topo, const RadioParams& radio, Seconds update_period = 600.0);
NodeId route_next_hop(NodeId node, const GradientTable& table);

// Counts, for every full-function device other than the gateway, how many of
// the given packet sources' packets it forwards along the table's routes.
std::map<NodeId, std::uint64_t> count_router_load(const GradientTable& table, const Topology& topo,
                                                  std::span<const NodeId> delivered_sources);

}  // namespace parksim
