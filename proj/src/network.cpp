#include "parksim/network.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <fstream>
#include <limits>
#include <sstream>

#include "json.hpp"

namespace parksim {

extern const char* const kDefaultParkingMapJson;

const char* to_string(Role r) {
    switch (r) {
        case Role::Sensor: return "sensor";
        case Role::Repeater: return "repeater";
        case Role::Gateway: return "gateway";
    }
    return "?";
}

StreetGrid::Route StreetGrid::route(Point a, Point b) const {
    double euclid = distance(a, b);
    if (horizontal_y.empty() && vertical_x.empty()) return {euclid, 0};
    auto on_h = [&](Point p, double y) { return std::abs(p.y - y) <= half_width; };
    auto on_v = [&](Point p, double x) { return std::abs(p.x - x) <= half_width; };
    for (double y : horizontal_y)
        if (on_h(a, y) && on_h(b, y)) return {euclid, 0};
    for (double x : vertical_x)
        if (on_v(a, x) && on_v(b, x)) return {euclid, 0};
    double best = std::numeric_limits<double>::infinity();
    for (double y : horizontal_y) {
        for (double x : vertical_x) {
            Point c{x, y};
            if ((on_h(a, y) && on_v(b, x)) || (on_v(a, x) && on_h(b, y)))
                best = std::min(best, distance(a, c) + distance(c, b));
        }
    }
    if (std::isfinite(best)) return {best, 1};
    return {std::abs(a.x - b.x) + std::abs(a.y - b.y), 2};
}

std::vector<NodeId> Topology::sensors() const {
    std::vector<NodeId> out;
    for (const auto& n : nodes)
        if (n.enabled && n.role == Role::Sensor) out.push_back(n.id);
    return out;
}

std::vector<NodeId> Topology::ffds() const {
    std::vector<NodeId> out;
    for (const auto& n : nodes)
        if (n.enabled && is_ffd(n.role)) out.push_back(n.id);
    return out;
}

std::vector<NodeId> Topology::repeaters() const {
    std::vector<NodeId> out;
    for (const auto& n : nodes)
        if (n.enabled && n.role == Role::Repeater) out.push_back(n.id);
    return out;
}

double Topology::path_loss(NodeId from, NodeId to, const RadioParams& radio) const {
    auto r = streets.route(nodes.at(from).position, nodes.at(to).position);
    return path_loss_db(r.length, r.corners, radio);
}

double Topology::mean_rx_dbm(NodeId from, NodeId to, const RadioParams& radio) const {
    return nodes.at(from).tpo_dbm - path_loss(from, to, radio);
}

bool Topology::linked(NodeId a, NodeId b, const RadioParams& radio) const {
    const auto& na = nodes.at(a);
    const auto& nb = nodes.at(b);
    if (!na.enabled || !nb.enabled || a == b) return false;
    if (is_ffd(na.role) && is_ffd(nb.role))
        return std::min(margin_db(a, b, radio), margin_db(b, a, radio)) >= router_margin_db;
    if (na.role == Role::Sensor && nb.role == Role::Sensor) return false;
    NodeId s = na.role == Role::Sensor ? a : b;
    NodeId f = s == a ? b : a;
    return margin_db(s, f, radio) >= sensor_margin_db;
}

void Topology::validate() const {
    std::size_t gateways = 0;
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        if (nodes[i].id != i) throw TopologyError("node ids must equal their index");
        if (nodes[i].enabled && nodes[i].role == Role::Gateway) ++gateways;
    }
    if (gateways != 1) throw TopologyError("topology needs exactly one gateway");
    if (gateway >= nodes.size() || nodes[gateway].role != Role::Gateway) throw TopologyError("gateway id mismatch");
}

DisconnectedError::DisconnectedError(std::vector<NodeId> ids) : TopologyError([&] {
    std::ostringstream os;
    os << "disconnected nodes:";
    for (auto id : ids) os << ' ' << id;
    return os.str();
}()), ids_(std::move(ids)) {}

bool cross_topology_supported(int n) { return n == 12 || n == 24 || n == 48 || n == 96; }

Topology build_cross_topology(int n_sensors, double sensor_tpo_dbm) {
    if (!cross_topology_supported(n_sensors))
        throw TopologyError("cross topology supports N in {12, 24, 48, 96}, got " + std::to_string(n_sensors));
    constexpr double kLateral = 5.0;
    constexpr double kPitch = 5.0;
    const double first = std::sqrt(10.0 * 10.0 - kLateral * kLateral);
    int sides = n_sensors == 12 ? 1 : 2;
    int per_line = n_sensors / (4 * sides);

    Topology t;
    t.name = "cross-" + std::to_string(n_sensors);
    t.streets.horizontal_y = {0.0};
    t.streets.vertical_x = {0.0};
    t.streets.half_width = 6.0;
    t.nodes.push_back(Node{0, {0.0, 0.0}, Role::Gateway, 3.0, "", true});
    t.gateway = 0;
    // arms: +x, -x, +y, -y
    const int dir[4][2] = {{1, 0}, {-1, 0}, {0, 1}, {0, -1}};
    for (const auto& d : dir) {
        for (int s = 0; s < sides; ++s) {
            double side = s == 0 ? kLateral : -kLateral;
            for (int k = 0; k < per_line; ++k) {
                double along = first + kPitch * k;
                Point p = d[0] != 0 ? Point{d[0] * along, side} : Point{side, d[1] * along};
                auto id = static_cast<NodeId>(t.nodes.size());
                t.nodes.push_back(Node{id, p, Role::Sensor, sensor_tpo_dbm, "", true});
            }
        }
    }
    t.validate();
    return t;
}

// Map description

namespace {

using nlohmann::json;

Point parse_point(const json& j, const std::string& field) {
    if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number())
        throw TopologyError(field + ": expected [x, y]");
    return {j[0].get<double>(), j[1].get<double>()};
}

template <class T>
T get_or(const json& j, const char* key, T fallback, const std::string& ctx) {
    if (!j.contains(key)) return fallback;
    try {
        return j.at(key).get<T>();
    } catch (const json::exception&) {
        throw TopologyError(ctx + "." + key + ": wrong type");
    }
}

}  // namespace

MapDescription parse_map_description(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw TopologyError(std::string("map: parse error: ") + e.what());
    }
    if (!j.is_object()) throw TopologyError("map: expected an object");
    MapDescription m;
    m.name = get_or<std::string>(j, "name", "map", "map");
    if (j.contains("streets")) {
        const auto& s = j["streets"];
        m.streets.horizontal_y = get_or<std::vector<double>>(s, "horizontal_y", {}, "streets");
        m.streets.vertical_x = get_or<std::vector<double>>(s, "vertical_x", {}, "streets");
        m.streets.half_width = get_or<double>(s, "half_width_m", 8.0, "streets");
    }
    if (!j.contains("gateway")) throw TopologyError("gateway: missing");
    m.gateway = parse_point(j["gateway"], "gateway");
    m.repeater_tpo_dbm = get_or<double>(j, "repeater_tpo_dbm", 3.0, "map");
    m.sensor_margin_db = get_or<double>(j, "sensor_margin_db", 10.0, "map");
    m.router_margin_db = get_or<double>(j, "router_margin_db", 6.0, "map");
    m.min_tpo_dbm = get_or<double>(j, "min_tpo_dbm", -10.0, "map");
    if (j.contains("repeaters")) {
        for (std::size_t i = 0; i < j["repeaters"].size(); ++i) {
            const auto& r = j["repeaters"][i];
            std::string ctx = "repeaters[" + std::to_string(i) + "]";
            if (!r.contains("at")) throw TopologyError(ctx + ".at: missing");
            m.repeaters.push_back({parse_point(r["at"], ctx + ".at"), get_or<std::string>(r, "tier", "base", ctx)});
        }
    }
    if (j.contains("sensor_segments")) {
        for (std::size_t i = 0; i < j["sensor_segments"].size(); ++i) {
            const auto& s = j["sensor_segments"][i];
            std::string ctx = "sensor_segments[" + std::to_string(i) + "]";
            MapSegment seg;
            if (!s.contains("from") || !s.contains("to")) throw TopologyError(ctx + ": needs from and to");
            seg.from = parse_point(s["from"], ctx + ".from");
            seg.to = parse_point(s["to"], ctx + ".to");
            seg.count = get_or<int>(s, "count", 0, ctx);
            seg.first_offset_m = get_or<double>(s, "first_offset_m", 0.0, ctx);
            seg.pitch_m = get_or<double>(s, "pitch_m", 5.0, ctx);
            seg.lateral_m = get_or<double>(s, "lateral_m", 5.0, ctx);
            if (seg.count < 0) throw TopologyError(ctx + ".count: must be >= 0");
            if (distance(seg.from, seg.to) <= 0) throw TopologyError(ctx + ": zero-length segment");
            m.segments.push_back(seg);
        }
    }
    if (j.contains("tiers")) {
        m.tiers = get_or<std::vector<std::vector<std::string>>>(j, "tiers", {}, "map");
    } else {
        std::vector<std::string> all;
        for (const auto& r : m.repeaters)
            if (std::find(all.begin(), all.end(), r.tier) == all.end()) all.push_back(r.tier);
        m.tiers.push_back(all);
    }
    if (m.tiers.empty()) throw TopologyError("tiers: at least one tier set required");
    return m;
}

MapDescription load_map_description(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw TopologyError("cannot open map file: " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_map_description(ss.str());
}

const std::string& default_parking_map_json() {
    static const std::string text = kDefaultParkingMapJson;
    return text;
}

const MapDescription& default_parking_map() {
    static const MapDescription m = parse_map_description(default_parking_map_json());
    return m;
}

namespace {

Topology assemble(const MapDescription& map, double tpo, const std::vector<std::string>& tiers) {
    Topology t;
    t.name = map.name;
    t.streets = map.streets;
    t.sensor_margin_db = map.sensor_margin_db;
    t.router_margin_db = map.router_margin_db;
    t.nodes.push_back(Node{0, map.gateway, Role::Gateway, map.repeater_tpo_dbm, "", true});
    t.gateway = 0;
    for (const auto& seg : map.segments) {
        double len = distance(seg.from, seg.to);
        double ux = (seg.to.x - seg.from.x) / len, uy = (seg.to.y - seg.from.y) / len;
        for (int k = 0; k < seg.count; ++k) {
            double o = seg.first_offset_m + seg.pitch_m * k;
            Point p{seg.from.x + ux * o - uy * seg.lateral_m, seg.from.y + uy * o + ux * seg.lateral_m};
            auto id = static_cast<NodeId>(t.nodes.size());
            t.nodes.push_back(Node{id, p, Role::Sensor, tpo, "", true});
        }
    }
    for (const auto& r : map.repeaters) {
        if (std::find(tiers.begin(), tiers.end(), r.tier) == tiers.end()) continue;
        auto id = static_cast<NodeId>(t.nodes.size());
        t.nodes.push_back(Node{id, r.at, Role::Repeater, map.repeater_tpo_dbm, r.tier, true});
    }
    t.validate();
    return t;
}

bool sensors_covered(const Topology& t, const RadioParams& radio) {
    auto ffd = t.ffds();
    for (NodeId s : t.sensors()) {
        bool ok = false;
        for (NodeId f : ffd)
            if (t.margin_db(s, f, radio) >= t.sensor_margin_db) {
                ok = true;
                break;
            }
        if (!ok) return false;
    }
    return true;
}

}  // namespace

std::size_t select_tier(const MapDescription& map, double tpo, const RadioParams& radio) {
    if (tpo < map.min_tpo_dbm)
        throw TopologyError("tpo " + std::to_string(tpo) + " dBm below supported minimum " +
                            std::to_string(map.min_tpo_dbm) + " dBm");
    for (std::size_t i = 0; i < map.tiers.size(); ++i)
        if (sensors_covered(assemble(map, tpo, map.tiers[i]), radio)) return i;
    throw TopologyError("no repeater tier covers every sensor at tpo " + std::to_string(tpo) + " dBm");
}

Topology build_from_map(const MapDescription& map, double tpo, const RadioParams& radio) {
    auto tier = select_tier(map, tpo, radio);
    return assemble(map, tpo, map.tiers[tier]);
}

Topology build_parking_map(double tpo, const RadioParams& radio) {
    return build_from_map(default_parking_map(), tpo, radio);
}

GradientTable compute_gradients(const Topology& topo, const RadioParams& radio, Seconds update_period) {
    const std::size_t n = topo.nodes.size();
    GradientTable g;
    g.update_period = update_period;
    g.gradient.assign(n, -1);
    g.next_hop.assign(n, kNoNode);
    auto ffd = topo.ffds();

    g.gradient[topo.gateway] = 0;
    std::deque<NodeId> q{topo.gateway};
    while (!q.empty()) {
        NodeId u = q.front();
        q.pop_front();
        for (NodeId v : ffd) {
            if (g.gradient[v] >= 0 || !topo.linked(u, v, radio)) continue;
            g.gradient[v] = g.gradient[u] + 1;
            q.push_back(v);
        }
    }

    std::vector<NodeId> lost;
    for (NodeId v : ffd) {
        if (v == topo.gateway) continue;
        if (g.gradient[v] < 0) {
            lost.push_back(v);
            continue;
        }
        double best = -std::numeric_limits<double>::infinity();
        for (NodeId u : ffd) {
            if (g.gradient[u] != g.gradient[v] - 1 || !topo.linked(u, v, radio)) continue;
            double m = topo.margin_db(v, u, radio);
            if (m > best) {
                best = m;
                g.next_hop[v] = u;
            }
        }
    }
    for (NodeId s : topo.sensors()) {
        int best_g = std::numeric_limits<int>::max();
        double best_m = -std::numeric_limits<double>::infinity();
        for (NodeId f : ffd) {
            if (g.gradient[f] < 0 || !topo.linked(s, f, radio)) continue;
            double m = topo.margin_db(s, f, radio);
            if (g.gradient[f] < best_g || (g.gradient[f] == best_g && m > best_m)) {
                best_g = g.gradient[f];
                best_m = m;
                g.next_hop[s] = f;
            }
        }
        if (g.next_hop[s] == kNoNode)
            lost.push_back(s);
        else
            g.gradient[s] = best_g + 1;
    }
    if (!lost.empty()) {
        std::sort(lost.begin(), lost.end());
        throw DisconnectedError(lost);
    }
    return g;
}

NodeId route_next_hop(NodeId node, const GradientTable& table) {
    if (node >= table.next_hop.size()) throw TopologyError("unknown node " + std::to_string(node));
    NodeId nh = table.next_hop[node];
    if (nh == kNoNode) throw TopologyError("no feasible next hop for node " + std::to_string(node));
    return nh;
}

std::map<NodeId, std::uint64_t> count_router_load(const GradientTable& table, const Topology& topo,
                                                  std::span<const NodeId> delivered_sources) {
    std::map<NodeId, std::uint64_t> load;
    for (NodeId r : topo.repeaters()) load[r] = 0;
    for (NodeId src : delivered_sources) {
        NodeId hop = route_next_hop(src, table);
        std::size_t guard = 0;
        while (hop != topo.gateway) {
            ++load[hop];
            hop = route_next_hop(hop, table);
            if (++guard > topo.nodes.size()) throw TopologyError("routing loop");
        }
    }
    return load;
}

}  // namespace parksim
