#include <cmath>
#include <set>

#include "doctest.h"
#include "parksim/network.hpp"
#include "support.hpp"

using namespace parksim;

namespace {

Topology line(std::initializer_list<std::pair<Point, Role>> pts) {
    Topology t;
    t.streets.horizontal_y = {0.0};
    for (const auto& [p, role] : pts) {
        auto id = static_cast<NodeId>(t.nodes.size());
        t.nodes.push_back(Node{id, p, role, 3.0, "", true});
    }
    t.gateway = 0;
    t.validate();
    return t;
}

void check_routes_reach_gateway(const Topology& t, const GradientTable& g) {
    for (const auto& n : t.nodes) {
        if (!n.enabled || n.id == t.gateway) continue;
        NodeId at = n.id;
        std::size_t steps = 0;
        while (at != t.gateway) {
            NodeId nh = route_next_hop(at, g);
            REQUIRE(g.gradient[nh] == g.gradient[at] - 1);
            REQUIRE(t.linked(at, nh, RadioParams{}));
            at = nh;
            REQUIRE(++steps <= t.nodes.size());
        }
    }
}

}  // namespace

TEST_CASE("cross layouts") {
    auto t12 = build_cross_topology(12);
    CHECK(t12.sensor_count() == 12);
    std::set<double> lateral;
    for (NodeId s : t12.sensors()) {
        const auto& p = t12.nodes[s].position;
        lateral.insert(std::abs(p.x) < 1e-9 || std::abs(p.y) < 1e-9 ? 0.0 : (std::abs(p.x) < 6 ? p.x : p.y));
    }
    CHECK(lateral.size() == 1);

    for (int n : {12, 24, 48, 96}) {
        auto t = build_cross_topology(n);
        CHECK(t.sensor_count() == static_cast<std::size_t>(n));
        CHECK(t.repeaters().empty());
        double nearest = 1e9;
        for (NodeId s : t.sensors()) nearest = std::min(nearest, distance(t.nodes[s].position, {0, 0}));
        CHECK(nearest == doctest::Approx(10.0));
        auto g = compute_gradients(t, RadioParams{});
        for (NodeId s : t.sensors()) {
            CHECK(g.gradient[s] == 1);
            CHECK(g.next_hop[s] == t.gateway);
            CHECK(t.margin_db(s, t.gateway, RadioParams{}) >= 10.0);
        }
    }
    // consecutive sensors on one line sit 5 m apart
    auto t = build_cross_topology(24);
    CHECK(distance(t.nodes[1].position, t.nodes[2].position) == doctest::Approx(5.0));
    CHECK_FALSE(cross_topology_supported(60));
    CHECK_THROWS_AS(build_cross_topology(60), TopologyError);
}

TEST_CASE("gateway and neighbour gradients") {
    auto t = line({{{0, 0}, Role::Gateway}, {{60, 0}, Role::Repeater}, {{140, 0}, Role::Repeater}});
    auto g = compute_gradients(t, RadioParams{});
    CHECK(g.gradient[0] == 0);
    CHECK(g.gradient[1] == 1);
    CHECK(g.gradient[2] == 2);
    CHECK(g.next_hop[2] == 1);
    CHECK_THROWS(route_next_hop(0, g));
}

TEST_CASE("sensors prefer the lowest gradient, then the best margin") {
    auto t = line({{{0, 0}, Role::Gateway},
                   {{60, 0}, Role::Repeater},
                   {{140, 0}, Role::Repeater},
                   {{110, 0}, Role::Sensor},
                   {{70, 0}, Role::Sensor}});
    RadioParams r;
    auto g = compute_gradients(t, r);
    // node 3 hears node 2 louder but node 1 is closer to the gateway in hops
    CHECK(t.margin_db(3, 2, r) > t.margin_db(3, 1, r));
    CHECK(g.next_hop[3] == 1);
    CHECK(g.gradient[3] == 2);
    CHECK(t.margin_db(4, 1, r) > t.margin_db(4, 0, r));
    CHECK(g.next_hop[4] == 0);
    CHECK(g.gradient[4] == 1);

    auto t2 = line({{{0, 0}, Role::Gateway}, {{-60, 0}, Role::Repeater}, {{-100, 0}, Role::Repeater}, {{-90, 0}, Role::Sensor}});
    auto g2 = compute_gradients(t2, r);
    CHECK(g2.gradient[1] == 1);
    CHECK(g2.gradient[2] == 1);
    CHECK_FALSE(t2.linked(3, 0, r));
    CHECK(g2.next_hop[3] == 2);
}

TEST_CASE("unreachable nodes raise DisconnectedError") {
    auto t = line({{{0, 0}, Role::Gateway}, {{20, 0}, Role::Sensor}, {{400, 0}, Role::Sensor}});
    try {
        compute_gradients(t, RadioParams{});
        FAIL("expected DisconnectedError");
    } catch (const DisconnectedError& e) {
        CHECK(e.nodes() == std::vector<NodeId>{2});
        CHECK(std::string(e.what()).find("2") != std::string::npos);
    }
}

TEST_CASE("corners cost signal") {
    StreetGrid g;
    g.horizontal_y = {0.0};
    g.vertical_x = {0.0};
    auto straight = g.route({10, 0}, {30, 0});
    CHECK(straight.corners == 0);
    CHECK(straight.length == doctest::Approx(20.0));
    auto bent = g.route({20, 0}, {0, 20});
    CHECK(bent.corners == 1);
    CHECK(bent.length == doctest::Approx(40.0));
}

TEST_CASE("parking map") {
    RadioParams r;
    auto t = build_parking_map(3.0);
    CHECK(t.sensor_count() == 120);
    auto g = compute_gradients(t, r);
    for (NodeId s : t.sensors()) CHECK(t.margin_db(s, g.next_hop[s], r) >= 10.0);
    check_routes_reach_gateway(t, g);

    auto low = build_parking_map(-7.0);
    CHECK(low.sensor_count() == 120);
    CHECK(low.repeaters().size() > t.repeaters().size());
    for (const auto& n : low.nodes) {
        if (n.role == Role::Sensor) CHECK(n.tpo_dbm == -7.0);
        if (n.role == Role::Repeater) CHECK(n.tpo_dbm == 3.0);
    }
    check_routes_reach_gateway(low, compute_gradients(low, r));
    CHECK_THROWS_AS(build_parking_map(-20.0), TopologyError);
}

TEST_CASE("property: tpo never shrinks the repeater set as it drops") {
    RadioParams r;
    std::size_t prev = 0;
    for (double tpo = 3.0; tpo >= -10.0; tpo -= 1.0) {
        auto t = build_parking_map(tpo, r);
        CHECK(t.repeaters().size() >= prev);
        prev = t.repeaters().size();
    }
}

TEST_CASE("property: removing a repeater never lowers a gradient") {
    RadioParams r;
    for (double tpo : {3.0, -7.0}) {
        auto t = build_parking_map(tpo, r);
        auto base = compute_gradients(t, r);
        for (NodeId rep : t.repeaters()) {
            auto cut = t;
            cut.nodes[rep].enabled = false;
            try {
                auto g = compute_gradients(cut, r);
                for (const auto& n : cut.nodes)
                    if (n.enabled) CHECK(g.gradient[n.id] >= base.gradient[n.id]);
                check_routes_reach_gateway(cut, g);
            } catch (const DisconnectedError& e) {
                CHECK_FALSE(e.nodes().empty());
            }
        }
    }
}

TEST_CASE("router load follows routes") {
    RadioParams r;
    auto t = build_parking_map(-7.0, r);
    auto g = compute_gradients(t, r);
    auto sensors = t.sensors();
    auto load = count_router_load(g, t, sensors);
    std::uint64_t total = 0, hops = 0;
    for (const auto& [id, n] : load) total += n;
    for (NodeId s : sensors) hops += static_cast<std::uint64_t>(g.gradient[s] - 1);
    CHECK(total == hops);
    CHECK(load.size() == t.repeaters().size());

    auto cross = build_cross_topology(24);
    auto cg = compute_gradients(cross, r);
    auto cs = cross.sensors();
    CHECK(count_router_load(cg, cross, cs).empty());
}

TEST_CASE("map description errors") {
    CHECK_THROWS_WITH_AS(parse_map_description("{nope"), doctest::Contains("parse error"), TopologyError);
    CHECK_THROWS_WITH_AS(parse_map_description("[]"), doctest::Contains("expected an object"), TopologyError);
    CHECK_THROWS_WITH_AS(parse_map_description(R"({"tiers": [["a"]]})"), doctest::Contains("gateway"), TopologyError);
    CHECK_THROWS_AS(load_map_description("/nonexistent/map.json"), TopologyError);
    auto j = nlohmann::json::parse(default_parking_map_json());
    j["sensor_segments"][0]["count"] = -1;
    CHECK_THROWS_WITH_AS(parse_map_description(j.dump()), doctest::Contains("count"), TopologyError);
    j = nlohmann::json::parse(default_parking_map_json());
    j["tiers"] = nlohmann::json::array();
    CHECK_THROWS_WITH_AS(parse_map_description(j.dump()), doctest::Contains("tiers"), TopologyError);
}

TEST_CASE("default map round-trips through its JSON") {
    auto a = parse_map_description(default_parking_map_json());
    const auto& b = default_parking_map();
    CHECK(a.repeaters.size() == b.repeaters.size());
    CHECK(a.segments.size() == b.segments.size());
    int sensors = 0;
    for (const auto& s : a.segments) sensors += s.count;
    CHECK(sensors == 120);
}
