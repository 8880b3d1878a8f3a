#include "parksim/scenario.hpp"

#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

namespace parksim {

const char* to_string(TopologyKind k) {
    switch (k) {
        case TopologyKind::Cross: return "cross";
        case TopologyKind::ParkingMap: return "parking-map";
        case TopologyKind::File: return "file";
    }
    return "?";
}

TrafficConfig TrafficSpec::resolve() const {
    TrafficConfig c;
    if (!(mean_cycle > 0)) throw ScenarioError("traffic.mean_cycle_s: must be > 0");
    if (!(shape > 0)) throw ScenarioError("traffic.shape: must be > 0");
    c = TrafficConfig::event_driven(mean_cycle, shape);
    if (occupied) c.occupied = *occupied;
    if (vacant) c.vacant = *vacant;
    c.mode = mode;
    c.interval = interval;
    c.equilibrium_start = equilibrium_start;
    if (mode == TrafficMode::Periodic && !(interval > 0)) throw ScenarioError("traffic.interval_s: must be > 0");
    return c;
}

namespace {

class Reader {
public:
    Reader(const ojson& j, std::string ctx) : j_(j), ctx_(std::move(ctx)) {
        if (!j_.is_object()) throw ScenarioError(where("") + "expected an object");
    }

    bool has(const char* key) {
        known_.insert(key);
        return j_.contains(key);
    }

    template <class T>
    T get(const char* key, T fallback) {
        if (!has(key)) return fallback;
        const auto& v = j_.at(key);
        try {
            if constexpr (std::is_same_v<T, bool>) {
                if (!v.is_boolean()) throw ScenarioError(where(key) + "expected a boolean");
            } else if constexpr (std::is_arithmetic_v<T>) {
                if (!v.is_number()) throw ScenarioError(where(key) + "expected a number");
                if constexpr (std::is_unsigned_v<T>) {
                    if (v.is_number_float() || (!v.is_number_unsigned() && v.template get<long long>() < 0))
                        throw ScenarioError(where(key) + "expected a non-negative integer");
                } else if constexpr (std::is_integral_v<T>) {
                    if (v.is_number_float()) throw ScenarioError(where(key) + "expected an integer");
                }
            } else if constexpr (std::is_same_v<T, std::string>) {
                if (!v.is_string()) throw ScenarioError(where(key) + "expected a string");
            }
            return v.template get<T>();
        } catch (const ojson::exception&) {
            throw ScenarioError(where(key) + "wrong type");
        }
    }

    const ojson& sub(const char* key) {
        known_.insert(key);
        return j_.at(key);
    }

    void finish() {
        for (const auto& [k, v] : j_.items())
            if (!known_.count(k)) throw ScenarioError(where(k) + "unknown field");
    }

    std::string where(const std::string& key) const {
        std::string p = ctx_.empty() ? key : (key.empty() ? ctx_ : ctx_ + "." + key);
        return p + ": ";
    }

private:
    const ojson& j_;
    std::string ctx_;
    std::set<std::string> known_;
};

WeibullParams read_weibull(const ojson& j, const std::string& ctx) {
    Reader r(j, ctx);
    WeibullParams p;
    p.scale = r.get<double>("scale_s", 0.0);
    p.shape = r.get<double>("shape", 0.0);
    r.finish();
    if (!(p.scale > 0)) throw ScenarioError(ctx + ".scale_s: must be > 0");
    if (!(p.shape > 0)) throw ScenarioError(ctx + ".shape: must be > 0");
    return p;
}

template <class E>
E parse_enum(const std::string& v, const std::vector<std::pair<std::string, E>>& table, const std::string& field) {
    for (const auto& [name, e] : table)
        if (name == v) return e;
    std::string opts;
    for (const auto& [name, e] : table) opts += (opts.empty() ? "" : ", ") + name;
    throw ScenarioError(field + ": unknown value '" + v + "' (expected " + opts + ")");
}

}  // namespace

Scenario scenario_from_json(const ojson& j) {
    Scenario s;
    Reader r(j, "");
    s.name = r.get<std::string>("name", s.name);

    if (r.has("topology")) {
        Reader t(r.sub("topology"), "topology");
        s.topology.kind = parse_enum<TopologyKind>(
            t.get<std::string>("kind", "cross"),
            {{"cross", TopologyKind::Cross}, {"parking-map", TopologyKind::ParkingMap}, {"file", TopologyKind::File}},
            "topology.kind");
        s.topology.sensors = t.get<int>("sensors", s.topology.sensors);
        s.topology.tpo_dbm = t.get<double>("tpo_dbm", s.topology.tpo_dbm);
        s.topology.path = t.get<std::string>("path", "");
        t.finish();
        if (s.topology.kind == TopologyKind::Cross && !cross_topology_supported(s.topology.sensors))
            throw ScenarioError("topology.sensors: cross topology supports 12, 24, 48 or 96");
        if (s.topology.kind == TopologyKind::File && s.topology.path.empty())
            throw ScenarioError("topology.path: required for kind 'file'");
    }

    if (r.has("mac")) {
        Reader m(r.sub("mac"), "mac");
        auto& mac = s.mac;
        mac.mode = parse_enum<MacMode>(m.get<std::string>("mode", "schedule"),
                                       {{"schedule", MacMode::Schedule}, {"contention", MacMode::Contention}},
                                       "mac.mode");
        mac.slot = m.get<double>("slot_s", mac.slot);
        if (m.has("inactive_s")) mac.inactive = m.get<double>("inactive_s", 0.0);
        mac.cw_min = m.get<int>("cw_min", mac.cw_min);
        mac.cw_max = m.get<int>("cw_max", mac.cw_max);
        mac.micro_slot = m.get<double>("micro_slot_s", mac.micro_slot);
        mac.max_retries = m.get<int>("max_retries", mac.max_retries);
        mac.queue_capacity = m.get<std::size_t>("queue_capacity", mac.queue_capacity);
        mac.packet_bytes = m.get<std::size_t>("packet_bytes", mac.packet_bytes);
        m.finish();
    }

    if (r.has("traffic")) {
        Reader t(r.sub("traffic"), "traffic");
        auto& tr = s.traffic;
        tr.mode = parse_enum<TrafficMode>(t.get<std::string>("mode", "event-driven"),
                                          {{"event-driven", TrafficMode::EventDriven}, {"periodic", TrafficMode::Periodic}},
                                          "traffic.mode");
        tr.mean_cycle = t.get<double>("mean_cycle_s", tr.mean_cycle);
        tr.shape = t.get<double>("shape", tr.shape);
        tr.interval = t.get<double>("interval_s", tr.interval);
        tr.equilibrium_start = t.get<bool>("equilibrium_start", tr.equilibrium_start);
        if (t.has("occupied")) tr.occupied = read_weibull(t.sub("occupied"), "traffic.occupied");
        if (t.has("vacant")) tr.vacant = read_weibull(t.sub("vacant"), "traffic.vacant");
        t.finish();
    }

    if (r.has("radio")) {
        Reader q(r.sub("radio"), "radio");
        auto& rp = s.radio;
        rp.sensitivity_dbm = q.get<double>("sensitivity_dbm", rp.sensitivity_dbm);
        rp.data_rate_bps = q.get<double>("data_rate_bps", rp.data_rate_bps);
        rp.wavelength_m = q.get<double>("wavelength_m", rp.wavelength_m);
        rp.power.tx_w = q.get<double>("tx_w", rp.power.tx_w);
        rp.power.rx_w = q.get<double>("rx_w", rp.power.rx_w);
        rp.power.cs_w = q.get<double>("cs_w", rp.power.cs_w);
        rp.power.off_w = q.get<double>("off_w", rp.power.off_w);
        rp.switch_energy_j = q.get<double>("switch_energy_j", rp.switch_energy_j);
        rp.corner_loss_db = q.get<double>("corner_loss_db", rp.corner_loss_db);
        rp.capture_threshold_db = q.get<double>("capture_threshold_db", rp.capture_threshold_db);
        rp.fading = q.get<bool>("fading", rp.fading);
        rp.max_fade_db = q.get<double>("max_fade_db", rp.max_fade_db);
        rp.turnaround_s = q.get<double>("turnaround_s", rp.turnaround_s);
        rp.cca_s = q.get<double>("cca_s", rp.cca_s);
        rp.control_bytes = q.get<std::size_t>("control_bytes", rp.control_bytes);
        q.finish();
    }

    s.sim_time = r.get<double>("sim_time_s", s.sim_time);
    s.batches = r.get<std::size_t>("batches", s.batches);
    s.seed = r.get<std::uint64_t>("seed", s.seed);
    s.delay_policy = parse_enum<DelayPolicy>(r.get<std::string>("delay_policy", "supersede"),
                                             {{"supersede", DelayPolicy::Supersede}, {"strict", DelayPolicy::Strict}},
                                             "delay_policy");
    s.route_update = r.get<double>("route_update_s", s.route_update);

    if (r.has("sweep")) {
        const auto& sw = r.sub("sweep");
        if (!sw.is_object()) throw ScenarioError("sweep: expected an object of path -> array");
        for (const auto& [path, vals] : sw.items()) {
            if (!vals.is_array() || vals.empty()) throw ScenarioError("sweep." + path + ": expected a non-empty array");
            if (path == "sweep" || path.rfind("sweep.", 0) == 0) throw ScenarioError("sweep." + path + ": cannot sweep the sweep");
            SweepAxis ax{path, {}};
            for (const auto& v : vals) ax.values.push_back(v);
            s.sweep.push_back(std::move(ax));
        }
    }
    r.finish();

    if (!(s.sim_time > 0)) throw ScenarioError("sim_time_s: must be > 0");
    if (s.batches < 1) throw ScenarioError("batches: must be >= 1");
    if (s.route_update < 0) throw ScenarioError("route_update_s: must be >= 0");
    try {
        s.radio.validate();
    } catch (const std::invalid_argument& e) {
        throw ScenarioError(e.what());
    }
    try {
        s.mac.validate(s.radio);
    } catch (const std::invalid_argument& e) {
        throw ScenarioError(e.what());
    }
    try {
        s.traffic.resolve().validate();
    } catch (const std::invalid_argument& e) {
        throw ScenarioError(std::string("traffic: ") + e.what());
    }
    return s;
}

ojson scenario_to_json(const Scenario& s) {
    ojson j;
    j["name"] = s.name;
    ojson t;
    t["kind"] = to_string(s.topology.kind);
    t["sensors"] = s.topology.sensors;
    t["tpo_dbm"] = s.topology.tpo_dbm;
    if (!s.topology.path.empty()) t["path"] = s.topology.path;
    j["topology"] = t;

    ojson m;
    m["mode"] = to_string(s.mac.mode);
    m["slot_s"] = s.mac.slot;
    if (s.mac.inactive) m["inactive_s"] = *s.mac.inactive;
    m["cw_min"] = s.mac.cw_min;
    m["cw_max"] = s.mac.cw_max;
    m["micro_slot_s"] = s.mac.micro_slot;
    m["max_retries"] = s.mac.max_retries;
    m["queue_capacity"] = s.mac.queue_capacity;
    m["packet_bytes"] = s.mac.packet_bytes;
    j["mac"] = m;

    ojson tr;
    tr["mode"] = s.traffic.mode == TrafficMode::EventDriven ? "event-driven" : "periodic";
    tr["mean_cycle_s"] = s.traffic.mean_cycle;
    tr["shape"] = s.traffic.shape;
    tr["interval_s"] = s.traffic.interval;
    tr["equilibrium_start"] = s.traffic.equilibrium_start;
    if (s.traffic.occupied) tr["occupied"] = {{"scale_s", s.traffic.occupied->scale}, {"shape", s.traffic.occupied->shape}};
    if (s.traffic.vacant) tr["vacant"] = {{"scale_s", s.traffic.vacant->scale}, {"shape", s.traffic.vacant->shape}};
    j["traffic"] = tr;

    const auto& rp = s.radio;
    ojson q;
    q["sensitivity_dbm"] = rp.sensitivity_dbm;
    q["data_rate_bps"] = rp.data_rate_bps;
    q["wavelength_m"] = rp.wavelength_m;
    q["tx_w"] = rp.power.tx_w;
    q["rx_w"] = rp.power.rx_w;
    q["cs_w"] = rp.power.cs_w;
    q["off_w"] = rp.power.off_w;
    q["switch_energy_j"] = rp.switch_energy_j;
    q["corner_loss_db"] = rp.corner_loss_db;
    q["capture_threshold_db"] = rp.capture_threshold_db;
    q["fading"] = rp.fading;
    q["max_fade_db"] = rp.max_fade_db;
    q["turnaround_s"] = rp.turnaround_s;
    q["cca_s"] = rp.cca_s;
    q["control_bytes"] = rp.control_bytes;
    j["radio"] = q;

    j["sim_time_s"] = s.sim_time;
    j["batches"] = s.batches;
    j["seed"] = s.seed;
    j["delay_policy"] = to_string(s.delay_policy);
    j["route_update_s"] = s.route_update;
    if (!s.sweep.empty()) {
        ojson sw = ojson::object();
        for (const auto& ax : s.sweep) sw[ax.path] = ax.values;
        j["sweep"] = sw;
    }
    return j;
}

Scenario parse_scenario(const std::string& text) {
    ojson j;
    try {
        j = ojson::parse(text);
    } catch (const ojson::parse_error& e) {
        throw ScenarioError(std::string("scenario: parse error: ") + e.what());
    }
    return scenario_from_json(j);
}

Scenario load_scenario(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ScenarioError("scenario: cannot open " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    Scenario s = parse_scenario(ss.str());
    // map files are looked up next to the scenario
    if (s.topology.kind == TopologyKind::File && std::filesystem::path(s.topology.path).is_relative())
        s.topology.path = (std::filesystem::path(path).parent_path() / s.topology.path).string();
    return s;
}

std::string serialize_scenario(const Scenario& s) { return scenario_to_json(s).dump(2) + "\n"; }

std::uint64_t scenario_hash(const Scenario& s) {
    std::string text = scenario_to_json(s).dump();
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : text) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::string SweepPoint::label() const {
    if (values.empty()) return "base";
    std::string out;
    for (const auto& [path, v] : values) {
        if (!out.empty()) out += ";";
        out += path + "=" + (v.is_string() ? v.get<std::string>() : v.dump());
    }
    return out;
}

std::vector<SweepPoint> expand_sweep(const Scenario& s) {
    ojson base = scenario_to_json(s);
    base.erase("sweep");
    std::vector<SweepPoint> points;
    std::vector<std::size_t> idx(s.sweep.size(), 0);
    for (;;) {
        SweepPoint p;
        p.index = points.size();
        ojson j = base;
        for (std::size_t a = 0; a < s.sweep.size(); ++a) {
            const auto& ax = s.sweep[a];
            const auto& v = ax.values[idx[a]];
            p.values.emplace_back(ax.path, v);
            ojson* node = &j;
            std::stringstream ss(ax.path);
            std::string part;
            std::vector<std::string> parts;
            while (std::getline(ss, part, '.')) parts.push_back(part);
            if (parts.empty()) throw ScenarioError("sweep: empty path");
            for (std::size_t i = 0; i + 1 < parts.size(); ++i) {
                if (!node->contains(parts[i])) (*node)[parts[i]] = ojson::object();
                node = &(*node)[parts[i]];
                if (!node->is_object()) throw ScenarioError("sweep." + ax.path + ": path does not name a field");
            }
            (*node)[parts.back()] = v;
        }
        try {
            p.scenario = scenario_from_json(j);
        } catch (const ScenarioError& e) {
            throw ScenarioError(std::string(e.what()) + " (sweep point " + p.label() + ")");
        }
        points.push_back(std::move(p));
        std::size_t a = s.sweep.size();
        while (a > 0) {
            --a;
            if (++idx[a] < s.sweep[a].values.size()) break;
            idx[a] = 0;
            if (a == 0) return points;
        }
        if (s.sweep.empty()) return points;
    }
}

Topology build_topology(const Scenario& s) {
    try {
        switch (s.topology.kind) {
            case TopologyKind::Cross: return build_cross_topology(s.topology.sensors, s.topology.tpo_dbm);
            case TopologyKind::ParkingMap: return build_parking_map(s.topology.tpo_dbm, s.radio);
            case TopologyKind::File:
                return build_from_map(load_map_description(s.topology.path), s.topology.tpo_dbm, s.radio);
        }
    } catch (const DisconnectedError&) {
        throw;
    } catch (const TopologyError& e) {
        throw ScenarioError(std::string("topology: ") + e.what());
    }
    throw ScenarioError("topology.kind: unsupported");
}

EngineConfig make_engine_config(const Scenario& s, const Topology& topo, std::uint32_t batch) {
    EngineConfig c;
    c.topology = topo;
    c.radio = s.radio;
    c.mac = s.mac;
    c.traffic = s.traffic.resolve();
    c.sim_time = s.sim_time;
    c.seed = s.seed;
    c.batch = batch;
    c.delay_policy = s.delay_policy;
    c.route_update_period = s.route_update;
    return c;
}

void preflight(const Scenario& s) {
    if (!s.sweep.empty()) {
        for (const auto& p : expand_sweep(s)) preflight(p.scenario);
        return;
    }
    Topology t = build_topology(s);
    try {
        compute_gradients(t, s.radio, s.route_update);
    } catch (const DisconnectedError& e) {
        throw ScenarioError(std::string("topology: ") + e.what());
    }
}

// Figure catalog

namespace {

Scenario base_scenario(const std::string& name) {
    Scenario s;
    s.name = name;
    return s;
}

SweepAxis axis(const std::string& path, std::vector<ojson> v) { return SweepAxis{path, std::move(v)}; }

std::vector<FigureEntry> make_catalog() {
    std::vector<FigureEntry> cat;
    const std::vector<ojson> modes = {"schedule", "contention"};
    const std::vector<ojson> sizes = {12, 24, 48, 96};
    {
        Scenario ev = base_scenario("energy-vs-N-event-driven");
        ev.sweep = {axis("topology.sensors", sizes), axis("mac.mode", modes)};
        Scenario per = base_scenario("energy-vs-N-periodic");
        per.traffic.mode = TrafficMode::Periodic;
        per.traffic.interval = 60.0;
        per.sweep = ev.sweep;
        cat.push_back({"energy-vs-N", "per-node energy against sensor count, both MACs and both applications", {ev, per}});
        Scenario dev = ev, dper = per;
        dev.name = "delay-vs-N-event-driven";
        dper.name = "delay-vs-N-periodic";
        cat.push_back({"delay-vs-N", "information delay against sensor count, both MACs", {dev, dper}});
    }
    {
        Scenario s = base_scenario("energy-vs-omega");
        s.traffic.mode = TrafficMode::Periodic;
        s.sweep = {axis("traffic.interval_s", {60, 120, 600, 1200}), axis("mac.mode", modes)};
        cat.push_back({"energy-vs-omega", "periodic reporting interval sweep at N=24", {s}});
    }
    {
        Scenario s = base_scenario("delay-vs-load");
        s.sweep = {axis("traffic.mean_cycle_s", {4800, 2400, 1200, 640, 320}), axis("mac.mode", modes)};
        cat.push_back({"delay-vs-load", "event-driven load sweep at N=24", {s}});
    }
    {
        Scenario s = base_scenario("energy-delay-tradeoff");
        s.traffic.mean_cycle = 160.0;
        std::vector<ojson> slots;
        for (int i = 1; i <= 12; ++i) slots.emplace_back(i / 10.0);
        s.sweep = {axis("mac.slot_s", slots), axis("mac.mode", modes)};
        cat.push_back({"energy-delay-tradeoff", "slot duration sweep 0.1 to 1.2 s at N=24, mean cycle 160 s", {s}});
    }
    {
        Scenario s = base_scenario("parking-map-load");
        s.topology.kind = TopologyKind::ParkingMap;
        s.sweep = {axis("topology.tpo_dbm", {3, 0, -3, -7}), axis("mac.mode", modes)};
        cat.push_back({"parking-map-load", "120-sensor street map with repeaters, four transmit powers", {s}});
    }
    return cat;
}

}  // namespace

const std::vector<FigureEntry>& figure_catalog() {
    static const std::vector<FigureEntry> cat = make_catalog();
    return cat;
}

const FigureEntry* find_figure(const std::string& id) {
    for (const auto& f : figure_catalog())
        if (f.id == id) return &f;
    return nullptr;
}

}  // namespace parksim
