#include "parksim/engine.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <map>
#include <unordered_set>

namespace parksim {
namespace {

enum class FrameType : std::uint8_t { Beacon, Grant, Data, Ack };

struct Frame {
    std::uint64_t id = 0;
    NodeId src = kNoNode;
    NodeId dst = kNoNode;
    FrameType type = FrameType::Beacon;
    Seconds start = 0.0;
    Seconds end = 0.0;
    bool dst_rx = false;
    Packet packet;
    std::vector<std::pair<NodeId, double>> fades;
};

enum class MacState : std::uint8_t { Idle, Waiting, Listening, Active };

struct Cell {
    NodeId coord = kNoNode;
    std::vector<NodeId> sensors;
    std::vector<NodeId> children;
    std::vector<NodeId> contenders;  // sensors and children, ascending id
    SlotLayout layout;
    Seconds t_dc = 0.0;
    Seconds origin = 0.0;
    bool slot_pending = false;
    std::size_t rr = 0;
    std::vector<NodeId> service;
    std::size_t service_pos = 0;
    Seconds service_end = 0.0;
    NodeId claimed_by = kNoNode;  // contention: the one node granted this slot
    Seconds slot_end = 0.0;
};

struct NodeRt {
    Role role = Role::Sensor;
    bool enabled = true;
    NodeId parent = kNoNode;
    int up_cell = -1;
    TxQueue queue;
    RadioTracker radio;
    RngStream traffic;
    RngStream backoff;
    RngStream fade;
    ParkingProcess proc;
    Seconds last_change = 0.0;
    std::uint64_t seq = 0;
    int cw = 32;
    MacState mac = MacState::Idle;
    EventHandle pending;
    Seconds expiry = 0.0;
    std::size_t listener_pos = SIZE_MAX;
    bool engaged = false;
    NodeId serving = kNoNode;
    Seconds window_end = 0.0;
    bool burst = false;
    int s0_cell = -1;
    NodeId inflight_src = kNoNode;
    std::uint64_t inflight_seq = 0;
    std::unordered_set<std::uint64_t> seen;
    NodeReport rep;
};

std::uint64_t packet_key(NodeId src, std::uint64_t seq) { return (static_cast<std::uint64_t>(src) << 40) ^ seq; }

class Engine {
public:
    explicit Engine(const EngineConfig& cfg) : cfg_(cfg), topo_(cfg.topology) {
        cfg_.radio.validate();
        cfg_.traffic.validate();
        cfg_.mac.validate(cfg_.radio);
        if (!(cfg_.sim_time > 0)) throw std::invalid_argument("sim_time must be > 0");
        topo_.validate();
        routes_ = compute_gradients(topo_, cfg_.radio, cfg_.route_update_period);
        ctrl_air_ = airtime(cfg_.radio.control_bytes, cfg_.radio.data_rate_bps);
        txn_time_ = transaction_time(cfg_.mac, cfg_.radio);
        build_links();
        build_nodes();
        build_cells();
        tracker_ = DelayTracker(topo_.nodes.size(), cfg_.delay_policy);
        if (cfg_.record_attempts) result_.attempts.resize(topo_.nodes.size());
        sim_.set_trace([this](const TraceRecord& r) {
            std::uint64_t bits;
            std::memcpy(&bits, &r.time, sizeof bits);
            mix(bits);
            mix(static_cast<std::uint64_t>(r.kind) << 32 | r.target);
        });
    }

    RunResult run() {
        start_traffic();
        if (cfg_.route_update_period > 0 && cfg_.route_update_period < cfg_.sim_time)
            sim_.schedule_at(cfg_.route_update_period, topo_.gateway, EventKind::RouteUpdate, [this] { route_update(); });
        sim_.run_until(cfg_.sim_time);
        return finish();
    }

private:
    // setup

    void mix(std::uint64_t v) {
        for (int i = 0; i < 8; ++i) {
            hash_ ^= (v >> (8 * i)) & 0xff;
            hash_ *= 0x100000001b3ULL;
        }
    }

    void build_links() {
        const std::size_t n = topo_.nodes.size();
        mean_rx_.assign(n * n, -1e9);
        for (NodeId a = 0; a < n; ++a) {
            if (!topo_.nodes[a].enabled) continue;
            for (NodeId b = 0; b < n; ++b)
                if (a != b && topo_.nodes[b].enabled) mean_rx_[a * n + b] = topo_.mean_rx_dbm(a, b, cfg_.radio);
        }
    }

    double rx(NodeId from, NodeId to) const { return mean_rx_[from * topo_.nodes.size() + to]; }

    void build_nodes() {
        nodes_.resize(topo_.nodes.size());
        for (const auto& n : topo_.nodes) {
            auto& rt = nodes_[n.id];
            rt.role = n.role;
            rt.enabled = n.enabled;
            rt.queue = TxQueue(cfg_.mac.queue_capacity);
            rt.radio = RadioTracker(0.0, is_ffd(n.role) ? RadioState::Cs : RadioState::Off);
            rt.traffic = RngStream(cfg_.seed, {cfg_.batch, n.id, StreamPurpose::Traffic});
            rt.backoff = RngStream(cfg_.seed, {cfg_.batch, n.id, StreamPurpose::Backoff});
            rt.fade = RngStream(cfg_.seed, {cfg_.batch, n.id, StreamPurpose::Fading});
            rt.cw = cfg_.mac.cw_min;
            rt.rep.id = n.id;
            rt.rep.role = n.role;
            if (n.enabled && n.id != topo_.gateway) rt.parent = routes_.next_hop[n.id];
        }
    }

    void build_cells() {
        cell_of_.assign(topo_.nodes.size(), -1);
        for (NodeId f : topo_.ffds()) {
            Cell c;
            c.coord = f;
            for (NodeId v = 0; v < nodes_.size(); ++v) {
                if (!nodes_[v].enabled || nodes_[v].parent != f) continue;
                (nodes_[v].role == Role::Sensor ? c.sensors : c.children).push_back(v);
                c.contenders.push_back(v);
            }
            c.layout = SlotLayout(f, c.sensors);
            c.t_dc = duty_cycle_length(cfg_.mac, c.sensors.size());
            RngStream ph(cfg_.seed, {cfg_.batch, f, StreamPurpose::CellPhase});
            c.origin = ph.uniform(0.0, c.t_dc);
            cell_of_[f] = static_cast<int>(cells_.size());
            cells_.push_back(std::move(c));
        }
        for (NodeId v = 0; v < nodes_.size(); ++v) {
            auto& rt = nodes_[v];
            if (rt.parent == kNoNode) continue;
            rt.up_cell = cell_of_[rt.parent];
            rt.rep.t_dc = cells_[static_cast<std::size_t>(rt.up_cell)].t_dc;
        }
    }

    void start_traffic() {
        const auto& tc = cfg_.traffic;
        for (NodeId s : topo_.sensors()) {
            auto& rt = nodes_[s];
            rt.proc = ParkingProcess(tc.occupied, tc.vacant);
            RngStream init(cfg_.seed, {cfg_.batch, s, StreamPurpose::InitialStatus});
            rt.proc.start(0.0, init, tc.equilibrium_start);
            schedule_toggle(s);
            if (tc.mode == TrafficMode::Periodic) {
                RngStream ph(cfg_.seed, {cfg_.batch, s, StreamPurpose::PeriodicPhase});
                Seconds phase = ph.uniform(0.0, tc.interval);
                Seconds t = periodic_next_emit(tc.interval, phase, 0.0);
                if (t <= cfg_.sim_time)
                    sim_.schedule_at(t, s, EventKind::AppTimer, [this, s] { on_periodic(s); });
            }
        }
    }

    void schedule_toggle(NodeId s) {
        Seconds t = nodes_[s].proc.next_toggle_at();
        if (t <= cfg_.sim_time) sim_.schedule_at(t, s, EventKind::StatusToggle, [this, s] { on_toggle(s); });
    }

    // traffic

    Packet make_packet(NodeId s) {
        auto& rt = nodes_[s];
        Packet p;
        p.source = s;
        p.seq = ++rt.seq;
        p.status = rt.proc.status();
        p.status_changed_at = rt.last_change;
        p.created_at = sim_.now();
        p.size = cfg_.mac.packet_bytes;
        ++rt.rep.generated;
        ++result_.generated;
        return p;
    }

    void on_toggle(NodeId s) {
        auto& rt = nodes_[s];
        rt.proc.next_transition(sim_.now(), rt.traffic);
        rt.last_change = sim_.now();
        tracker_.record_status_change(s, sim_.now());
        if (cfg_.traffic.mode == TrafficMode::EventDriven) enqueue(s, make_packet(s), QueuePolicy::Append);
        schedule_toggle(s);
    }

    void on_periodic(NodeId s) {
        enqueue(s, make_packet(s), QueuePolicy::ReplaceUnsent);
        Seconds t = sim_.now() + cfg_.traffic.interval;
        if (t <= cfg_.sim_time) sim_.schedule_at(t, s, EventKind::AppTimer, [this, s] { on_periodic(s); });
    }

    void enqueue(NodeId x, Packet p, QueuePolicy policy) {
        auto& rt = nodes_[x];
        auto r = rt.queue.push(std::move(p), policy);
        if (r.replaced) ++rt.rep.replaced;
        if (r.overflow_dropped) ++rt.rep.overflow_drops;
        request_access(x);
    }

    // channel access

    Cell& up_cell(NodeId x) { return cells_[static_cast<std::size_t>(nodes_[x].up_cell)]; }

    void wake(NodeId x) {
        if (nodes_[x].role == Role::Sensor) nodes_[x].radio.set_base(sim_.now(), RadioState::Cs);
    }
    void sleep(NodeId x) {
        if (nodes_[x].role == Role::Sensor) nodes_[x].radio.set_base(sim_.now(), RadioState::Off);
    }

    Seconds next_cycle_after(const Cell& c, Seconds now) const {
        double m = std::floor((now - c.origin) / c.t_dc) + 1.0;
        if (m < 0) m = 0;
        Seconds t = c.origin + m * c.t_dc;
        while (t <= now) t = c.origin + (++m) * c.t_dc;
        return t;
    }

    void request_access(NodeId x) {
        auto& rt = nodes_[x];
        if (rt.mac != MacState::Idle || rt.engaged || rt.queue.empty() || rt.up_cell < 0) return;
        Cell& c = up_cell(x);
        rt.mac = MacState::Waiting;
        if (cfg_.mac.mode == MacMode::Schedule) {
            if (rt.role == Role::Sensor) {
                std::size_t slot = c.layout.slot_of(x);
                Seconds t = next_owned_slot(c.origin, c.t_dc, slot, cfg_.mac.slot, sim_.now());
                rt.pending = sim_.schedule_at(t, x, EventKind::SlotBegin, [this, x, t] { on_owned_slot(x, t); });
            } else {
                ensure_s0(c);
            }
        } else {
            ensure_contention(c);
        }
    }

    void on_owned_slot(NodeId x, Seconds t0) {
        auto& rt = nodes_[x];
        rt.pending = {};
        if (rt.queue.empty()) {
            rt.mac = MacState::Idle;
            return;
        }
        rt.mac = MacState::Active;
        rt.window_end = t0 + cfg_.mac.slot;
        rt.burst = false;
        wake(x);
        start_transaction(x);
    }

    void ensure_s0(Cell& c) {
        if (c.slot_pending) return;
        c.slot_pending = true;
        Seconds t = next_cycle_after(c, sim_.now());
        auto idx = static_cast<std::size_t>(&c - cells_.data());
        sim_.schedule_at(t, c.coord, EventKind::SlotBegin, [this, idx, t] { on_s0(idx, t); });
    }

    void on_s0(std::size_t idx, Seconds t0) {
        Cell& c = cells_[idx];
        c.slot_pending = false;
        c.service.clear();
        const std::size_t k = c.children.size();
        for (std::size_t i = 0; i < k; ++i) {
            NodeId ch = c.children[(c.rr + i) % k];
            if (nodes_[ch].mac == MacState::Waiting) c.service.push_back(ch);
        }
        c.rr = k ? (c.rr + 1) % k : 0;
        c.service_pos = 0;
        c.service_end = t0 + cfg_.mac.slot;
        serve_next(idx);
    }

    void serve_next(std::size_t idx) {
        Cell& c = cells_[idx];
        while (c.service_pos < c.service.size()) {
            NodeId x = c.service[c.service_pos];
            auto& rt = nodes_[x];
            if (rt.mac != MacState::Waiting || rt.engaged || rt.queue.empty()) {
                ++c.service_pos;
                continue;
            }
            if (sim_.now() + txn_time_ > c.service_end) break;
            ++c.service_pos;
            rt.mac = MacState::Active;
            rt.window_end = c.service_end;
            rt.burst = true;
            rt.s0_cell = static_cast<int>(idx);
            start_transaction(x);
            return;
        }
        for (NodeId ch : c.children)
            if (nodes_[ch].mac == MacState::Waiting) {
                ensure_s0(c);
                break;
            }
    }

    void ensure_contention(Cell& c) {
        if (c.slot_pending) return;
        c.slot_pending = true;
        Seconds t = next_cycle_after(c, sim_.now());
        auto idx = static_cast<std::size_t>(&c - cells_.data());
        sim_.schedule_at(t, c.coord, EventKind::SlotBegin, [this, idx, t] { on_contention_slot(idx, t); });
    }

    void on_contention_slot(std::size_t idx, Seconds t0) {
        Cell& c = cells_[idx];
        c.slot_pending = false;
        c.claimed_by = kNoNode;
        c.slot_end = t0 + cfg_.mac.slot;
        for (NodeId x : c.contenders) {
            auto& rt = nodes_[x];
            if (rt.mac != MacState::Waiting || rt.engaged || rt.queue.empty()) continue;
            wake(x);
            int b = contention_draw(rt.cw, rt.backoff);
            rt.window_end = t0 + cfg_.mac.slot;
            rt.burst = true;
            listen(x, t0 + cfg_.radio.cca_s + b * cfg_.mac.micro_slot);
        }
    }

    void drop_listener(NodeId x) {
        auto& rt = nodes_[x];
        if (rt.listener_pos == SIZE_MAX) return;
        NodeId last = listeners_.back();
        listeners_[rt.listener_pos] = last;
        nodes_[last].listener_pos = rt.listener_pos;
        listeners_.pop_back();
        rt.listener_pos = SIZE_MAX;
    }

    void listen(NodeId x, Seconds expiry) {
        auto& rt = nodes_[x];
        rt.expiry = expiry;
        rt.mac = MacState::Listening;
        rt.listener_pos = listeners_.size();
        listeners_.push_back(x);
        rt.pending = sim_.schedule_at(expiry, x, EventKind::RadioSwitch, [this, x] { on_backoff_expiry(x); });
    }

    void on_backoff_expiry(NodeId x) {
        auto& rt = nodes_[x];
        rt.pending = {};
        drop_listener(x);
        rt.mac = MacState::Active;
        start_transaction(x);
    }

    void defer(NodeId x) {
        auto& rt = nodes_[x];
        sim_.cancel(rt.pending);
        rt.pending = {};
        drop_listener(x);
        sleep(x);
        rt.mac = MacState::Idle;
        request_access(x);
    }

    // transactions

    void start_transaction(NodeId x) {
        auto& rt = nodes_[x];
        if (rt.queue.empty()) {
            end_access(x);
            return;
        }
        rt.engaged = true;
        rt.queue.head_in_flight = true;
        rt.inflight_src = rt.queue.front().source;
        rt.inflight_seq = rt.queue.front().seq;
        ++rt.rep.attempts;
        if (cfg_.record_attempts) result_.attempts[x].push_back({sim_.now(), false});
        start_frame(x, rt.parent, FrameType::Beacon, nullptr);
    }

    void start_frame_at(Seconds t, NodeId src, NodeId dst, FrameType type, const Packet* p) {
        std::optional<Packet> copy;
        if (p) copy = *p;
        sim_.schedule_at(t, src, EventKind::RadioSwitch, [this, src, dst, type, copy] {
            start_frame(src, dst, type, copy ? &*copy : nullptr);
        });
    }

    void start_frame(NodeId src, NodeId dst, FrameType type, const Packet* p) {
        const Seconds now = sim_.now();
        prune_air(now);
        Frame f;
        f.id = ++frame_seq_;
        f.src = src;
        f.dst = dst;
        f.type = type;
        f.start = now;
        f.end = now + (type == FrameType::Data ? airtime(cfg_.mac.packet_bytes, cfg_.radio.data_rate_bps) : ctrl_air_);
        if (p) f.packet = *p;
        nodes_[src].radio.begin_tx(now);
        auto& d = nodes_[dst];
        if (d.enabled && d.radio.awake() && !d.radio.transmitting()) {
            d.radio.begin_rx(now);
            f.dst_rx = true;
        }
        const std::uint64_t id = f.id;
        const Seconds end = f.end;
        air_.emplace(id, std::move(f));
        overhear(src, now);
        sim_.schedule_at(end, dst, type == FrameType::Data ? EventKind::DataEnd : EventKind::BeaconEnd,
                         [this, id] { on_frame_end(id); });
    }

    // Listeners still in backoff detect a frame that starts at least one CCA
    // before their own transmission and give up the slot.
    void overhear(NodeId src, Seconds start) {
        if (listeners_.empty()) return;
        std::vector<NodeId> heard;
        for (NodeId l : listeners_) {
            if (l == src) continue;
            auto& rt = nodes_[l];
            if (start > rt.expiry - cfg_.radio.cca_s + 1e-12) continue;
            double m = rx(src, l);
            if (m + cfg_.radio.max_fade_db < cfg_.radio.sensitivity_dbm) continue;
            if (m + rayleigh_fade_db(rt.fade, cfg_.radio) >= cfg_.radio.sensitivity_dbm) heard.push_back(l);
        }
        for (NodeId l : heard) defer(l);
    }

    void prune_air(Seconds now) {
        while (!air_.empty() && air_.begin()->second.end < now - 0.05) air_.erase(air_.begin());
    }

    double fade_for(Frame& f, NodeId at) {
        for (const auto& [n, v] : f.fades)
            if (n == at) return v;
        double v = rayleigh_fade_db(nodes_[at].fade, cfg_.radio);
        f.fades.emplace_back(at, v);
        return v;
    }

    // Returns the outcome at f.dst; `collision` is set when overlapping
    // frames destroyed it.
    LinkOutcome evaluate(Frame& f) {
        const NodeId dst = f.dst;
        if (!f.dst_rx) return LinkOutcome::LostFade;
        std::vector<Frame*> overlapping;
        for (auto& [id, g] : air_) {
            if (id == f.id || !(g.start < f.end && g.end > f.start)) continue;
            if (g.src == dst) return LinkOutcome::LostFade;  // half duplex
            overlapping.push_back(&g);
        }
        double mean = rx(f.src, dst);
        double fade = fade_for(f, dst);
        std::vector<double> interferers;
        for (Frame* g : overlapping) {
            double m = rx(g->src, dst);
            if (m + cfg_.radio.max_fade_db < mean + fade - cfg_.radio.capture_threshold_db) continue;
            interferers.push_back(m + fade_for(*g, dst));
        }
        return link_delivers(mean, fade, interferers, cfg_.radio);
    }

    void on_frame_end(std::uint64_t id) {
        const Seconds now = sim_.now();
        Frame& f = air_.at(id);
        nodes_[f.src].radio.end_tx(now);
        if (f.dst_rx) nodes_[f.dst].radio.end_rx(now);
        LinkOutcome out = evaluate(f);
        bool ok = out == LinkOutcome::Delivered;
        const Seconds ta = cfg_.radio.turnaround_s;
        const NodeId src = f.src, dst = f.dst;
        switch (f.type) {
            case FrameType::Beacon: {
                auto& c = nodes_[dst];
                if (ok && !slot_open(dst, src, now)) {
                    lose_at(src, now + ta + ctrl_air_);
                } else if (ok && c.serving == kNoNode && !c.engaged) {
                    c.serving = src;
                    claim(dst, src);
                    start_frame_at(now + ta, dst, src, FrameType::Grant, nullptr);
                } else {
                    fail_at(src, now + ta + ctrl_air_, out);
                }
                break;
            }
            case FrameType::Grant: {
                auto& x = nodes_[dst];
                if (ok && !x.queue.empty()) {
                    start_frame_at(now + ta, dst, src, FrameType::Data, &x.queue.front());
                } else {
                    nodes_[src].serving = kNoNode;
                    fail(dst, out);
                }
                break;
            }
            case FrameType::Data: {
                if (ok) {
                    accept(dst, f.packet);
                    start_frame_at(now + ta, dst, src, FrameType::Ack, nullptr);
                } else {
                    if (out == LinkOutcome::LostCollision) ++result_.data_collisions;
                    nodes_[dst].serving = kNoNode;
                    fail_at(src, now + ta + ctrl_air_, out);
                }
                break;
            }
            case FrameType::Ack: {
                nodes_[src].serving = kNoNode;
                if (ok)
                    succeed(dst);
                else
                    fail(dst, out);
                break;
            }
        }
    }

    void accept(NodeId c, const Packet& p) {
        auto& rt = nodes_[c];
        if (!rt.seen.insert(packet_key(p.source, p.seq)).second) return;
        if (c == topo_.gateway) {
            ++result_.delivered;
            result_.delivered_sources.push_back(p.source);
            Seconds md = sim_.now() - p.created_at;
            result_.mac_delays.push_back({p.source, md, cycle_index(md, nodes_[p.source].rep.t_dc)});
            tracker_.record_gateway_reception(p, sim_.now(), nodes_[p.source].rep.t_dc);
            return;
        }
        Packet fwd = p;
        fwd.retries_used = 0;
        ++fwd.hop_count;
        ++rt.rep.received_for_forwarding;
        enqueue(c, fwd, QueuePolicy::Append);
    }

    bool head_matches(NodeRt& rt) const {
        return !rt.queue.empty() && rt.queue.front().source == rt.inflight_src &&
               rt.queue.front().seq == rt.inflight_seq;
    }

    void succeed(NodeId x) {
        auto& rt = nodes_[x];
        rt.engaged = false;
        rt.queue.head_in_flight = false;
        if (head_matches(rt)) {
            rt.queue.pop();
            ++rt.rep.sent;
            if (rt.role != Role::Sensor) ++rt.rep.forwarded;
        }
        if (cfg_.record_attempts && !result_.attempts[x].empty()) result_.attempts[x].back().ok = true;
        rt.cw = backoff_window_update(rt.cw, AttemptOutcome::Success, cfg_.mac);
        const Seconds ta = cfg_.radio.turnaround_s;
        if (rt.burst && !rt.queue.empty() && sim_.now() + ta + txn_time_ <= rt.window_end) {
            sim_.schedule_at(sim_.now() + ta, x, EventKind::RadioSwitch, [this, x] { start_transaction(x); });
            return;
        }
        end_access(x);
    }

    // A contention slot carries the traffic of a single granted node.
    bool slot_open(NodeId coord, NodeId src, Seconds now) const {
        if (cfg_.mac.mode != MacMode::Contention || cell_of_[coord] < 0) return true;
        const Cell& c = cells_[static_cast<std::size_t>(cell_of_[coord])];
        return c.claimed_by == kNoNode || c.claimed_by == src || now >= c.slot_end;
    }

    void claim(NodeId coord, NodeId src) {
        if (cfg_.mac.mode != MacMode::Contention || cell_of_[coord] < 0) return;
        cells_[static_cast<std::size_t>(cell_of_[coord])].claimed_by = src;
    }

    // Beacon heard but the slot already belongs to someone else: back off to
    // the next cycle like a deferring listener.
    void lose_at(NodeId x, Seconds t) {
        sim_.schedule_at(t, x, EventKind::RadioSwitch, [this, x] {
            auto& rt = nodes_[x];
            rt.engaged = false;
            rt.queue.head_in_flight = false;
            end_access(x);
        });
    }

    void fail_at(NodeId x, Seconds t, LinkOutcome out) {
        sim_.schedule_at(t, x, EventKind::RadioSwitch, [this, x, out] { fail(x, out); });
    }

    void fail(NodeId x, LinkOutcome out) {
        auto& rt = nodes_[x];
        rt.engaged = false;
        rt.queue.head_in_flight = false;
        if (head_matches(rt)) {
            auto& p = rt.queue.front();
            if (++p.retries_used > cfg_.mac.max_retries) {
                rt.queue.pop();
                ++rt.rep.retry_drops;
                ++result_.retry_drops;
            }
        }
        rt.cw = backoff_window_update(
            rt.cw, out == LinkOutcome::LostCollision ? AttemptOutcome::Collision : AttemptOutcome::Lost, cfg_.mac);
        // A contender that still holds the slot backs off again inside it.
        if (cfg_.mac.mode == MacMode::Contention && !rt.queue.empty()) {
            Seconds expiry = sim_.now() + cfg_.radio.cca_s + contention_draw(rt.cw, rt.backoff) * cfg_.mac.micro_slot;
            if (expiry + txn_time_ <= rt.window_end) {
                listen(x, expiry);
                return;
            }
        }
        end_access(x);
    }

    void end_access(NodeId x) {
        auto& rt = nodes_[x];
        rt.mac = MacState::Idle;
        rt.burst = false;
        sleep(x);
        int s0 = rt.s0_cell;
        rt.s0_cell = -1;
        request_access(x);
        if (s0 >= 0) serve_next(static_cast<std::size_t>(s0));
    }

    void route_update() {
        GradientTable fresh = compute_gradients(topo_, cfg_.radio, cfg_.route_update_period);
        if (fresh.next_hop != routes_.next_hop) throw std::logic_error("routes changed on a static topology");
        routes_ = std::move(fresh);
        ++result_.route_updates;
        Seconds t = sim_.now() + cfg_.route_update_period;
        if (t < cfg_.sim_time)
            sim_.schedule_at(t, topo_.gateway, EventKind::RouteUpdate, [this] { route_update(); });
    }

    RunResult finish() {
        const Seconds end = cfg_.sim_time;
        std::vector<Seconds> tdc(nodes_.size(), 0.0);
        for (std::size_t i = 0; i < nodes_.size(); ++i) tdc[i] = nodes_[i].rep.t_dc;
        tracker_.finish(end, tdc);
        result_.sim_time = end;
        for (auto& rt : nodes_) {
            rt.radio.close(end);
            rt.rep.ledger = rt.radio.ledger();
            rt.rep.joules = rt.rep.ledger.joules(cfg_.radio);
            rt.rep.queued_at_end = rt.queue.size();
            result_.overflow_drops += rt.rep.overflow_drops;
            result_.replaced += rt.rep.replaced;
            result_.nodes.push_back(rt.rep);
        }
        result_.delays = tracker_.samples();
        result_.status_changes = tracker_.changes();
        result_.missed_changes = tracker_.missed();
        result_.events = sim_.processed();
        result_.trace_hash = hash_;
        result_.routes = routes_;
        return std::move(result_);
    }

    EngineConfig cfg_;
    Topology topo_;
    GradientTable routes_;
    Simulator sim_;
    std::vector<double> mean_rx_;
    std::vector<NodeRt> nodes_;
    std::vector<Cell> cells_;
    std::vector<int> cell_of_;
    std::vector<NodeId> listeners_;
    std::map<std::uint64_t, Frame> air_;
    std::uint64_t frame_seq_ = 0;
    Seconds ctrl_air_ = 0.0;
    Seconds txn_time_ = 0.0;
    DelayTracker tracker_;
    RunResult result_;
    std::uint64_t hash_ = 0xcbf29ce484222325ULL;
};

}  // namespace

RunResult simulate(const EngineConfig& cfg) {
    Engine e(cfg);
    return e.run();
}

}  // namespace parksim
