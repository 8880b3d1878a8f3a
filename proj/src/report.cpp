#include "parksim/report.hpp"

#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#ifndef PARKSIM_VERSION
#define PARKSIM_VERSION "0.0.0"
#endif

namespace parksim {

const char* const kVersion = PARKSIM_VERSION;

std::string format_double(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

namespace {

Seconds mean_sensor_tdc(const RunResult& r) {
    double sum = 0;
    std::size_t n = 0;
    for (const auto& nd : r.nodes)
        if (nd.role == Role::Sensor && nd.t_dc > 0) {
            sum += nd.t_dc;
            ++n;
        }
    return n ? sum / static_cast<double>(n) : 0.0;
}

}  // namespace

NamedMetrics summarize_run(const RunResult& r, const RunSummary& ctx) {
    const double nan = std::nan("");
    NamedMetrics m;
    auto put = [&](const char* k, double v) { m.emplace_back(k, v); };

    std::vector<double> delays;
    std::size_t censored = 0;
    for (const auto& d : r.delays) {
        if (d.censored)
            ++censored;
        else
            delays.push_back(d.delay);
    }
    SummaryStats ds = summarize(delays);
    Seconds tdc = mean_sensor_tdc(r);

    std::vector<double> mac;
    for (const auto& d : r.mac_delays) mac.push_back(d.delay);
    SummaryStats ms = summarize(mac);

    double p1 = nan, p2 = nan, cycle_sum = nan, analytic = nan;
    CycleHistogram h = build_histogram(r.delays, true);
    if (ctx.traffic == TrafficMode::Periodic) {
        // Cycle probabilities of the MAC alone, counted from report creation.
        CycleHistogram hm;
        for (const auto& d : r.mac_delays) hm.add(d.cycles);
        hm.dropped = r.retry_drops;
        h = hm;
    }
    if (h.attempts() > 0) {
        auto p = estimate_cycle_probabilities(h);
        p1 = p.empty() ? 0.0 : p[0];
        p2 = p.size() > 1 ? p[1] : 1.0;
        CycleHistogram hd = build_histogram(r.delays, false);
        if (hd.attempts() > 0) cycle_sum = expected_delay_from_cycles(estimate_cycle_probabilities(hd), tdc);
        if (p1 > 0 && p2 > 0 && tdc > 0) {
            if (ctx.traffic == TrafficMode::Periodic)
                analytic = analytic_delay_periodic(ctx.interval, p1, p2, tdc);
            else if (ctx.mode == MacMode::Schedule)
                analytic = analytic_delay_schedule(p1, tdc);
            else
                analytic = analytic_delay_contention(p1, p2, tdc);
        }
    }

    std::vector<double> sensor_j, ffd_j, loads;
    for (const auto& nd : r.nodes) {
        if (nd.role == Role::Sensor)
            sensor_j.push_back(nd.joules);
        else
            ffd_j.push_back(nd.joules);
        if (nd.role == Role::Repeater) loads.push_back(static_cast<double>(nd.forwarded));
    }
    SummaryStats es = summarize(sensor_j);
    SummaryStats fs = summarize(ffd_j);
    SummaryStats ls = summarize(loads);
    double lmax = 0;
    for (double l : loads) lmax = std::max(lmax, l);

    put("generated", static_cast<double>(r.generated));
    put("delivered", static_cast<double>(r.delivered));
    put("pdr", r.pdr());
    put("retry_drops", static_cast<double>(r.retry_drops));
    put("overflow_drops", static_cast<double>(r.overflow_drops));
    put("replaced", static_cast<double>(r.replaced));
    put("data_collisions", static_cast<double>(r.data_collisions));
    put("status_changes", static_cast<double>(r.status_changes));
    put("censored", static_cast<double>(censored));
    put("mean_delay_s", ds.n ? ds.mean : nan);
    put("mac_delay_s", ms.n ? ms.mean : nan);
    put("p1", p1);
    put("p2", p2);
    put("cycle_sum_delay_s", cycle_sum);
    put("analytic_delay_s", analytic);
    put("t_dc_s", tdc);
    put("sensor_energy_j", es.mean);
    put("sensor_energy_sd_j", es.stddev);
    put("ffd_energy_j", fs.mean);
    put("repeaters", static_cast<double>(loads.size()));
    put("router_load_max", lmax);
    put("router_load_mean", ls.mean);
    put("router_load_ratio", ls.mean > 0 ? lmax / ls.mean : nan);
    put("events", static_cast<double>(r.events));
    return m;
}

PointResult run_point(const SweepPoint& p, unsigned workers) {
    PointResult out;
    out.point = p;
    const Scenario& s = p.scenario;
    out.topology = build_topology(s);
    RunSummary ctx{s.mac.mode, s.traffic.mode, s.traffic.interval};
    out.batches = run_indexed<RunResult>(s.batches, workers, [&](std::size_t b) {
        return simulate(make_engine_config(s, out.topology, static_cast<std::uint32_t>(b)));
    });
    std::vector<NamedMetrics> per;
    for (const auto& r : out.batches) per.push_back(summarize_run(r, ctx));
    out.aggregate = aggregate_batches(per);
    return out;
}

std::vector<PointResult> run_scenario(const Scenario& s, unsigned workers,
                                      const std::function<void(const PointResult&)>& on_point, bool keep_batches) {
    auto points = expand_sweep(s);
    for (const auto& p : points) {
        try {
            preflight(p.scenario);
        } catch (const ScenarioError& e) {
            throw ScenarioError(std::string(e.what()) + " (sweep point " + p.label() + ")");
        }
    }
    std::vector<PointResult> out;
    for (const auto& p : points) {
        out.push_back(run_point(p, workers));
        if (on_point) on_point(out.back());
        if (!keep_batches) {
            out.back().batches.clear();
            out.back().batches.shrink_to_fit();
        }
    }
    return out;
}

std::string delays_csv(const PointResult& p) {
    std::ostringstream os;
    os << kDelayHeader << '\n';
    for (std::size_t b = 0; b < p.batches.size(); ++b)
        for (const auto& d : p.batches[b].delays)
            os << b << ',' << d.sensor << ',' << format_double(d.status_changed_at) << ',' << format_double(d.delay)
               << ',' << d.cycles_waited << ',' << (d.censored ? 1 : 0) << '\n';
    return os.str();
}

std::string energy_csv(const PointResult& p) {
    std::ostringstream os;
    os << kEnergyHeader << '\n';
    for (std::size_t b = 0; b < p.batches.size(); ++b)
        for (const auto& n : p.batches[b].nodes) {
            const auto& l = n.ledger;
            os << b << ',' << n.id << ',' << to_string(n.role) << ',' << format_double(n.joules) << ','
               << format_double(l.seconds(RadioState::Tx)) << ',' << format_double(l.seconds(RadioState::Rx)) << ','
               << format_double(l.seconds(RadioState::Cs)) << ',' << format_double(l.seconds(RadioState::Off)) << ','
               << l.switches() << '\n';
        }
    return os.str();
}

std::string cycles_csv(const PointResult& p) {
    std::ostringstream os;
    os << kCyclesHeader << '\n';
    for (std::size_t b = 0; b < p.batches.size(); ++b) {
        CycleHistogram h = build_histogram(p.batches[b].delays, true);
        if (h.attempts() == 0) continue;
        auto probs = estimate_cycle_probabilities(h);
        for (std::size_t i = 0; i < h.counts.size(); ++i)
            os << b << ',' << (i + 1) << ',' << h.counts[i] << ','
               << (i < probs.size() ? format_double(probs[i]) : std::string("nan")) << '\n';
    }
    return os.str();
}

std::string routers_csv(const PointResult& p) {
    std::ostringstream os;
    os << kRoutersHeader << '\n';
    for (std::size_t b = 0; b < p.batches.size(); ++b) {
        const auto& r = p.batches[b];
        for (const auto& n : r.nodes) {
            if (n.role != Role::Repeater) continue;
            os << b << ',' << n.id << ',' << p.topology.nodes.at(n.id).tier << ',' << r.routes.gradient.at(n.id) << ','
               << n.received_for_forwarding << ',' << n.forwarded << ',' << n.retry_drops << ',' << n.overflow_drops
               << ',' << n.queued_at_end << '\n';
        }
    }
    return os.str();
}

namespace {

std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + "\"";
}

std::string sweep_value(const ojson& v) { return v.is_string() ? v.get<std::string>() : v.dump(); }

void sweep_header(std::ostream& os, const Scenario& s) {
    os << "point";
    for (const auto& ax : s.sweep) os << ',' << csv_field(ax.path);
}

void sweep_cells(std::ostream& os, const PointResult& p) {
    os << p.point.index;
    for (const auto& [path, v] : p.point.values) os << ',' << csv_field(sweep_value(v));
}

}  // namespace

std::string summary_csv(const Scenario& s, const std::vector<PointResult>& pts) {
    std::ostringstream os;
    sweep_header(os, s);
    os << ",batch";
    if (!pts.empty())
        for (const auto& n : pts.front().aggregate.names) os << ',' << n;
    os << '\n';
    for (const auto& p : pts)
        for (std::size_t b = 0; b < p.aggregate.per_batch.size(); ++b) {
            sweep_cells(os, p);
            os << ',' << b;
            for (double v : p.aggregate.per_batch[b]) os << ',' << format_double(v);
            os << '\n';
        }
    return os.str();
}

std::string aggregate_csv(const Scenario& s, const std::vector<PointResult>& pts) {
    std::ostringstream os;
    sweep_header(os, s);
    os << ",batches";
    if (!pts.empty())
        for (const auto& n : pts.front().aggregate.names) os << ',' << n << "_mean," << n << "_sd";
    os << '\n';
    for (const auto& p : pts) {
        sweep_cells(os, p);
        os << ',' << p.aggregate.per_batch.size();
        for (const auto& st : p.aggregate.stats) os << ',' << format_double(st.mean) << ',' << format_double(st.stddev);
        os << '\n';
    }
    return os.str();
}

std::string metadata_json(const Scenario& s, const std::vector<PointResult>& pts) {
    ojson j;
    char hash[17];
    std::snprintf(hash, sizeof hash, "%016llx", static_cast<unsigned long long>(scenario_hash(s)));
    j["generator"] = "parksim";
    j["version"] = kVersion;
    j["scenario"] = s.name;
    j["scenario_hash"] = hash;
    j["seed"] = s.seed;
    j["batches"] = s.batches;
    j["sim_time_s"] = s.sim_time;
    ojson points = ojson::array();
    for (const auto& p : pts) {
        char dir[16];
        std::snprintf(dir, sizeof dir, "p%03zu", p.point.index);
        points.push_back({{"index", p.point.index}, {"dir", dir}, {"label", p.point.label()}});
    }
    j["points"] = points;
    j["files"] = {{"delays", kDelayHeader}, {"energy", kEnergyHeader}, {"cycles", kCyclesHeader}, {"routers", kRoutersHeader}};
    return j.dump(2) + "\n";
}

namespace {
void write_file(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << text;
    if (!out) throw std::runtime_error("write failed: " + path.string());
}
}  // namespace

void write_point(const std::string& dir, const PointResult& p) {
    namespace fs = std::filesystem;
    char name[16];
    std::snprintf(name, sizeof name, "p%03zu", p.point.index);
    fs::path d = fs::path(dir) / name;
    fs::create_directories(d);
    write_file(d / "delays.csv", delays_csv(p));
    write_file(d / "energy.csv", energy_csv(p));
    write_file(d / "cycles.csv", cycles_csv(p));
    write_file(d / "routers.csv", routers_csv(p));
}

void write_results(const std::string& dir, const Scenario& s, const std::vector<PointResult>& pts) {
    for (const auto& p : pts) write_point(dir, p);
    write_top_level(dir, s, pts);
}

void write_top_level(const std::string& dir, const Scenario& s, const std::vector<PointResult>& pts) {
    namespace fs = std::filesystem;
    fs::path root(dir);
    fs::create_directories(root);
    write_file(root / "summary.csv", summary_csv(s, pts));
    write_file(root / "aggregate.csv", aggregate_csv(s, pts));
    write_file(root / "metadata.json", metadata_json(s, pts));
    write_file(root / "scenario.json", serialize_scenario(s));
}

}  // namespace parksim
