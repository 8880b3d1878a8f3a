// parksim command line: run scenarios, emit figure scenarios, list the catalog.

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "CLI11.hpp"
#include "parksim/report.hpp"

namespace fs = std::filesystem;
using namespace parksim;

namespace {

constexpr int kExitInvalid = 2;
constexpr int kExitRuntime = 3;

struct Options {
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> batches;
    std::string out_dir;
    unsigned parallel = 1;
};

std::string resolve_out_dir(const Options& o) {
    if (!o.out_dir.empty()) return o.out_dir;
    if (const char* env = std::getenv("PARKSIM_OUT_DIR"); env && *env) return env;
    return "results";
}

void apply_overrides(Scenario& s, const Options& o) {
    if (o.seed) s.seed = *o.seed;
    if (o.batches) {
        if (*o.batches < 1) throw ScenarioError("--batches: must be >= 1");
        s.batches = *o.batches;
    }
}

void print_point(const PointResult& p) {
    const auto& a = p.aggregate;
    std::printf("  [%03zu] %-48s pdr=%.4f delay=%.3fs energy=%.3fJ\n", p.point.index, p.point.label().c_str(),
                a.stat("pdr").mean, a.stat("mean_delay_s").mean, a.stat("sensor_energy_j").mean);
    std::fflush(stdout);
}

void run_into(const Scenario& s, const std::string& dir, unsigned parallel) {
    std::printf("%s -> %s\n", s.name.c_str(), dir.c_str());
    auto pts = run_scenario(
        s, parallel,
        [&](const PointResult& p) {
            write_point(dir, p);
            print_point(p);
        },
        false);
    write_top_level(dir, s, pts);
}

void list_figures() {
    for (const auto& f : figure_catalog()) std::printf("%-24s %s\n", f.id.c_str(), f.description.c_str());
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"parksim: duty-cycled MAC simulator for parking sensor networks"};
    app.require_subcommand(1);
    app.fallthrough();
    Options opt;
    app.add_option("--seed", opt.seed, "base seed (overrides the scenario)");
    app.add_option("--batches", opt.batches, "independent batches per sweep point");
    app.add_option("--out-dir", opt.out_dir, "output directory (env PARKSIM_OUT_DIR, default ./results)");
    app.add_option("--parallel", opt.parallel, "worker threads for batches")->check(CLI::PositiveNumber);

    std::string scenario_path;
    auto* run = app.add_subcommand("run", "run a scenario file");
    run->add_option("scenario", scenario_path, "scenario JSON file")->required();

    std::string figure_id;
    bool also_run = false;
    auto* repro = app.add_subcommand("reproduce", "write the scenario files of a figure");
    repro->add_option("figure-id", figure_id, "catalog id")->required();
    repro->add_flag("--run", also_run, "also run the emitted scenarios");

    app.add_subcommand("list-figures", "print the figure catalog");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? 0 : kExitInvalid;
    }

    try {
        const std::string out = resolve_out_dir(opt);
        if (app.got_subcommand("list-figures")) {
            list_figures();
            return 0;
        }
        if (app.got_subcommand("run")) {
            Scenario s = load_scenario(scenario_path);
            apply_overrides(s, opt);
            run_into(s, out, opt.parallel);
            return 0;
        }
        if (app.got_subcommand("reproduce")) {
            const FigureEntry* fig = find_figure(figure_id);
            if (!fig) {
                std::fprintf(stderr, "unknown figure id '%s'; catalog:\n", figure_id.c_str());
                for (const auto& f : figure_catalog()) std::fprintf(stderr, "  %s\n", f.id.c_str());
                return kExitInvalid;
            }
            fs::path dir = fs::path(out) / fig->id;
            fs::create_directories(dir);
            for (Scenario s : fig->scenarios) {
                apply_overrides(s, opt);
                fs::path file = dir / (s.name + ".json");
                std::ofstream(file) << serialize_scenario(s);
                std::printf("%s\n", file.string().c_str());
                if (also_run) run_into(s, (dir / s.name).string(), opt.parallel);
            }
            return 0;
        }
    } catch (const ScenarioError& e) {
        std::fprintf(stderr, "invalid scenario: %s\n", e.what());
        return kExitInvalid;
    } catch (const DisconnectedError& e) {
        std::fprintf(stderr, "invalid scenario: topology: %s\n", e.what());
        return kExitInvalid;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "runtime failure: %s\n", e.what());
        return kExitRuntime;
    }
    return 0;
}
