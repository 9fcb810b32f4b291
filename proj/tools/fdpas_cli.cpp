#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "fdpas/config.hpp"
#include "fdpas/sweep.hpp"

namespace {

enum Exit { kOk = 0, kOther = 1, kUsage = 2, kParse = 3, kInfeasible = 4 };

void write_file(const std::filesystem::path& path, const std::string& text) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
    out << text;
}

int report(const fdpas::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    switch (e.kind()) {
        case fdpas::ErrorKind::Parse:
        case fdpas::ErrorKind::Contract: return kParse;
        case fdpas::ErrorKind::Infeasible: return kInfeasible;
        default: return kOther;
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"FD-PaS scheduler, simulator and experiment runner"};
    app.require_subcommand(1);

    auto* gen = app.add_subcommand("generate", "write a random task set as a scenario file");
    std::uint64_t gen_seed = 1;
    double gen_util = 0.5;
    std::string gen_network, gen_out;
    int grid_side = 9;
    double required = 0.99;
    gen->add_option("--seed", gen_seed, "generator seed")->required();
    gen->add_option("--util", gen_util, "target nominal utilization")->required()->check(CLI::Range(0.0, 1.0));
    gen->add_option("--network", gen_network, "network file (default: grid network)");
    gen->add_option("--grid-side", grid_side, "side of the default grid network")->check(CLI::Range(2, 64));
    gen->add_option("--required-pdr", required, "required end-to-end PDR");
    gen->add_option("--out", gen_out, "output file (default: stdout)");

    auto* sim = app.add_subcommand("simulate", "run one scenario");
    std::string scenario, trace_out, csv_out, framework_override;
    std::optional<std::uint64_t> seed_override;
    sim->add_option("--scenario", scenario, "scenario file")->required();
    sim->add_option("--trace-out", trace_out, "slot trace output file");
    sim->add_option("--csv-out", csv_out, "metrics CSV output file (default: stdout)");
    sim->add_option("--framework", framework_override, "fdpas-packet, fdpas-transmission or baseline-broadcast");
    sim->add_option("--seed", seed_override, "override the scenario seed");

    auto* sweep = app.add_subcommand("sweep", "run an experiment grid");
    std::string spec_path, out_dir;
    int parallel = 1;
    sweep->add_option("--spec", spec_path, "experiment spec file")->required();
    sweep->add_option("--out-dir", out_dir, "output directory (default: $FDPAS_OUT_DIR or .)");
    sweep->add_option("--parallel", parallel, "worker threads")->check(CLI::Range(1, 256));

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kOk : kUsage;
    }

    try {
        if (*gen) {
            const auto network = gen_network.empty() ? fdpas::grid_network(grid_side, 0.9, 1.0, gen_seed) : fdpas::load_network(gen_network);
            fdpas::GeneratorOptions opts;
            opts.required_pdr = required;
            fdpas::SimConfig c;
            c.network = network;
            c.tasks = fdpas::generate_taskset(gen_seed, gen_util, network, opts);
            c.required = required;
            c.seed = gen_seed;
            const auto text = fdpas::dump_scenario(c);
            if (gen_out.empty()) std::cout << text;
            else write_file(gen_out, text);
        } else if (*sim) {
            auto c = fdpas::load_scenario(scenario);
            if (!framework_override.empty()) c.framework = fdpas::framework_from_string(framework_override);
            if (seed_override) c.seed = *seed_override;
            std::ofstream trace;
            if (!trace_out.empty()) {
                const std::filesystem::path p(trace_out);
                if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
                trace.open(p, std::ios::binary);
                if (!trace) throw std::runtime_error("cannot write '" + trace_out + "'");
            }
            const auto result = fdpas::run(c, trace_out.empty() ? nullptr : &trace);
            double util = fdpas::utilization(fdpas::resolve_retries(c.tasks, c.network, c.required));
            const int steps = c.disturbance ? static_cast<int>(c.disturbance->spec.steps()) : 0;
            const auto csv = fdpas::metrics_csv_header() + fdpas::metrics_csv_line(c.framework, c.seed, util, steps, c.alpha, result.metrics);
            if (csv_out.empty()) std::cout << csv;
            else write_file(csv_out, csv);
            for (std::size_t i = 0; i < result.metrics.per_task.size(); ++i) {
                const auto& s = result.metrics.per_task[i];
                std::cerr << "task " << i << ": released=" << s.released << " delivered=" << s.delivered << " missed=" << s.missed
                          << " dropped=" << s.dropped << '\n';
            }
            if (!result.metrics.note.empty()) std::cerr << "note: " << result.metrics.note << '\n';
        } else if (*sweep) {
            const auto spec = fdpas::parse_experiment(fdpas::read_file(spec_path));
            if (out_dir.empty()) {
                const char* env = std::getenv("FDPAS_OUT_DIR");
                out_dir = env && *env ? env : ".";
            }
            const auto result = fdpas::run_sweep(spec, parallel);
            const std::filesystem::path dir(out_dir);
            write_file(dir / "runs.csv", fdpas::runs_csv(result.runs));
            write_file(dir / "summary.csv", fdpas::summary_csv(result.summary));
            std::cout << fdpas::summary_csv(result.summary);
        }
    } catch (const fdpas::Error& e) {
        return report(e);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kOther;
    }
    return kOk;
}
