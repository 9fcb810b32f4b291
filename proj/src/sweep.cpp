#include "fdpas/sweep.hpp"

#include <algorithm>
#include <iomanip>
#include <map>
#include <sstream>
#include <thread>

#include "fdpas/rhythmic.hpp"
#include "fdpas/rng.hpp"
#include "json.hpp"

namespace fdpas {

namespace {

std::uint64_t below(std::uint64_t seed, std::uint64_t tag, std::uint64_t n) { return derive_seed(seed, tag) % n; }

}  // namespace

SimConfig random_scenario(std::uint64_t seed, const NetworkModel& network, const RandomInstanceOptions& options) {
    constexpr int kAttempts = 1000;
    GeneratorOptions gen = options.generator;
    gen.required_pdr = options.required;
    const bool lossy = !network.reliable();
    for (int attempt = 0; attempt < kAttempts; ++attempt) {
        const std::uint64_t sub = derive_seed(seed, static_cast<std::uint64_t>(attempt), stream_id("scenario"));
        auto tasks = generate_taskset(sub, options.utilization, network, gen);
        std::vector<std::pair<int, RhythmicSpec>> eligible;
        for (const auto& t : tasks) {
            const int demand = static_cast<int>(rhythmic_demand_labels(t, lossy).size());
            try {
                auto spec = generate_rhythmic_spec(t.period, options.ratio, options.steps, demand);
                // The exit-slot window depends only on the task, so instance 1 stands in for all.
                if (rhythmic_windows_fit(make_event(t, 1, spec), demand)) eligible.emplace_back(t.id, std::move(spec));
            } catch (const Error& e) {
                if (e.kind() != ErrorKind::Infeasible) throw;
            }
        }
        if (eligible.empty()) continue;
        auto& [task, spec] = eligible[below(sub, 1, eligible.size())];
        SimConfig c;
        c.network = network;
        c.tasks = std::move(tasks);
        c.mode = options.mode;
        c.required = options.required;
        c.seed = sub;
        const auto k = 1 + static_cast<std::int64_t>(below(sub, 2, static_cast<std::uint64_t>(options.max_instance)));
        c.disturbance = DisturbanceConfig{task, k, std::move(spec)};
        return c;
    }
    throw Error(ErrorKind::Generation, "no task set with a usable rhythmic task after many attempts");
}

void ExperimentSpec::validate() const {
    if (trials < 1) throw Error(ErrorKind::Parse, "trials must be at least 1");
    if (utilizations.empty() || steps.empty() || alphas.empty() || ticks.empty() || frameworks.empty()) {
        throw Error(ErrorKind::Parse, "every sweep axis needs at least one value");
    }
    for (double u : utilizations) {
        if (!(u > 0.0 && u <= 1.0)) throw Error(ErrorKind::Parse, "utilizations must lie in (0, 1]");
    }
    for (int a : alphas) {
        if (a < 1) throw Error(ErrorKind::Parse, "alphas must be at least 1");
    }
    for (int r : steps) {
        if (r < 1) throw Error(ErrorKind::Parse, "steps must be at least 1");
    }
    for (int t : ticks) {
        if (t <= 0) throw Error(ErrorKind::Parse, "ticks must be positive");
    }
}

ExperimentSpec parse_experiment(const std::string& text) {
    using nlohmann::json;
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        const auto upto = std::min<std::size_t>(e.byte, text.size());
        const auto line = 1 + std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(upto), '\n');
        throw Error(ErrorKind::Parse, "line " + std::to_string(line) + ": malformed JSON (" + e.what() + ")");
    }
    ExperimentSpec s;
    try {
        s.utilizations = j.value("utilizations", s.utilizations);
        s.steps = j.value("steps", s.steps);
        s.alphas = j.value("alphas", s.alphas);
        s.ticks = j.value("ticks", s.ticks);
        if (j.contains("frameworks")) {
            s.frameworks.clear();
            for (const auto& f : j.at("frameworks")) s.frameworks.push_back(framework_from_string(f.get<std::string>()));
        }
        s.trials = j.value("trials", s.trials);
        s.base_seed = j.value("base_seed", s.base_seed);
        s.ratio = j.value("ratio", s.ratio);
        s.beta = j.value("beta", s.beta);
        s.required = j.value("required_pdr", s.required);
        const auto mode = j.value("mode", std::string("TBS"));
        if (mode != "TBS" && mode != "PBS") throw Error(ErrorKind::Parse, "mode must be TBS or PBS");
        s.mode = mode == "TBS" ? SlotMode::TBS : SlotMode::PBS;
        if (j.contains("network")) {
            const auto& n = j.at("network");
            s.network.side = n.value("side", s.network.side);
            s.network.pdr_low = n.value("pdr_low", s.network.pdr_low);
            s.network.pdr_high = n.value("pdr_high", s.network.pdr_high);
            s.network.seed = n.value("seed", s.network.seed);
        }
    } catch (const json::exception& e) {
        throw Error(ErrorKind::Parse, std::string("experiment spec: ") + e.what());
    }
    s.validate();
    return s;
}

SweepResult run_sweep(const ExperimentSpec& spec, int parallel) {
    spec.validate();
    const NetworkModel network = grid_network(spec.network.side, spec.network.pdr_low, spec.network.pdr_high, spec.network.seed);

    struct Job {
        std::size_t u, r, tick, framework;
        int trial;
    };
    std::vector<Job> jobs;
    for (std::size_t u = 0; u < spec.utilizations.size(); ++u)
        for (std::size_t r = 0; r < spec.steps.size(); ++r)
            for (std::size_t k = 0; k < spec.ticks.size(); ++k)
                for (std::size_t f = 0; f < spec.frameworks.size(); ++f)
                    for (int trial = 0; trial < spec.trials; ++trial) jobs.push_back({u, r, k, f, trial});

    // The same trial index sees the same instance across frameworks and ticks.
    const auto instance_seed = [&](const Job& j) {
        return derive_seed(spec.base_seed, (j.u << 20) ^ (j.r << 10), static_cast<std::uint64_t>(j.trial));
    };
    std::vector<Metrics> results(jobs.size());
    std::vector<std::uint64_t> seeds(jobs.size());
    std::vector<std::string> errors(jobs.size());
    const auto work = [&](std::size_t i) {
        const Job& j = jobs[i];
        RandomInstanceOptions opts;
        opts.utilization = spec.utilizations[j.u];
        opts.steps = spec.steps[j.r];
        opts.ratio = spec.ratio;
        opts.required = spec.required;
        opts.mode = spec.mode;
        try {
            SimConfig c = random_scenario(instance_seed(j), network, opts);
            c.framework = spec.frameworks[j.framework];
            c.beta = spec.beta;
            c.timing.priority_tick_us = spec.ticks[j.tick];
            c.alpha = *std::max_element(spec.alphas.begin(), spec.alphas.end());
            seeds[i] = c.seed;
            results[i] = run(c).metrics;
        } catch (const Error& e) {
            errors[i] = e.what();
        }
    };
    const int workers = std::max(1, parallel);
    if (workers == 1) {
        for (std::size_t i = 0; i < jobs.size(); ++i) work(i);
    } else {
        std::vector<std::thread> pool;
        for (int w = 0; w < workers; ++w) {
            pool.emplace_back([&, w] {
                for (std::size_t i = static_cast<std::size_t>(w); i < jobs.size(); i += static_cast<std::size_t>(workers)) work(i);
            });
        }
        for (auto& t : pool) t.join();
    }
    for (std::size_t i = 0; i < jobs.size(); ++i) {
        if (!errors[i].empty()) throw Error(ErrorKind::Generation, "trial " + std::to_string(jobs[i].trial) + ": " + errors[i]);
    }

    SweepResult out;
    std::map<std::tuple<std::size_t, std::size_t, std::size_t, std::size_t, int>, SummaryRow> agg;
    for (std::size_t i = 0; i < jobs.size(); ++i) {
        const Job& j = jobs[i];
        for (int alpha : spec.alphas) {
            RunRow row{spec.frameworks[j.framework], seeds[i], spec.utilizations[j.u], spec.steps[j.r], alpha, spec.ticks[j.tick], results[i]};
            row.metrics.success = row.metrics.feasible && row.metrics.drt >= 0 && row.metrics.drt <= static_cast<Slot>(alpha) * results[i].rhythmic_period;
            auto& s = agg[{j.framework, j.u, j.r, j.tick, alpha}];
            s.framework = row.framework;
            s.utilization = row.utilization;
            s.steps = row.steps;
            s.alpha = alpha;
            s.tick = row.tick;
            ++s.trials;
            s.sr += row.metrics.success ? 1.0 : 0.0;
            s.mean_dr += row.metrics.dr;
            out.runs.push_back(std::move(row));
        }
    }
    for (auto& [key, s] : agg) {
        s.sr /= s.trials;
        s.mean_dr /= s.trials;
        out.summary.push_back(s);
    }
    return out;
}

std::string metrics_csv_header() {
    return "framework,seed,U*,R,alpha,drt,dhl,success,dr,dropped_packets,dropped_transmissions\n";
}

std::string metrics_csv_line(Framework framework, std::uint64_t seed, double utilization, int steps, int alpha, const Metrics& m) {
    std::ostringstream os;
    os << std::fixed << to_string(framework) << ',' << seed << ',' << std::setprecision(2) << utilization << ',' << steps << ','
       << alpha << ',' << m.drt << ',' << m.dhl << ',' << (m.success ? 1 : 0) << ',' << std::setprecision(6) << m.dr << ','
       << m.dropped_packets << ',' << m.dropped_transmissions << '\n';
    return os.str();
}

std::string runs_csv(const std::vector<RunRow>& rows) {
    std::string out = metrics_csv_header();
    for (const auto& r : rows) out += metrics_csv_line(r.framework, r.seed, r.utilization, r.steps, r.alpha, r.metrics);
    return out;
}

std::string summary_csv(const std::vector<SummaryRow>& rows) {
    std::ostringstream os;
    os << "framework,U*,R,alpha,tick,trials,sr,mean_dr\n" << std::fixed;
    for (const auto& s : rows) {
        os << to_string(s.framework) << ',' << std::setprecision(2) << s.utilization << ',' << s.steps << ',' << s.alpha << ','
           << s.tick << ',' << s.trials << ',' << std::setprecision(6) << s.sr << ',' << s.mean_dr << '\n';
    }
    return os.str();
}

}  // namespace fdpas
