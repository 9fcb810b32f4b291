#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "fdpas/sim.hpp"

namespace fdpas {

struct RandomInstanceOptions {
    double utilization = 0.5;
    int steps = 4;
    double ratio = 0.2;
    double required = 0.99;
    SlotMode mode = SlotMode::TBS;
    int max_instance = 20;
    GeneratorOptions generator;
};

// Random task set with a rhythmic task whose rhythmic windows can hold its demand.
SimConfig random_scenario(std::uint64_t seed, const NetworkModel& network, const RandomInstanceOptions& options);

struct NetworkParams {
    int side = 9;
    double pdr_low = 0.9;
    double pdr_high = 1.0;
    std::uint64_t seed = 1;
};

struct ExperimentSpec {
    std::vector<double> utilizations{0.5};
    std::vector<int> steps{4};
    std::vector<int> alphas{1};
    std::vector<int> ticks{100};
    std::vector<Framework> frameworks{Framework::FdpasPacket};
    int trials = 10;
    std::uint64_t base_seed = 1;
    double ratio = 0.2;
    int beta = 4;
    double required = 0.99;
    SlotMode mode = SlotMode::TBS;
    NetworkParams network;

    void validate() const;
};

ExperimentSpec parse_experiment(const std::string& text);

struct RunRow {
    Framework framework = Framework::FdpasPacket;
    std::uint64_t seed = 0;
    double utilization = 0.0;
    int steps = 0;
    int alpha = 0;
    int tick = 0;
    Metrics metrics;
};

struct SummaryRow {
    Framework framework = Framework::FdpasPacket;
    double utilization = 0.0;
    int steps = 0;
    int alpha = 0;
    int tick = 0;
    int trials = 0;
    double sr = 0.0;
    double mean_dr = 0.0;
};

struct SweepResult {
    std::vector<RunRow> runs;
    std::vector<SummaryRow> summary;
};

SweepResult run_sweep(const ExperimentSpec& spec, int parallel = 1);

std::string runs_csv(const std::vector<RunRow>& rows);
std::string summary_csv(const std::vector<SummaryRow>& rows);
std::string metrics_csv_header();
std::string metrics_csv_line(Framework framework, std::uint64_t seed, double utilization, int steps, int alpha, const Metrics& m);

}  // namespace fdpas
