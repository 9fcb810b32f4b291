#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "fdpas/dropping.hpp"
#include "fdpas/mac.hpp"
#include "fdpas/model.hpp"
#include "fdpas/static_scheduler.hpp"

namespace fdpas {

enum class Framework { FdpasPacket, FdpasTransmission, BaselineBroadcast };

std::string to_string(Framework f);
Framework framework_from_string(const std::string& name);

struct DisturbanceConfig {
    int task = 0;
    std::int64_t instance = 1;
    RhythmicSpec spec;
};

struct SimConfig {
    NetworkModel network;
    std::vector<TaskSpec> tasks;
    SlotMode mode = SlotMode::TBS;
    double required = 0.99;
    Slot horizon = 0;  // 0 picks a horizon past the latest possible end point
    std::uint64_t seed = 1;
    std::optional<DisturbanceConfig> disturbance;
    int alpha = 1;  // allowed response time in nominal periods of the rhythmic task
    int beta = 4;
    Solver solver = Solver::Greedy;
    Framework framework = Framework::FdpasPacket;
    SlotTiming timing;
    PerModel per;
    int rhythmic_priority = 0;
    int periodic_priority = 1;
    Slot broadcast_period = 0;  // 0: twice the rhythmic task's period
    int broadcast_depth = -1;   // -1: hop eccentricity of the controller
    Slot broadcast_offset = -1; // -1: broadcast period minus depth
};

struct TaskStats {
    std::int64_t released = 0;
    std::int64_t delivered = 0;
    std::int64_t missed = 0;
    std::int64_t dropped = 0;
};

struct Metrics {
    bool feasible = false;  // a dynamic schedule exists (always true without a disturbance)
    bool success = false;
    Slot drt = -1;
    Slot dhl = -1;
    Slot end_point = -1;
    Slot rhythmic_period = 0;
    double dr = 0.0;
    std::size_t dropped_packets = 0;
    std::size_t dropped_transmissions = 0;
    std::size_t periodic_in_window = 0;
    std::size_t idle_slot_violations = 0;
    std::vector<TaskStats> per_task;
    std::string note;
};

struct RunResult {
    Metrics metrics;
    StaticScheduleResult static_result;
    std::optional<DisturbanceEvent> event;
    std::optional<DynamicResult> dynamic;
    Slot horizon = 0;
};

// Throws Infeasible when the static schedule misses a deadline.
RunResult run(const SimConfig& config, std::ostream* trace = nullptr);

// Response time of a centralized handler that relays the disturbance to the controller and
// waits for a periodic broadcast to reach the network before the rhythmic mode can start.
Slot baseline_drt(const SimConfig& config, const StaticSchedule& schedule);

int controller_eccentricity(const NetworkModel& network);
Slot default_horizon(const SimConfig& config);

double success_ratio(const std::vector<Metrics>& batch);
double degradation_rate(const DropDecision& decision, std::size_t periodic_count);

}  // namespace fdpas
