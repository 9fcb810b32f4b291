#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "fdpas/model.hpp"
#include "fdpas/schedule.hpp"

namespace fdpas {

// Fewest total trials reaching `required`; among those, the most trials on the earliest hops.
std::vector<int> allocate_retry_vector(std::span<const double> hop_pdrs, double required);

// Fills empty retry vectors from the link qualities.
std::vector<TaskSpec> resolve_retries(std::vector<TaskSpec> tasks, const NetworkModel& network, double required);

struct StaticScheduleResult {
    StaticSchedule schedule;
    std::vector<int> budgets;
    bool feasible = false;
    Slot hyperperiod = 0;
    std::optional<PacketRef> first_failure;
};

// Tables longer than this are not materialised; the schedule then covers `horizon` slots only.
inline constexpr Slot kMaxTableSlots = Slot{1} << 20;

Slot hyperperiod(const std::vector<TaskSpec>& tasks);

StaticScheduleResult build_static_schedule(const std::vector<TaskSpec>& tasks, const NetworkModel& network, SlotMode mode,
                                           Slot horizon = 0);

struct Verdict {
    bool ok = true;
    std::string message;
    std::optional<PacketRef> packet;
};

Verdict verify_schedulable(const StaticScheduleResult& result, const std::vector<TaskSpec>& tasks, const NetworkModel& network,
                           double required);

}  // namespace fdpas
