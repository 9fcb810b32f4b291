#pragma once

#include <optional>
#include <vector>

#include "fdpas/model.hpp"
#include "fdpas/schedule.hpp"

namespace fdpas {

struct DisturbanceEvent {
    int task = 0;
    std::int64_t instance = 0;  // packet whose release carries the detection
    Slot detect = 0;
    Slot enter = 0;
    Slot exit = 0;
    Slot nominal_period = 0;
    Slot nominal_deadline = 0;
    RhythmicSpec spec;

    Slot grid_floor(Slot t) const { return t / nominal_period * nominal_period; }
    bool on_grid(Slot t) const { return t % nominal_period == 0; }
};

DisturbanceEvent make_event(const TaskSpec& rhythmic_task, std::int64_t instance, RhythmicSpec spec);
Slot end_point_upper_bound(const DisturbanceEvent& event, int beta);

// One packet of the rhythmic task's actual release sequence from the mode switch onwards.
struct StreamPacket {
    std::int64_t index = 0;
    Slot release = 0;
    Slot deadline = 0;
    Slot relative_deadline = 0;
    Slot unshifted_next = 0;  // next release before alignment to the nominal grid
};

// Rhythmic releases, then a release at the exit slot, then nominal grid releases, up to `until` inclusive.
std::vector<StreamPacket> release_stream(const DisturbanceEvent& event, Slot until);

// True when every rhythmic window and the window of the packet released at the exit slot hold `demand` slots.
bool rhythmic_windows_fit(const DisturbanceEvent& event, int demand);

std::vector<NodeId> compute_vrhy(const TaskSpec& rhythmic_task);

struct IdleSlotWitness {
    bool found = false;
    Slot received = -1;
    Slot first_involved = -1;
    Slot idle_slot = -1;
};

// Looks for a slot in (received, first_involved) where `node` neither sends nor receives.
// Without a dynamic schedule the first rhythmic involvement is taken from the static table.
IdleSlotWitness find_idle_slot(const StaticSchedule& schedule, const DynamicSchedule* dynamic,
                                       const std::vector<TaskSpec>& tasks, const DisturbanceEvent& event, NodeId node);

std::vector<Slot> end_point_candidates(const DisturbanceEvent& event, Slot f_last, int beta);

struct RhythmicPacket {
    std::int64_t index = 0;
    Slot release = 0;
    Slot deadline = 0;
    std::vector<int> hops;  // hop label of each demanded slot, in order
    bool boundary = false;

    int demand() const { return static_cast<int>(hops.size()); }
};

struct ActivePacketSets {
    Slot start = 0;
    Slot end = 0;
    std::vector<RhythmicPacket> rhythmic;
    std::vector<PacketRef> periodic;  // ordered by (instance, task)
    Slot resume_release = 0;          // static rhythmic-task packets released in [start, resume_release) are superseded

    int window_of(Slot t) const;
};

// Hop label sequence of a full rhythmic packet: one per hop when links are perfect, the retry vector otherwise.
std::vector<int> rhythmic_demand_labels(const TaskSpec& rhythmic_task, bool lossy);

ActivePacketSets build_active_sets(Slot end_point, const DisturbanceEvent& event, const StaticSchedule& schedule,
                                   const std::vector<TaskSpec>& tasks, const std::vector<int>& full_labels);

}  // namespace fdpas
