#pragma once

#include <map>
#include <string>
#include <vector>

#include "fdpas/model.hpp"
#include "fdpas/rhythmic.hpp"
#include "fdpas/schedule.hpp"

namespace fdpas {

enum class DropLevel { Packet, Transmission };
enum class Solver { Greedy, Oracle };

struct TransmissionVector {
    PacketRef packet;
    std::vector<int> per_window;  // static slots inside each rhythmic window
};

struct DemandVector {
    std::vector<int> demand;
    std::vector<int> available;
    std::vector<int> need;
};

struct PeriodicSlot {
    Slot slot = 0;
    int hop = 0;
    int window = -1;
};

// Everything the dropping solvers need about one periodic packet.
struct PeriodicPacket {
    PacketRef ref;
    std::vector<double> hop_pdrs;
    std::vector<int> retries;
    std::vector<PeriodicSlot> slots;  // static slots inside the rhythmic-mode interval
};

struct DroppingInstance {
    SlotMode mode = SlotMode::TBS;
    double required = 0.99;
    std::vector<int> need;
    std::vector<PeriodicPacket> periodic;
};

struct DroppedSlot {
    PacketRef packet;
    Slot slot = 0;
    int hop = 0;

    auto operator<=>(const DroppedSlot&) const = default;
};

struct DropDecision {
    DropLevel level = DropLevel::Packet;
    std::vector<PacketRef> packets;
    std::vector<DroppedSlot> slots;
    std::map<PacketRef, double> degradation;
    double total_degradation = 0.0;

    std::size_t dropped_packets() const { return packets.size(); }
    std::size_t dropped_transmissions() const { return slots.size(); }
};

std::vector<TransmissionVector> build_transmission_vectors(const ActivePacketSets& sets, const StaticSchedule& schedule);
DemandVector build_demand_vector(const ActivePacketSets& sets, const StaticSchedule& schedule, int rhythmic_task);
DroppingInstance make_dropping_instance(const ActivePacketSets& sets, const StaticSchedule& schedule,
                                        const std::vector<TaskSpec>& tasks, const NetworkModel& network, double required);

// Achieved pdr of a periodic packet with the given per-hop trial counts.
double periodic_pdr(const PeriodicPacket& packet, const std::vector<int>& trials, SlotMode mode);

DropDecision greedy_drop_packets(const std::vector<int>& need, const std::vector<TransmissionVector>& vectors, double required);
DropDecision drop_transmissions(const DroppingInstance& instance);

// Exhaustive solvers; throw SizeLimit beyond desk scale.
DropDecision optimal_drop_packets(const std::vector<int>& need, const std::vector<TransmissionVector>& vectors, double required);
DropDecision optimal_drop_transmissions(const DroppingInstance& instance);

struct SetCoverInstance {
    int universe = 0;
    std::vector<std::vector<int>> subsets;
};

struct PacketDropProblem {
    std::vector<int> need;
    std::vector<TransmissionVector> vectors;
};

PacketDropProblem from_set_cover(const SetCoverInstance& instance);

struct DynamicOptions {
    DropLevel level = DropLevel::Packet;
    Solver solver = Solver::Greedy;
    int beta = 4;
    double required = 0.99;
    bool lossy = false;
};

struct CandidateOutcome {
    Slot end_point = 0;
    bool feasible = false;
    std::string reason;
    DropDecision decision;
    std::size_t periodic_count = 0;
};

struct DynamicResult {
    Slot end_point = 0;
    Slot upper_bound = 0;
    ActivePacketSets sets;
    DropDecision decision;
    DynamicSchedule schedule;
    std::vector<CandidateOutcome> candidates;
    Slot last_rhythmic_finish = 0;  // completion slot of the last packet released in the rhythmic state
};

DynamicResult generate_dynamic_schedule(const DisturbanceEvent& event, const StaticSchedule& schedule,
                                        const std::vector<TaskSpec>& tasks, const NetworkModel& network,
                                        const DynamicOptions& options);

// Places rhythmic transmissions earliest-first on idle, rhythmic-task and freed slots.
DynamicSchedule overlay_rhythmic(const ActivePacketSets& sets, const StaticSchedule& schedule, int rhythmic_task,
                                 const DropDecision& decision);

}  // namespace fdpas
