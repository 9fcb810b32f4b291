#pragma once

#include <compare>
#include <cstdint>
#include <map>
#include <vector>

#include "fdpas/model.hpp"

namespace fdpas {

enum class SlotMode { TBS, PBS };

// Static packets are numbered by nominal release; dynamic packets by their position in the rhythmic stream.
struct PacketRef {
    int task = -1;
    std::int64_t instance = 0;
    bool dynamic = false;

    auto operator<=>(const PacketRef&) const = default;
};

struct SlotEntry {
    PacketRef packet;
    int hop = -1;
    int trial = 0;

    bool idle() const { return packet.task < 0; }
    bool operator==(const SlotEntry&) const = default;
};

// Slot table produced by the static scheduler. When `periodic` is set the table covers one
// hyperperiod and repeats; otherwise it covers [0, length) only.
class StaticSchedule {
public:
    StaticSchedule() = default;
    StaticSchedule(SlotMode mode, std::vector<SlotEntry> slots, std::vector<Slot> periods, bool periodic);

    SlotMode mode() const { return mode_; }
    Slot length() const { return static_cast<Slot>(slots_.size()); }
    bool periodic() const { return periodic_; }
    bool covers(Slot t) const { return t >= 0 && (periodic_ || t < length()); }
    SlotEntry at(Slot t) const;
    // Test hook for constructing schedules with known defects.
    void set(Slot t, SlotEntry entry) { slots_.at(static_cast<std::size_t>(t)) = entry; }

    // Slots assigned to a static packet, ascending.
    std::vector<Slot> slots_of(const TaskSpec& task, std::int64_t instance) const;

private:
    SlotMode mode_ = SlotMode::TBS;
    std::vector<SlotEntry> slots_;
    std::vector<Slot> periods_;
    bool periodic_ = false;
};

// Rhythmic-mode table: entries overridden inside [start, end), the static table everywhere else.
struct DynamicSchedule {
    Slot start = 0;
    Slot end = 0;
    std::map<Slot, SlotEntry> overrides;

    bool in_window(Slot t) const { return t >= start && t < end; }
    SlotEntry at(const StaticSchedule& base, Slot t) const {
        if (in_window(t)) {
            if (const auto it = overrides.find(t); it != overrides.end()) return it->second;
        }
        return base.at(t);
    }
};

NodeId sender_of(const std::vector<TaskSpec>& tasks, const SlotEntry& e);
NodeId receiver_of(const std::vector<TaskSpec>& tasks, const SlotEntry& e);
bool involves(const std::vector<TaskSpec>& tasks, const SlotEntry& e, NodeId node);

}  // namespace fdpas
