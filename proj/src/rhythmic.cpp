#include "fdpas/rhythmic.hpp"

#include <algorithm>

namespace fdpas {

DisturbanceEvent make_event(const TaskSpec& rhythmic_task, std::int64_t instance, RhythmicSpec spec) {
    if (instance < 0) throw Error(ErrorKind::Contract, "disturbance instance must be non-negative");
    spec.validate();
    DisturbanceEvent e;
    e.task = rhythmic_task.id;
    e.instance = instance;
    e.detect = rhythmic_task.release(instance);
    e.enter = e.detect + rhythmic_task.period;
    e.exit = e.enter + spec.total_period();
    e.nominal_period = rhythmic_task.period;
    e.nominal_deadline = rhythmic_task.deadline;
    e.spec = std::move(spec);
    return e;
}

Slot end_point_upper_bound(const DisturbanceEvent& event, int beta) {
    if (beta < 1) throw Error(ErrorKind::Contract, "beta must be at least 1");
    return event.exit + (beta - 1) * event.nominal_period;
}

std::vector<StreamPacket> release_stream(const DisturbanceEvent& event, Slot until) {
    std::vector<StreamPacket> out;
    const Slot p0 = event.nominal_period;
    Slot r = event.enter;
    for (std::size_t x = 0; x < event.spec.steps() && r <= until; ++x) {
        const Slot next = r + event.spec.periods[x];
        out.push_back({static_cast<std::int64_t>(x), r, r + event.spec.deadlines[x], event.spec.deadlines[x], next});
        r = next;
    }
    if (r > until) return out;
    const Slot first_grid = event.grid_floor(event.exit) + p0;
    out.push_back({static_cast<std::int64_t>(out.size()), event.exit, std::min(event.exit + event.nominal_deadline, first_grid),
                   event.nominal_deadline, event.exit + p0});
    for (Slot g = first_grid; g <= until; g += p0) {
        out.push_back({static_cast<std::int64_t>(out.size()), g, g + event.nominal_deadline, event.nominal_deadline, g + p0});
    }
    return out;
}

bool rhythmic_windows_fit(const DisturbanceEvent& event, int demand) {
    for (const auto& p : release_stream(event, event.exit)) {
        if (p.deadline - p.release < demand) return false;
    }
    return true;
}

std::vector<NodeId> compute_vrhy(const TaskSpec& rhythmic_task) {
    std::vector<NodeId> nodes = rhythmic_task.path;
    std::sort(nodes.begin(), nodes.end());
    nodes.erase(std::unique(nodes.begin(), nodes.end()), nodes.end());
    return nodes;
}

IdleSlotWitness find_idle_slot(const StaticSchedule& schedule, const DynamicSchedule* dynamic,
                                       const std::vector<TaskSpec>& tasks, const DisturbanceEvent& event, NodeId node) {
    const TaskSpec& task = tasks.at(static_cast<std::size_t>(event.task));
    const auto pos_it = std::find(task.path.begin(), task.path.end(), node);
    if (pos_it == task.path.end()) throw Error(ErrorKind::Contract, "node is not on the rhythmic task's path");
    const int pos = static_cast<int>(pos_it - task.path.begin());

    IdleSlotWitness w;
    if (pos == 0) {
        w.received = event.detect;
    } else {
        for (Slot t : schedule.slots_of(task, event.instance)) {
            if (schedule.at(t).hop == pos - 1) w.received = t;
        }
    }
    if (w.received < 0) return w;

    const auto entry = [&](Slot t) { return dynamic && t >= event.enter ? dynamic->at(schedule, t) : schedule.at(t); };
    if (dynamic) {
        for (Slot t = event.enter; t < dynamic->end; ++t) {
            const SlotEntry e = dynamic->at(schedule, t);
            if (e.packet.dynamic && e.packet.instance == 0 && involves(tasks, e, node)) {
                w.first_involved = t;
                break;
            }
        }
    } else {
        for (Slot t : schedule.slots_of(task, event.instance + 1)) {
            if (involves(tasks, schedule.at(t), node)) {
                w.first_involved = t;
                break;
            }
        }
    }
    if (w.first_involved < 0) return w;
    for (Slot t = w.received + 1; t < w.first_involved; ++t) {
        if (!involves(tasks, entry(t), node)) {
            w.found = true;
            w.idle_slot = t;
            break;
        }
    }
    return w;
}

std::vector<Slot> end_point_candidates(const DisturbanceEvent& event, Slot f_last, int beta) {
    const Slot upper = end_point_upper_bound(event, beta);
    std::vector<Slot> out;
    for (const auto& p : release_stream(event, upper)) {
        if (p.release >= f_last && p.release <= upper) out.push_back(p.release);
    }
    if (out.empty()) throw Error(ErrorKind::Infeasible, "no end point candidate within the allowed range");
    return out;
}

int ActivePacketSets::window_of(Slot t) const {
    const auto it = std::upper_bound(rhythmic.begin(), rhythmic.end(), t, [](Slot v, const RhythmicPacket& p) { return v < p.release; });
    if (it == rhythmic.begin()) return -1;
    const auto& p = *std::prev(it);
    return t < p.deadline ? static_cast<int>(std::prev(it) - rhythmic.begin()) : -1;
}

std::vector<int> rhythmic_demand_labels(const TaskSpec& rhythmic_task, bool lossy) {
    std::vector<int> labels;
    for (int h = 0; h < rhythmic_task.hops(); ++h) {
        const int n = lossy ? rhythmic_task.retries.at(static_cast<std::size_t>(h)) : 1;
        labels.insert(labels.end(), static_cast<std::size_t>(n), h);
    }
    return labels;
}

ActivePacketSets build_active_sets(Slot end_point, const DisturbanceEvent& event, const StaticSchedule& schedule,
                                   const std::vector<TaskSpec>& tasks, const std::vector<int>& full_labels) {
    if (end_point <= event.enter) throw Error(ErrorKind::Contract, "end point must follow the mode switch");
    const TaskSpec& task = tasks.at(static_cast<std::size_t>(event.task));
    const Slot p0 = event.nominal_period;
    const auto stream = release_stream(event, end_point + p0);
    const bool in_stream = std::any_of(stream.begin(), stream.end(), [&](const StreamPacket& p) { return p.release == end_point; });

    ActivePacketSets sets;
    sets.start = event.enter;
    sets.end = end_point;
    sets.resume_release = end_point;
    bool boundary_seen = false;
    for (const auto& sp : stream) {
        if (sp.release >= end_point) break;
        RhythmicPacket rp{sp.index, sp.release, sp.deadline, full_labels, false};
        const bool straddles = !in_stream && sp.release < end_point && end_point < sp.unshifted_next;
        if (straddles) {
            boundary_seen = true;
            rp.boundary = true;
            const Slot resumed = event.grid_floor(sp.unshifted_next);
            const Slot own_deadline = sp.release + sp.relative_deadline;
            if (end_point < resumed) {
                rp.deadline = std::min(end_point, own_deadline);
                sets.resume_release = resumed - p0;
                Slot tk = end_point;
                while (schedule.covers(tk) && schedule.at(tk).packet.task != task.id) ++tk;
                if (!schedule.covers(tk)) throw Error(ErrorKind::Infeasible, "static table ends before the handover");
                const SlotEntry ek = schedule.at(tk);
                if (tk < resumed && ek.packet.instance == (resumed - p0) / p0) {
                    rp.hops.clear();
                    for (Slot t : schedule.slots_of(task, ek.packet.instance)) {
                        if (t >= tk) break;
                        rp.hops.push_back(schedule.at(t).hop);
                    }
                }
            } else {
                const auto first = schedule.slots_of(task, resumed / p0);
                if (first.empty()) throw Error(ErrorKind::Infeasible, "resumed static packet has no slots");
                rp.deadline = std::min({end_point, first.front(), own_deadline});
                sets.resume_release = resumed;
            }
        }
        if (rp.deadline - rp.release < rp.demand()) {
            throw Error(ErrorKind::Infeasible, "rhythmic packet demand exceeds its window");
        }
        sets.rhythmic.push_back(std::move(rp));
    }
    if (!boundary_seen && !event.on_grid(end_point)) {
        throw Error(ErrorKind::Infeasible, "end point does not fall on a nominal release of the rhythmic task");
    }
    for (Slot t = sets.start; t < sets.end; ++t) {
        const SlotEntry e = schedule.at(t);
        if (!e.idle() && e.packet.task != task.id) sets.periodic.push_back(e.packet);
    }
    std::sort(sets.periodic.begin(), sets.periodic.end(), [](const PacketRef& a, const PacketRef& b) {
        return std::pair{a.instance, a.task} < std::pair{b.instance, b.task};
    });
    sets.periodic.erase(std::unique(sets.periodic.begin(), sets.periodic.end()), sets.periodic.end());
    return sets;
}

}  // namespace fdpas
