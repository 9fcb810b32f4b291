#include "fdpas/static_scheduler.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

namespace fdpas {

StaticSchedule::StaticSchedule(SlotMode mode, std::vector<SlotEntry> slots, std::vector<Slot> periods, bool periodic)
    : mode_(mode), slots_(std::move(slots)), periods_(std::move(periods)), periodic_(periodic) {}

SlotEntry StaticSchedule::at(Slot t) const {
    if (!covers(t)) throw Error(ErrorKind::Contract, "slot " + std::to_string(t) + " outside the static table");
    const Slot len = length();
    SlotEntry e = slots_[static_cast<std::size_t>(t % len)];
    if (!e.idle() && t >= len) e.packet.instance += (t / len) * (len / periods_[static_cast<std::size_t>(e.packet.task)]);
    return e;
}

std::vector<Slot> StaticSchedule::slots_of(const TaskSpec& task, std::int64_t instance) const {
    std::vector<Slot> out;
    const PacketRef ref{task.id, instance, false};
    for (Slot t = task.release(instance); t < task.absolute_deadline(instance) && covers(t); ++t) {
        if (at(t).packet == ref) out.push_back(t);
    }
    return out;
}

NodeId sender_of(const std::vector<TaskSpec>& tasks, const SlotEntry& e) {
    return tasks.at(static_cast<std::size_t>(e.packet.task)).path.at(static_cast<std::size_t>(e.hop));
}

NodeId receiver_of(const std::vector<TaskSpec>& tasks, const SlotEntry& e) {
    return tasks.at(static_cast<std::size_t>(e.packet.task)).path.at(static_cast<std::size_t>(e.hop) + 1);
}

bool involves(const std::vector<TaskSpec>& tasks, const SlotEntry& e, NodeId node) {
    return !e.idle() && (sender_of(tasks, e) == node || receiver_of(tasks, e) == node);
}

namespace {

// best[b] = highest pdr reachable on the hop suffix with b trials in total (b >= suffix length).
std::vector<double> suffix_best(std::span<const double> pdrs, int max_total) {
    const int hops = static_cast<int>(pdrs.size());
    std::vector<double> best(static_cast<std::size_t>(max_total) + 1, 0.0);
    if (hops == 0) {
        std::fill(best.begin(), best.end(), 1.0);
        return best;
    }
    std::vector<int> r(static_cast<std::size_t>(hops), 1);
    best[static_cast<std::size_t>(hops)] = packet_pdr(pdrs, r);
    for (int b = hops + 1; b <= max_total; ++b) {
        // Trial gains shrink with every extra trial, so adding greedily keeps the product maximal.
        int pick = 0;
        double gain = -1.0;
        for (int h = 0; h < hops; ++h) {
            const double q = 1.0 - pdrs[static_cast<std::size_t>(h)];
            const double g = (1.0 - std::pow(q, r[static_cast<std::size_t>(h)] + 1)) / (1.0 - std::pow(q, r[static_cast<std::size_t>(h)]));
            if (g > gain) {
                gain = g;
                pick = h;
            }
        }
        ++r[static_cast<std::size_t>(pick)];
        best[static_cast<std::size_t>(b)] = packet_pdr(pdrs, r);
    }
    return best;
}

}  // namespace

std::vector<int> allocate_retry_vector(std::span<const double> hop_pdrs, double required) {
    if (hop_pdrs.empty()) throw Error(ErrorKind::Contract, "retry allocation needs at least one hop");
    if (!(required > 0.0 && required < 1.0)) throw Error(ErrorKind::Infeasible, "required pdr must lie in (0, 1)");
    for (double p : hop_pdrs) {
        if (!(p > 0.0 && p <= 1.0)) throw Error(ErrorKind::Contract, "hop pdr must lie in (0, 1]");
    }
    const int hops = static_cast<int>(hop_pdrs.size());
    constexpr int kMaxTotal = 4096;

    int cap = std::min(kMaxTotal, 4 * hops);
    std::vector<double> full = suffix_best(hop_pdrs, cap);
    while (full[static_cast<std::size_t>(cap)] < required && cap < kMaxTotal) {
        cap = std::min(kMaxTotal, cap * 2);
        full = suffix_best(hop_pdrs, cap);
    }
    int total = hops;
    while (total <= cap && full[static_cast<std::size_t>(total)] < required) ++total;
    if (total > cap) throw Error(ErrorKind::Infeasible, "required pdr unreachable within the trial cap");

    std::vector<std::vector<double>> suffixes;
    for (int s = 0; s <= hops; ++s) suffixes.push_back(suffix_best(hop_pdrs.subspan(static_cast<std::size_t>(s)), total));

    std::vector<int> out;
    double prefix = 1.0;
    int left = total;
    for (int h = 0; h < hops; ++h) {
        const int rest = hops - h - 1;
        const double q = 1.0 - hop_pdrs[static_cast<std::size_t>(h)];
        for (int r = left - rest; r >= 1; --r) {
            const double here = prefix * (1.0 - std::pow(q, r));
            if (here * suffixes[static_cast<std::size_t>(h + 1)][static_cast<std::size_t>(left - r)] >= required) {
                out.push_back(r);
                prefix = here;
                left -= r;
                break;
            }
        }
    }
    return out;
}

std::vector<TaskSpec> resolve_retries(std::vector<TaskSpec> tasks, const NetworkModel& network, double required) {
    for (std::size_t i = 0; i < tasks.size(); ++i) {
        if (tasks[i].id != static_cast<int>(i)) throw Error(ErrorKind::Contract, "task ids must equal their position");
        validate_task(tasks[i], network);
        if (tasks[i].retries.empty()) tasks[i].retries = allocate_retry_vector(path_pdrs(tasks[i], network), required);
    }
    return tasks;
}

Slot hyperperiod(const std::vector<TaskSpec>& tasks) {
    constexpr Slot kCap = Slot{1} << 40;
    Slot h = 1;
    for (const auto& t : tasks) {
        h = std::lcm(h, t.period);
        if (h > kCap) return -1;
    }
    return h;
}

StaticScheduleResult build_static_schedule(const std::vector<TaskSpec>& tasks, const NetworkModel& network, SlotMode mode,
                                           Slot horizon) {
    for (std::size_t i = 0; i < tasks.size(); ++i) {
        if (tasks[i].id != static_cast<int>(i)) throw Error(ErrorKind::Contract, "task ids must equal their position");
        validate_task(tasks[i], network);
        if (tasks[i].retries.empty()) throw Error(ErrorKind::Contract, "retry vectors must be resolved before scheduling");
    }
    StaticScheduleResult result;
    result.hyperperiod = hyperperiod(tasks);
    const bool periodic = result.hyperperiod > 0 && result.hyperperiod <= kMaxTableSlots;
    const Slot len = periodic ? result.hyperperiod : horizon;
    if (len <= 0) throw Error(ErrorKind::Contract, "a horizon is required when the hyperperiod is too long to tabulate");

    struct Active {
        std::int64_t instance = -1;
        int done = 0;
    };
    std::vector<Active> state(tasks.size());
    std::vector<SlotEntry> slots(static_cast<std::size_t>(len));
    Slot fail_slot = -1;
    const auto fail = [&](Slot t, PacketRef ref) {
        if (fail_slot < 0) {
            fail_slot = t;
            result.first_failure = ref;
        }
    };

    for (Slot t = 0; t < len; ++t) {
        for (std::size_t i = 0; i < tasks.size(); ++i) {
            const auto& task = tasks[i];
            auto& a = state[i];
            if (a.instance >= 0 && a.done < task.budget() && t == task.absolute_deadline(a.instance)) {
                fail(t, PacketRef{task.id, a.instance, false});
            }
            if (t % task.period == 0) a = Active{t / task.period, 0};
        }
        int best = -1;
        for (std::size_t i = 0; i < tasks.size(); ++i) {
            const auto& a = state[i];
            const auto& task = tasks[i];
            if (a.done >= task.budget() || t >= task.absolute_deadline(a.instance)) continue;
            if (best < 0 || task.absolute_deadline(a.instance) < tasks[static_cast<std::size_t>(best)].absolute_deadline(state[static_cast<std::size_t>(best)].instance)) {
                best = static_cast<int>(i);
            }
        }
        if (best < 0) continue;
        auto& a = state[static_cast<std::size_t>(best)];
        const auto& task = tasks[static_cast<std::size_t>(best)];
        SlotEntry e{PacketRef{task.id, a.instance, false}, 0, a.done};
        while (e.trial >= task.retries[static_cast<std::size_t>(e.hop)]) e.trial -= task.retries[static_cast<std::size_t>(e.hop++)];
        slots[static_cast<std::size_t>(t)] = e;
        ++a.done;
    }
    for (std::size_t i = 0; i < tasks.size(); ++i) {
        const auto& a = state[i];
        if (a.instance >= 0 && a.done < tasks[i].budget() && tasks[i].absolute_deadline(a.instance) <= len) {
            fail(tasks[i].absolute_deadline(a.instance), PacketRef{tasks[i].id, a.instance, false});
        }
    }

    std::vector<Slot> periods;
    for (const auto& task : tasks) {
        periods.push_back(task.period);
        result.budgets.push_back(task.budget());
    }
    result.schedule = StaticSchedule(mode, std::move(slots), std::move(periods), periodic);
    result.feasible = !result.first_failure.has_value();
    return result;
}

Verdict verify_schedulable(const StaticScheduleResult& result, const std::vector<TaskSpec>& tasks, const NetworkModel& network,
                           double required) {
    const auto& s = result.schedule;
    std::map<PacketRef, std::vector<std::pair<Slot, int>>> seen;
    for (Slot t = 0; t < s.length(); ++t) {
        const SlotEntry e = s.at(t);
        if (!e.idle()) seen[e.packet].emplace_back(t, e.hop);
    }
    const auto fail = [](std::string msg, PacketRef ref) { return Verdict{false, std::move(msg), ref}; };
    for (const auto& task : tasks) {
        const auto pdrs = path_pdrs(task, network);
        for (std::int64_t k = 0; task.absolute_deadline(k) <= s.length(); ++k) {
            const PacketRef ref{task.id, k, false};
            const std::string who = "packet " + std::to_string(task.id) + "/" + std::to_string(k) + ": ";
            const auto it = seen.find(ref);
            const auto& got = it == seen.end() ? std::vector<std::pair<Slot, int>>{} : it->second;
            std::vector<int> per_hop(static_cast<std::size_t>(task.hops()), 0);
            int last_hop = 0;
            for (const auto& [t, hop] : got) {
                if (t < task.release(k) || t >= task.absolute_deadline(k)) return fail(who + "slot outside its window", ref);
                if (hop < last_hop) return fail(who + "hop order violated", ref);
                if (hop < 0 || hop >= task.hops()) return fail(who + "hop label out of range", ref);
                last_hop = hop;
                ++per_hop[static_cast<std::size_t>(hop)];
            }
            if (static_cast<int>(got.size()) != task.budget()) return fail(who + "short of its slot budget", ref);
            if (s.mode() == SlotMode::TBS && per_hop != task.retries) return fail(who + "per-hop counts differ from the retry vector", ref);
            if (packet_pdr(pdrs, per_hop) < required) return fail(who + "below the required pdr", ref);
        }
    }
    return {};
}

}  // namespace fdpas
