#include "fdpas/dropping.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>
#include <set>

namespace fdpas {

namespace {

constexpr double kTie = 1e-12;

bool all_zero(const std::vector<int>& v) {
    return std::all_of(v.begin(), v.end(), [](int x) { return x <= 0; });
}

std::map<PacketRef, std::size_t> order_of(const std::vector<PacketRef>& refs) {
    std::map<PacketRef, std::size_t> out;
    for (std::size_t j = 0; j < refs.size(); ++j) out.emplace(refs[j], j);
    return out;
}

DropDecision packet_decision(const std::vector<TransmissionVector>& vectors, const std::vector<std::size_t>& picked,
                             double required) {
    DropDecision d;
    d.level = DropLevel::Packet;
    for (std::size_t j : picked) {
        d.packets.push_back(vectors[j].packet);
        const double delta = pdr_degradation(required, 0.0);
        d.degradation[vectors[j].packet] = delta;
        d.total_degradation += delta;
    }
    return d;
}

bool covers_need(const std::vector<int>& need, const std::vector<TransmissionVector>& vectors, const std::vector<std::size_t>& picked) {
    for (std::size_t i = 0; i < need.size(); ++i) {
        int got = 0;
        for (std::size_t j : picked) got += vectors[j].per_window[i];
        if (got < need[i]) return false;
    }
    return true;
}

void finish_transmission_decision(DropDecision& d, const DroppingInstance& inst, const std::vector<std::vector<int>>& trials) {
    d.level = DropLevel::Transmission;
    std::set<std::size_t> touched;
    for (std::size_t p = 0; p < inst.periodic.size(); ++p) {
        if (trials[p] != inst.periodic[p].retries) touched.insert(p);
    }
    for (std::size_t p : touched) {
        const auto& pk = inst.periodic[p];
        const double pdr = periodic_pdr(pk, trials[p], inst.mode);
        const double delta = pdr_degradation(inst.required, pdr);
        d.degradation[pk.ref] = delta;
        d.total_degradation += delta;
        // A hop left without trials means the packet cannot arrive at all.
        if (pdr <= 0.0) d.packets.push_back(pk.ref);
    }
    std::sort(d.slots.begin(), d.slots.end(), [](const DroppedSlot& a, const DroppedSlot& b) { return a.slot < b.slot; });
}

}  // namespace

std::vector<TransmissionVector> build_transmission_vectors(const ActivePacketSets& sets, const StaticSchedule& schedule) {
    const auto order = order_of(sets.periodic);
    std::vector<TransmissionVector> out;
    for (const auto& ref : sets.periodic) out.push_back({ref, std::vector<int>(sets.rhythmic.size(), 0)});
    for (Slot t = sets.start; t < sets.end; ++t) {
        const int w = sets.window_of(t);
        if (w < 0) continue;
        const SlotEntry e = schedule.at(t);
        if (const auto it = order.find(e.packet); !e.idle() && it != order.end()) ++out[it->second].per_window[static_cast<std::size_t>(w)];
    }
    return out;
}

DemandVector build_demand_vector(const ActivePacketSets& sets, const StaticSchedule& schedule, int rhythmic_task) {
    DemandVector dv;
    for (const auto& rp : sets.rhythmic) {
        int free = 0;
        for (Slot t = rp.release; t < rp.deadline; ++t) {
            const SlotEntry e = schedule.at(t);
            if (e.idle() || e.packet.task == rhythmic_task) ++free;
        }
        dv.demand.push_back(rp.demand());
        dv.available.push_back(free);
        dv.need.push_back(std::max(0, rp.demand() - free));
    }
    return dv;
}

DroppingInstance make_dropping_instance(const ActivePacketSets& sets, const StaticSchedule& schedule,
                                        const std::vector<TaskSpec>& tasks, const NetworkModel& network, double required) {
    DroppingInstance inst;
    inst.mode = schedule.mode();
    inst.required = required;
    const auto order = order_of(sets.periodic);
    for (const auto& ref : sets.periodic) {
        const TaskSpec& task = tasks.at(static_cast<std::size_t>(ref.task));
        inst.periodic.push_back({ref, path_pdrs(task, network), task.retries, {}});
    }
    for (Slot t = sets.start; t < sets.end; ++t) {
        const SlotEntry e = schedule.at(t);
        if (e.idle()) continue;
        if (const auto it = order.find(e.packet); it != order.end()) {
            inst.periodic[it->second].slots.push_back({t, e.hop, sets.window_of(t)});
        }
    }
    return inst;
}

double periodic_pdr(const PeriodicPacket& packet, const std::vector<int>& trials, SlotMode mode) {
    if (mode == SlotMode::PBS) return shared_slot_pdr(packet.hop_pdrs, std::accumulate(trials.begin(), trials.end(), 0));
    return packet_pdr(packet.hop_pdrs, trials);
}

DropDecision greedy_drop_packets(const std::vector<int>& need_in, const std::vector<TransmissionVector>& vectors, double required) {
    std::vector<int> need = need_in;
    std::vector<std::vector<int>> eps;
    for (const auto& v : vectors) {
        if (v.per_window.size() != need.size()) throw Error(ErrorKind::Contract, "transmission vector length differs from the demand vector");
        eps.push_back(v.per_window);
    }
    std::vector<bool> alive(vectors.size(), true);
    std::vector<std::size_t> picked;
    while (!all_zero(need)) {
        std::optional<std::size_t> best;
        long best_sum = 0;
        for (std::size_t j = 0; j < eps.size(); ++j) {
            if (!alive[j]) continue;
            const long s = std::accumulate(eps[j].begin(), eps[j].end(), 0L);
            if (s > best_sum) {
                best_sum = s;
                best = j;
            }
        }
        if (!best) throw Error(ErrorKind::Infeasible, "dropping every periodic packet cannot free enough slots");
        alive[*best] = false;
        picked.push_back(*best);
        for (std::size_t i = 0; i < need.size(); ++i) need[i] = std::max(0, need[i] - eps[*best][i]);
        for (std::size_t j = 0; j < eps.size(); ++j) {
            if (!alive[j]) continue;
            for (std::size_t i = 0; i < need.size(); ++i) eps[j][i] = need[i] == 0 ? 0 : std::min(eps[j][i], need[i]);
        }
    }
    return packet_decision(vectors, picked, required);
}

DropDecision drop_transmissions(const DroppingInstance& inst) {
    std::vector<int> need = inst.need;
    std::vector<std::vector<int>> trials;
    std::vector<double> pdr_now, delta_now;
    for (const auto& p : inst.periodic) {
        trials.push_back(p.retries);
        pdr_now.push_back(periodic_pdr(p, p.retries, inst.mode));
        delta_now.push_back(pdr_degradation(inst.required, pdr_now.back()));
    }
    std::vector<std::vector<bool>> taken;
    for (const auto& p : inst.periodic) taken.emplace_back(p.slots.size(), false);

    DropDecision d;
    // A slot outside every needy window can never be dropped, so those are skipped up front.
    while (!all_zero(need)) {
        struct Pick {
            double d_delta, d_pdr;
            std::size_t p, s;
        };
        std::optional<Pick> best;
        for (std::size_t p = 0; p < inst.periodic.size(); ++p) {
            const auto& pk = inst.periodic[p];
            std::map<int, std::pair<double, double>> cost;
            for (std::size_t s = 0; s < pk.slots.size(); ++s) {
                const auto& ps = pk.slots[s];
                if (taken[p][s] || ps.window < 0 || need[static_cast<std::size_t>(ps.window)] <= 0) continue;
                const int key = inst.mode == SlotMode::PBS ? 0 : ps.hop;
                auto it = cost.find(key);
                if (it == cost.end()) {
                    auto t = trials[p];
                    auto& slot_hop = t[static_cast<std::size_t>(ps.hop)];
                    if (slot_hop <= 0) throw Error(ErrorKind::Contract, "periodic slot without a remaining trial");
                    --slot_hop;
                    const double pdr = periodic_pdr(pk, t, inst.mode);
                    it = cost.emplace(key, std::pair{pdr_degradation(inst.required, pdr) - delta_now[p], pdr_now[p] - pdr}).first;
                }
                const auto [dd, dp] = it->second;
                const bool better = !best || dd < best->d_delta - kTie ||
                                    (std::abs(dd - best->d_delta) <= kTie && dp < best->d_pdr - kTie);
                if (better) best = Pick{dd, dp, p, s};
            }
        }
        if (!best) throw Error(ErrorKind::Infeasible, "dropping every periodic transmission cannot free enough slots");
        const auto& ps = inst.periodic[best->p].slots[best->s];
        taken[best->p][best->s] = true;
        --trials[best->p][static_cast<std::size_t>(ps.hop)];
        --need[static_cast<std::size_t>(ps.window)];
        pdr_now[best->p] = periodic_pdr(inst.periodic[best->p], trials[best->p], inst.mode);
        delta_now[best->p] = pdr_degradation(inst.required, pdr_now[best->p]);
        d.slots.push_back({inst.periodic[best->p].ref, ps.slot, ps.hop});
    }
    finish_transmission_decision(d, inst, trials);
    return d;
}

DropDecision optimal_drop_packets(const std::vector<int>& need, const std::vector<TransmissionVector>& vectors, double required) {
    constexpr std::size_t kMaxCandidates = 22;
    if (all_zero(need)) return packet_decision(vectors, {}, required);
    std::vector<std::size_t> useful;
    for (std::size_t j = 0; j < vectors.size(); ++j) {
        if (vectors[j].per_window.size() != need.size()) throw Error(ErrorKind::Contract, "transmission vector length differs from the demand vector");
        for (std::size_t i = 0; i < need.size(); ++i) {
            if (need[i] > 0 && vectors[j].per_window[i] > 0) {
                useful.push_back(j);
                break;
            }
        }
    }
    if (useful.size() > kMaxCandidates) throw Error(ErrorKind::SizeLimit, "too many candidate packets for exhaustive search");
    const std::size_t n = useful.size();
    for (std::size_t k = 1; k <= n; ++k) {
        // Combinations of size k in lexicographic order of packet position.
        std::vector<std::size_t> idx(k);
        std::iota(idx.begin(), idx.end(), 0);
        while (true) {
            std::vector<std::size_t> picked;
            for (std::size_t i : idx) picked.push_back(useful[i]);
            if (covers_need(need, vectors, picked)) return packet_decision(vectors, picked, required);
            std::size_t pos = k;
            while (pos > 0 && idx[pos - 1] == n - k + pos - 1) --pos;
            if (pos == 0) break;
            ++idx[pos - 1];
            for (std::size_t i = pos; i < k; ++i) idx[i] = idx[i - 1] + 1;
        }
    }
    throw Error(ErrorKind::Infeasible, "dropping every periodic packet cannot free enough slots");
}

DropDecision optimal_drop_transmissions(const DroppingInstance& inst) {
    constexpr double kMaxStates = 5e6;
    struct Group {
        std::size_t packet;
        int hop;
        int window;
        std::vector<std::size_t> slots;
    };
    std::vector<Group> groups;
    for (std::size_t p = 0; p < inst.periodic.size(); ++p) {
        std::map<std::pair<int, int>, std::size_t> at;
        for (std::size_t s = 0; s < inst.periodic[p].slots.size(); ++s) {
            const auto& ps = inst.periodic[p].slots[s];
            if (ps.window < 0 || inst.need[static_cast<std::size_t>(ps.window)] <= 0) continue;
            const auto key = std::pair{ps.hop, ps.window};
            auto it = at.find(key);
            if (it == at.end()) {
                it = at.emplace(key, groups.size()).first;
                groups.push_back({p, ps.hop, ps.window, {}});
            }
            groups[it->second].slots.push_back(s);
        }
    }
    double states = 1.0;
    for (const auto& g : groups) {
        states *= static_cast<double>(g.slots.size() + 1);
        if (states > kMaxStates) throw Error(ErrorKind::SizeLimit, "too many transmission choices for exhaustive search");
    }

    // Capacity still reachable from group g onwards, per window.
    std::vector<std::vector<int>> reach(groups.size() + 1, std::vector<int>(inst.need.size(), 0));
    for (std::size_t g = groups.size(); g-- > 0;) {
        reach[g] = reach[g + 1];
        reach[g][static_cast<std::size_t>(groups[g].window)] += static_cast<int>(groups[g].slots.size());
    }

    std::vector<int> count(groups.size(), 0), got(inst.need.size(), 0);
    std::optional<std::pair<double, int>> best_cost;
    std::vector<int> best;
    const auto evaluate = [&] {
        std::vector<std::vector<int>> trials;
        for (const auto& p : inst.periodic) trials.push_back(p.retries);
        int dropped = 0;
        for (std::size_t g = 0; g < groups.size(); ++g) {
            trials[groups[g].packet][static_cast<std::size_t>(groups[g].hop)] -= count[g];
            dropped += count[g];
        }
        double cost = 0.0;
        for (std::size_t p = 0; p < inst.periodic.size(); ++p) {
            if (trials[p] != inst.periodic[p].retries) cost += pdr_degradation(inst.required, periodic_pdr(inst.periodic[p], trials[p], inst.mode));
        }
        if (!best_cost || cost < best_cost->first - kTie || (std::abs(cost - best_cost->first) <= kTie && dropped < best_cost->second)) {
            best_cost = std::pair{cost, dropped};
            best = count;
        }
    };
    const auto search = [&](auto&& self, std::size_t g) -> void {
        for (std::size_t i = 0; i < inst.need.size(); ++i) {
            if (got[i] + reach[g][i] < inst.need[i]) return;
        }
        if (g == groups.size()) {
            evaluate();
            return;
        }
        const auto w = static_cast<std::size_t>(groups[g].window);
        for (int c = 0; c <= static_cast<int>(groups[g].slots.size()); ++c) {
            count[g] = c;
            got[w] += c;
            self(self, g + 1);
            got[w] -= c;
        }
        count[g] = 0;
    };
    search(search, 0);
    if (!best_cost) throw Error(ErrorKind::Infeasible, "dropping every periodic transmission cannot free enough slots");

    DropDecision d;
    std::vector<std::vector<int>> trials;
    for (const auto& p : inst.periodic) trials.push_back(p.retries);
    for (std::size_t g = 0; g < groups.size(); ++g) {
        const auto& pk = inst.periodic[groups[g].packet];
        for (int c = 0; c < best[g]; ++c) {
            const auto& ps = pk.slots[groups[g].slots[static_cast<std::size_t>(c)]];
            d.slots.push_back({pk.ref, ps.slot, ps.hop});
        }
        trials[groups[g].packet][static_cast<std::size_t>(groups[g].hop)] -= best[g];
    }
    finish_transmission_decision(d, inst, trials);
    return d;
}

PacketDropProblem from_set_cover(const SetCoverInstance& instance) {
    if (instance.universe <= 0) throw Error(ErrorKind::Contract, "set cover universe must be non-empty");
    PacketDropProblem out;
    out.need.assign(static_cast<std::size_t>(instance.universe), 1);
    std::vector<bool> covered(out.need.size(), false);
    for (std::size_t j = 0; j < instance.subsets.size(); ++j) {
        if (instance.subsets[j].empty()) throw Error(ErrorKind::Contract, "set cover subsets must be non-empty");
        TransmissionVector v{PacketRef{static_cast<int>(j), 0, false}, std::vector<int>(out.need.size(), 0)};
        for (int e : instance.subsets[j]) {
            if (e < 0 || e >= instance.universe) throw Error(ErrorKind::Contract, "set cover element outside the universe");
            v.per_window[static_cast<std::size_t>(e)] = 1;
            covered[static_cast<std::size_t>(e)] = true;
        }
        out.vectors.push_back(std::move(v));
    }
    if (std::find(covered.begin(), covered.end(), false) != covered.end()) {
        throw Error(ErrorKind::Contract, "set cover subsets do not cover the universe");
    }
    return out;
}

DynamicSchedule overlay_rhythmic(const ActivePacketSets& sets, const StaticSchedule& schedule, int rhythmic_task,
                                 const DropDecision& decision) {
    const std::set<PacketRef> dropped_packets(decision.packets.begin(), decision.packets.end());
    std::set<Slot> dropped_slots;
    for (const auto& s : decision.slots) dropped_slots.insert(s.slot);

    DynamicSchedule out;
    out.start = sets.start;
    out.end = sets.end;
    for (const auto& rp : sets.rhythmic) {
        std::size_t next = 0;
        int trial = 0;
        for (Slot t = rp.release; t < rp.deadline && next < rp.hops.size(); ++t) {
            const SlotEntry e = schedule.at(t);
            const bool free = e.idle() || e.packet.task == rhythmic_task || dropped_slots.count(t) > 0 ||
                              (decision.level == DropLevel::Packet && dropped_packets.count(e.packet) > 0);
            if (!free) continue;
            const int hop = rp.hops[next];
            trial = next > 0 && rp.hops[next - 1] == hop ? trial + 1 : 0;
            out.overrides[t] = SlotEntry{PacketRef{rhythmic_task, rp.index, true}, hop, trial};
            ++next;
        }
        if (next < rp.hops.size()) throw Error(ErrorKind::Infeasible, "freed slots do not cover a rhythmic packet's demand");
    }
    return out;
}

DynamicResult generate_dynamic_schedule(const DisturbanceEvent& event, const StaticSchedule& schedule,
                                        const std::vector<TaskSpec>& tasks, const NetworkModel& network,
                                        const DynamicOptions& options) {
    const TaskSpec& task = tasks.at(static_cast<std::size_t>(event.task));
    const auto labels = rhythmic_demand_labels(task, options.lossy);
    Slot last_release = event.enter;
    for (std::size_t x = 0; x + 1 < event.spec.steps(); ++x) last_release += event.spec.periods[x];
    const Slot f_last = last_release + static_cast<Slot>(labels.size());
    const auto rhythmic_count = static_cast<std::int64_t>(event.spec.steps());

    DynamicResult result;
    result.upper_bound = end_point_upper_bound(event, options.beta);
    std::optional<std::size_t> chosen;
    std::optional<ActivePacketSets> chosen_sets;
    for (Slot t_ep : end_point_candidates(event, f_last, options.beta)) {
        CandidateOutcome outcome;
        outcome.end_point = t_ep;
        try {
            auto sets = build_active_sets(t_ep, event, schedule, tasks, labels);
            outcome.periodic_count = sets.periodic.size();
            const auto dv = build_demand_vector(sets, schedule, task.id);
            if (options.level == DropLevel::Packet) {
                const auto vectors = build_transmission_vectors(sets, schedule);
                outcome.decision = options.solver == Solver::Oracle ? optimal_drop_packets(dv.need, vectors, options.required)
                                                                    : greedy_drop_packets(dv.need, vectors, options.required);
            } else {
                auto inst = make_dropping_instance(sets, schedule, tasks, network, options.required);
                inst.need = dv.need;
                outcome.decision = options.solver == Solver::Oracle ? optimal_drop_transmissions(inst) : drop_transmissions(inst);
            }
            outcome.feasible = true;
            const auto better = [&](const CandidateOutcome& a, const CandidateOutcome& b) {
                if (options.level == DropLevel::Packet) return a.decision.dropped_packets() < b.decision.dropped_packets();
                return a.decision.total_degradation < b.decision.total_degradation - kTie;
            };
            if (!chosen || better(outcome, result.candidates[*chosen])) {
                chosen = result.candidates.size();
                chosen_sets = std::move(sets);
            }
        } catch (const Error& e) {
            if (e.kind() != ErrorKind::Infeasible) throw;
            outcome.reason = e.what();
        }
        result.candidates.push_back(std::move(outcome));
    }
    if (!chosen) throw Error(ErrorKind::Infeasible, "no end point candidate admits a dynamic schedule");

    result.end_point = result.candidates[*chosen].end_point;
    result.decision = result.candidates[*chosen].decision;
    result.sets = std::move(*chosen_sets);
    result.schedule = overlay_rhythmic(result.sets, schedule, task.id, result.decision);
    for (const auto& [t, e] : result.schedule.overrides) {
        if (e.packet.dynamic && e.packet.instance == rhythmic_count - 1) result.last_rhythmic_finish = t + 1;
    }
    if (result.last_rhythmic_finish > result.end_point || result.end_point > result.upper_bound) {
        throw Error(ErrorKind::Contract, "chosen end point violates the completion bound");
    }
    return result;
}

}  // namespace fdpas
