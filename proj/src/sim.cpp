#include "fdpas/sim.hpp"

#include <algorithm>
#include <map>
#include <ostream>
#include <queue>
#include <set>

#include "fdpas/rhythmic.hpp"
#include "fdpas/rng.hpp"

namespace fdpas {

std::string to_string(Framework f) {
    switch (f) {
        case Framework::FdpasPacket: return "fdpas-packet";
        case Framework::FdpasTransmission: return "fdpas-transmission";
        case Framework::BaselineBroadcast: return "baseline-broadcast";
    }
    return "unknown";
}

Framework framework_from_string(const std::string& name) {
    if (name == "fdpas-packet") return Framework::FdpasPacket;
    if (name == "fdpas-transmission") return Framework::FdpasTransmission;
    if (name == "baseline-broadcast") return Framework::BaselineBroadcast;
    throw Error(ErrorKind::Parse, "unknown framework '" + name + "'");
}

int controller_eccentricity(const NetworkModel& network) {
    std::vector<int> dist(network.node_count(), -1);
    std::queue<int> q;
    dist[static_cast<std::size_t>(network.controller().value)] = 0;
    q.push(network.controller().value);
    int far = 0;
    while (!q.empty()) {
        const int u = q.front();
        q.pop();
        for (const auto& l : network.links()) {
            if (l.from.value != u || dist[static_cast<std::size_t>(l.to.value)] >= 0) continue;
            dist[static_cast<std::size_t>(l.to.value)] = dist[static_cast<std::size_t>(u)] + 1;
            far = std::max(far, dist[static_cast<std::size_t>(l.to.value)]);
            q.push(l.to.value);
        }
    }
    return far;
}

Slot default_horizon(const SimConfig& config) {
    Slot max_period = 1;
    for (const auto& t : config.tasks) max_period = std::max(max_period, t.period);
    const Slot h = hyperperiod(config.tasks);
    const Slot tail = h > 0 && h <= 8 * max_period ? 2 * h : 2 * max_period;
    if (!config.disturbance) return tail;
    const auto& d = *config.disturbance;
    const auto event = make_event(config.tasks.at(static_cast<std::size_t>(d.task)), d.instance, d.spec);
    return end_point_upper_bound(event, config.beta) + tail;
}

double success_ratio(const std::vector<Metrics>& batch) {
    if (batch.empty()) throw Error(ErrorKind::Contract, "success ratio needs at least one run");
    const auto ok = std::count_if(batch.begin(), batch.end(), [](const Metrics& m) { return m.success; });
    return static_cast<double>(ok) / static_cast<double>(batch.size());
}

double degradation_rate(const DropDecision& decision, std::size_t periodic_count) {
    return periodic_count == 0 ? 0.0 : decision.total_degradation / static_cast<double>(periodic_count);
}

Slot baseline_drt(const SimConfig& config, const StaticSchedule& schedule) {
    if (!config.disturbance) throw Error(ErrorKind::Contract, "baseline response time needs a disturbance");
    const auto& d = *config.disturbance;
    const TaskSpec& task = config.tasks.at(static_cast<std::size_t>(d.task));
    const auto event = make_event(task, d.instance, d.spec);
    const Slot p0 = task.period;
    const Slot period = config.broadcast_period > 0 ? config.broadcast_period : 2 * p0;
    const int depth = config.broadcast_depth >= 0 ? config.broadcast_depth : controller_eccentricity(config.network);
    const Slot offset = config.broadcast_offset >= 0 ? config.broadcast_offset : std::max<Slot>(0, period - depth);

    const auto pos = std::find(task.path.begin(), task.path.end(), config.network.controller()) - task.path.begin();
    Slot at_controller = event.detect;
    if (pos > 0) {
        for (Slot t : schedule.slots_of(task, d.instance)) {
            if (schedule.at(t).hop == pos - 1) at_controller = t + 1;
        }
    }
    const Slot broadcast = (at_controller + period - 1) / period * period + offset;
    const Slot reach = broadcast + depth;
    const Slot start = std::max(event.enter, (reach + p0 - 1) / p0 * p0);
    return start - event.detect;
}

namespace {

std::string ref_text(const PacketRef& r) {
    return std::to_string(r.task) + (r.dynamic ? ".r" : ".") + std::to_string(r.instance);
}

struct Live {
    Slot release = 0;
    Slot deadline = 0;
    int hop = 0;
    bool done = false;
};

const char* outcome_text(TxOutcome o) {
    switch (o) {
        case TxOutcome::Delivered: return "delivered";
        case TxOutcome::Lost: return "lost";
        case TxOutcome::Deferred: return "deferred";
        case TxOutcome::Collided: return "collided";
    }
    return "?";
}

}  // namespace

RunResult run(const SimConfig& config, std::ostream* trace) {
    RunResult out;
    const auto tasks = resolve_retries(config.tasks, config.network, config.required);
    const NetworkModel& net = config.network;
    config.timing.validate();

    SimConfig resolved = config;
    resolved.tasks = tasks;
    out.horizon = config.horizon > 0 ? config.horizon : default_horizon(resolved);
    out.static_result = build_static_schedule(tasks, net, config.mode, out.horizon);
    if (!out.static_result.feasible) {
        const auto& f = *out.static_result.first_failure;
        throw Error(ErrorKind::Infeasible, "static schedule misses the deadline of packet " + ref_text(f));
    }
    const StaticSchedule& S = out.static_result.schedule;
    if (!S.covers(out.horizon - 1)) throw Error(ErrorKind::Contract, "static table shorter than the horizon");

    Metrics& m = out.metrics;
    m.per_task.resize(tasks.size());
    m.feasible = true;
    m.success = true;

    std::vector<bool> in_vrhy(net.node_count(), false);
    std::map<Slot, std::vector<std::string>> notes;
    const DynamicResult* dyn = nullptr;
    if (config.disturbance) {
        const auto& d = *config.disturbance;
        const TaskSpec& task0 = tasks.at(static_cast<std::size_t>(d.task));
        out.event = make_event(task0, d.instance, d.spec);
        const auto& ev = *out.event;
        const Slot p0 = task0.period;
        m.rhythmic_period = p0;
        if (config.framework == Framework::BaselineBroadcast) {
            m.drt = baseline_drt(resolved, S);
            m.success = m.drt <= config.alpha * p0;
        } else {
            DynamicOptions opts;
            opts.lossy = !net.reliable();
            opts.level = config.framework == Framework::FdpasTransmission && opts.lossy ? DropLevel::Transmission : DropLevel::Packet;
            opts.solver = config.solver;
            opts.beta = config.beta;
            opts.required = config.required;
            try {
                out.dynamic = generate_dynamic_schedule(ev, S, tasks, net, opts);
            } catch (const Error& e) {
                if (e.kind() != ErrorKind::Infeasible) throw;
                m.note = e.what();
            }
            if (out.dynamic) {
                dyn = &*out.dynamic;
                m.drt = ev.enter - ev.detect;
                m.dhl = dyn->end_point - ev.enter;
                m.end_point = dyn->end_point;
                m.periodic_in_window = dyn->sets.periodic.size();
                m.dropped_packets = dyn->decision.dropped_packets();
                m.dropped_transmissions = dyn->decision.dropped_transmissions();
                m.dr = degradation_rate(dyn->decision, m.periodic_in_window);
                m.success = m.drt <= config.alpha * p0;
                for (NodeId n : compute_vrhy(task0)) {
                    in_vrhy[static_cast<std::size_t>(n.value)] = true;
                    const auto w = find_idle_slot(S, &dyn->schedule, tasks, ev, n);
                    if (w.found) {
                        notes[w.idle_slot].push_back("kind=state node=" + net.name(n) + " event=schedule-generated");
                    } else if (n != net.controller()) {
                        ++m.idle_slot_violations;
                    }
                }
            } else {
                m.feasible = false;
                m.success = false;
            }
        }
    }

    std::set<PacketRef> decided_drop;
    Slot superseded_from = 0, superseded_to = 0;
    std::map<Slot, std::vector<std::size_t>> dynamic_releases;
    if (dyn) {
        decided_drop.insert(dyn->decision.packets.begin(), dyn->decision.packets.end());
        superseded_from = dyn->sets.start;
        superseded_to = dyn->sets.resume_release;
        for (std::size_t i = 0; i < dyn->sets.rhythmic.size(); ++i) dynamic_releases[dyn->sets.rhythmic[i].release].push_back(i);
    }
    const int rhythmic_task = dyn ? out.event->task : -1;

    std::vector<std::uint64_t> link_stream;
    for (const auto& l : net.links()) link_stream.push_back(stream_id(net.name(l.from) + ">" + net.name(l.to)));

    std::map<PacketRef, Live> live;
    std::map<Slot, std::vector<PacketRef>> expiries;
    const auto emit = [&](Slot t, const std::string& body) {
        if (trace) *trace << "slot=" << t << ' ' << body << '\n';
    };
    const auto same_transmission = [&](const SlotEntry& a, const SlotEntry& b) {
        if (a.idle() || b.idle() || a.packet != b.packet) return false;
        return S.mode() == SlotMode::PBS || a.hop == b.hop;
    };

    for (Slot t = 0; t <= out.horizon; ++t) {
        if (const auto it = expiries.find(t); it != expiries.end()) {
            for (const auto& ref : it->second) {
                auto& p = live.at(ref);
                if (p.done) continue;
                auto& st = m.per_task[static_cast<std::size_t>(ref.task)];
                if (decided_drop.count(ref)) {
                    ++st.dropped;
                    emit(t, "kind=state packet=" + ref_text(ref) + " event=dropped");
                } else {
                    ++st.missed;
                    emit(t, "kind=state packet=" + ref_text(ref) + " event=missed");
                }
                p.done = true;
            }
            expiries.erase(it);
        }
        if (t == out.horizon) break;

        const auto release = [&](const PacketRef& ref, Slot deadline) {
            live[ref] = Live{t, deadline, 0, false};
            expiries[deadline].push_back(ref);
            ++m.per_task[static_cast<std::size_t>(ref.task)].released;
            emit(t, "kind=state packet=" + ref_text(ref) + " event=released deadline=" + std::to_string(deadline));
        };
        for (const auto& task : tasks) {
            if (t % task.period != 0) continue;
            const std::int64_t k = t / task.period;
            if (task.absolute_deadline(k) > out.horizon) continue;
            if (task.id == rhythmic_task && t >= superseded_from && t < superseded_to) continue;
            release(PacketRef{task.id, k, false}, task.absolute_deadline(k));
        }
        if (const auto it = dynamic_releases.find(t); it != dynamic_releases.end()) {
            for (std::size_t i : it->second) {
                const auto& rp = dyn->sets.rhythmic[i];
                if (rp.deadline <= out.horizon) release(PacketRef{rhythmic_task, rp.index, true}, rp.deadline);
            }
        }
        if (const auto it = notes.find(t); it != notes.end()) {
            for (const auto& n : it->second) emit(t, n);
        }

        const bool window = dyn && dyn->schedule.in_window(t);
        const SlotEntry base = S.at(t);
        const SlotEntry over = window ? dyn->schedule.at(S, t) : base;
        const auto entry_for = [&](NodeId n) { return window && in_vrhy[static_cast<std::size_t>(n.value)] ? over : base; };
        const auto sched_line = [&](const char* table, const SlotEntry& e) {
            emit(t, std::string("kind=sched table=") + table + " packet=" + ref_text(e.packet) + " hop=" + std::to_string(e.hop) +
                        " trial=" + std::to_string(e.trial));
        };
        if (!base.idle()) sched_line("static", base);
        if (window && !(over == base)) {
            if (over.idle()) emit(t, "kind=sched table=dynamic packet=idle");
            else sched_line("dynamic", over);
        }

        std::vector<SlotEntry> candidates{base};
        if (!(over == base)) candidates.push_back(over);
        std::vector<ContendingTx> contenders;
        std::vector<SlotEntry> carried;
        for (const auto& e : candidates) {
            if (e.idle()) continue;
            const auto it = live.find(e.packet);
            if (it == live.end() || it->second.done) continue;
            const TaskSpec& task = tasks[static_cast<std::size_t>(e.packet.task)];
            const int hop = it->second.hop;
            if (S.mode() == SlotMode::TBS && hop != e.hop) continue;
            const NodeId sender = task.path[static_cast<std::size_t>(hop)];
            if (!same_transmission(entry_for(sender), e)) continue;
            contenders.push_back({sender, task.path[static_cast<std::size_t>(hop) + 1],
                                  e.packet.dynamic ? config.rhythmic_priority : config.periodic_priority});
            SlotEntry sent = e;
            sent.hop = hop;
            carried.push_back(sent);
        }
        if (contenders.empty()) continue;

        const double per = config.per.per(config.timing.priority_tick_us, priority_distance(contenders));
        std::vector<bool> draws;
        for (const auto& c : contenders) {
            const auto li = *net.link_index(c.sender, c.receiver);
            const double p = net.links()[li].pdr * (1.0 - per);
            draws.push_back(uniform_at(config.seed, link_stream[li], static_cast<std::uint64_t>(t)) < p);
        }
        const auto outcome = arbitrate_slot(contenders, config.timing, draws);
        for (std::size_t i = 0; i < contenders.size(); ++i) {
            const auto& c = contenders[i];
            const auto& e = carried[i];
            TxOutcome o = outcome[i];
            const bool receiver_busy = std::any_of(contenders.begin(), contenders.end(), [&](const ContendingTx& x) { return x.sender == c.receiver; });
            const bool listening = !receiver_busy && same_transmission(entry_for(c.receiver), e);
            std::string result = outcome_text(o);
            if (o == TxOutcome::Delivered && !listening) {
                o = TxOutcome::Lost;
                result = "unheard";
            }
            emit(t, "kind=tx packet=" + ref_text(e.packet) + " hop=" + std::to_string(e.hop) + " from=" + net.name(c.sender) +
                        " to=" + net.name(c.receiver) + " priority=" + std::to_string(c.priority) + " result=" + result);
            if (o == TxOutcome::Deferred) emit(t, "kind=state packet=" + ref_text(e.packet) + " event=preempted");
            if (o != TxOutcome::Delivered) continue;
            auto& p = live.at(e.packet);
            ++p.hop;
            const TaskSpec& task = tasks[static_cast<std::size_t>(e.packet.task)];
            if (p.hop == task.hops()) {
                p.done = true;
                ++m.per_task[static_cast<std::size_t>(e.packet.task)].delivered;
                emit(t, "kind=state packet=" + ref_text(e.packet) + " event=delivered");
            }
        }
    }
    if (trace) {
        *trace << "slot=" << out.horizon << " kind=outcome success=" << (m.success ? 1 : 0) << " drt=" << m.drt << " dhl=" << m.dhl
               << " end_point=" << m.end_point << " dropped_packets=" << m.dropped_packets
               << " dropped_transmissions=" << m.dropped_transmissions << '\n';
    }
    return out;
}

}  // namespace fdpas
