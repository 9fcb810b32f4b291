#include "fdpas/mac.hpp"

#include <algorithm>

#include "fdpas/rng.hpp"

namespace fdpas {

void SlotTiming::validate() const {
    if (priority_tick_us <= 0) throw Error(ErrorKind::Contract, "priority tick must be positive");
    const int last = adjusted_tx_offset(*this, priority_levels(*this) - 1);
    if (last > ext_slot_duration_us) throw Error(ErrorKind::Contract, "priority offsets exceed the extended slot");
}

int priority_levels(const SlotTiming& timing) {
    if (timing.priority_tick_us <= 0) throw Error(ErrorKind::Contract, "priority tick must be positive");
    return kPriorityWindowUs / timing.priority_tick_us + 1;
}

int adjusted_tx_offset(const SlotTiming& timing, int priority) {
    if (priority < 0 || priority >= priority_levels(timing)) throw Error(ErrorKind::Contract, "priority level out of range");
    return timing.tx_offset_us + priority * timing.priority_tick_us;
}

double PerModel::per(int tick_us, int distance) const {
    if (distance <= 0 || tick_us >= safe_tick_us || below_safe.empty()) return 0.0;
    auto it = below_safe.upper_bound(distance);
    return it == below_safe.begin() ? below_safe.begin()->second : std::prev(it)->second;
}

int priority_distance(std::span<const ContendingTx> contenders) {
    if (contenders.size() < 2) return 0;
    std::vector<int> p;
    for (const auto& c : contenders) p.push_back(c.priority);
    std::sort(p.begin(), p.end());
    return p[1] - p[0];
}

std::vector<TxOutcome> arbitrate_slot(std::span<const ContendingTx> contenders, const SlotTiming& timing,
                                      const std::vector<bool>& link_success) {
    if (link_success.size() != contenders.size()) throw Error(ErrorKind::Contract, "one link draw per contender is required");
    std::vector<TxOutcome> out(contenders.size(), TxOutcome::Deferred);
    if (contenders.empty()) return out;
    const int levels = priority_levels(timing);
    int top = levels;
    for (const auto& c : contenders) {
        if (c.priority < 0 || c.priority >= levels) throw Error(ErrorKind::Contract, "priority level out of range");
        top = std::min(top, c.priority);
    }
    const auto at_top = std::count_if(contenders.begin(), contenders.end(), [&](const ContendingTx& c) { return c.priority == top; });
    for (std::size_t i = 0; i < contenders.size(); ++i) {
        if (contenders[i].priority != top) continue;
        if (at_top > 1) out[i] = TxOutcome::Collided;
        else out[i] = link_success[i] ? TxOutcome::Delivered : TxOutcome::Lost;
    }
    return out;
}

std::vector<SenderStats> run_three_sender_experiment(const ThreeSenderConfig& config) {
    constexpr int kSenders = 3;
    SlotTiming timing;
    timing.priority_tick_us = config.priority_tick_us;
    timing.validate();
    if (priority_levels(timing) < kSenders) throw Error(ErrorKind::Contract, "priority tick leaves fewer than three levels");

    struct Pending {
        bool active = false;
        double generated_ms = 0.0;
        int attempts = 0;
    };
    std::vector<Pending> queue(kSenders);
    std::vector<SenderStats> stats(kSenders);
    std::vector<double> latency_sum(kSenders, 0.0);
    for (int s = 0; s < kSenders; ++s) stats[static_cast<std::size_t>(s)].priority = s;

    const std::uint64_t arrivals = stream_id("arrivals");
    const std::uint64_t offsets = stream_id("offsets");
    const std::uint64_t channel = stream_id("channel");
    for (int f = 0; f < config.slotframes; ++f) {
        const double slot_ms = f * config.slotframe_ms;
        std::vector<ContendingTx> contenders;
        std::vector<int> who;
        for (int s = 0; s < kSenders; ++s) {
            auto& q = queue[static_cast<std::size_t>(s)];
            const auto idx = static_cast<std::uint64_t>(f) * kSenders + static_cast<std::uint64_t>(s);
            if (!q.active && uniform_at(config.seed, arrivals, idx) < config.arrival_probability) {
                // Packet triggered somewhere in the previous slotframe.
                q = Pending{true, slot_ms - config.slotframe_ms * uniform_at(config.seed, offsets, idx), 0};
                ++stats[static_cast<std::size_t>(s)].generated;
            }
            if (q.active) {
                contenders.push_back({NodeId{s}, NodeId{kSenders}, s});
                who.push_back(s);
            }
        }
        const double per = config.per.per(config.priority_tick_us, priority_distance(contenders));
        std::vector<bool> ok;
        for (std::size_t i = 0; i < contenders.size(); ++i) {
            ok.push_back(uniform_at(config.seed, channel, static_cast<std::uint64_t>(f) * kSenders + i) >= per);
        }
        const auto outcome = arbitrate_slot(contenders, timing, ok);
        for (std::size_t i = 0; i < who.size(); ++i) {
            const auto s = static_cast<std::size_t>(who[i]);
            auto& q = queue[s];
            if (outcome[i] == TxOutcome::Delivered) {
                ++stats[s].delivered;
                latency_sum[s] += slot_ms - q.generated_ms;
                q.active = false;
            } else if (++q.attempts > config.max_retries) {
                ++stats[s].dropped;
                q.active = false;
            }
        }
    }
    for (std::size_t s = 0; s < stats.size(); ++s) {
        auto& st = stats[s];
        st.mean_latency_ms = st.delivered > 0 ? latency_sum[s] / static_cast<double>(st.delivered) : 0.0;
        const auto finished = st.delivered + st.dropped;
        st.drop_rate = finished > 0 ? static_cast<double>(st.dropped) / static_cast<double>(finished) : 0.0;
    }
    return stats;
}

}  // namespace fdpas
