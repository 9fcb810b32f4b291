#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <vector>

#include "fdpas/model.hpp"

namespace fdpas {

struct SlotTiming {
    int slot_duration_us = 10000;
    int ext_slot_duration_us = 10800;
    int tx_offset_us = 2120;
    int tx_ack_delay_us = 1000;
    int long_gt_us = 2200;
    int ext_long_gt_us = 3000;
    int short_gt_us = 1000;
    int priority_tick_us = 100;

    void validate() const;
};

// Window available for staggered offsets: the slot extension.
inline constexpr int kPriorityWindowUs = 800;

int priority_levels(const SlotTiming& timing);
int adjusted_tx_offset(const SlotTiming& timing, int priority);

// Error rate of the top-priority frame when a lower-priority sender is `distance` levels behind.
struct PerModel {
    int safe_tick_us = 60;
    std::map<int, double> below_safe{{1, 0.10}, {2, 0.05}};

    double per(int tick_us, int distance) const;
};

struct ContendingTx {
    NodeId sender;
    NodeId receiver;
    int priority = 0;
};

enum class TxOutcome { Delivered, Lost, Deferred, Collided };

// `link_success[i]` is the Bernoulli draw for contender i, used only if it wins.
std::vector<TxOutcome> arbitrate_slot(std::span<const ContendingTx> contenders, const SlotTiming& timing,
                                      const std::vector<bool>& link_success);

// Distance from the top priority to the next contender, 0 when it is alone.
int priority_distance(std::span<const ContendingTx> contenders);

struct ThreeSenderConfig {
    int priority_tick_us = 90;
    int max_retries = 5;
    double slotframe_ms = 165.0;
    double arrival_probability = 0.5;  // chance an idle sender gets a new packet per slotframe
    int slotframes = 20000;
    std::uint64_t seed = 1;
    PerModel per;
};

struct SenderStats {
    int priority = 0;
    std::int64_t generated = 0;
    std::int64_t delivered = 0;
    std::int64_t dropped = 0;
    double mean_latency_ms = 0.0;
    double drop_rate = 0.0;
};

// Three senders sharing one slot per slotframe, priorities 0, 1, 2.
std::vector<SenderStats> run_three_sender_experiment(const ThreeSenderConfig& config);

}  // namespace fdpas
