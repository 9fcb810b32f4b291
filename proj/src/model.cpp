#include "fdpas/model.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <numeric>
#include <random>

#include "fdpas/static_scheduler.hpp"

namespace fdpas {

namespace {

// Bounded draw with a fixed algorithm so results match across standard libraries.
std::int64_t draw_int(std::mt19937_64& gen, std::int64_t lo, std::int64_t hi) {
    const auto span = static_cast<std::uint64_t>(hi - lo) + 1;
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() - std::numeric_limits<std::uint64_t>::max() % span;
    std::uint64_t x = gen();
    while (x >= limit) x = gen();
    return lo + static_cast<std::int64_t>(x % span);
}

double draw_unit(std::mt19937_64& gen) { return static_cast<double>(gen() >> 11) * 0x1.0p-53; }

template <typename T>
const T& pick(std::mt19937_64& gen, const std::vector<T>& items) {
    return items[static_cast<std::size_t>(draw_int(gen, 0, static_cast<std::int64_t>(items.size()) - 1))];
}

std::vector<int> bfs(const NetworkModel& net, NodeId root, bool reverse) {
    std::vector<int> dist(net.node_count(), -1);
    dist[static_cast<std::size_t>(root.value)] = 0;
    std::deque<NodeId> queue{root};
    while (!queue.empty()) {
        const NodeId cur = queue.front();
        queue.pop_front();
        for (const auto& l : net.links()) {
            const NodeId src = reverse ? l.to : l.from;
            const NodeId dst = reverse ? l.from : l.to;
            if (src != cur || dist[static_cast<std::size_t>(dst.value)] >= 0) continue;
            dist[static_cast<std::size_t>(dst.value)] = dist[static_cast<std::size_t>(cur.value)] + 1;
            queue.push_back(dst);
        }
    }
    return dist;
}

}  // namespace

NetworkModel::NetworkModel(std::vector<std::string> names, NodeId controller, std::vector<Link> links)
    : names_(std::move(names)), controller_(controller), links_(std::move(links)) {
    const auto valid = [&](NodeId n) { return n.value >= 0 && static_cast<std::size_t>(n.value) < names_.size(); };
    if (!valid(controller_)) throw Error(ErrorKind::Contract, "network has no controller node");
    for (const auto& l : links_) {
        if (!valid(l.from) || !valid(l.to)) throw Error(ErrorKind::Contract, "link endpoint is not a declared node");
        if (!(l.pdr > 0.0 && l.pdr <= 1.0)) throw Error(ErrorKind::Contract, "link pdr outside (0, 1]");
        if (!index_.emplace(std::pair{l.from.value, l.to.value}, index_.size()).second) {
            throw Error(ErrorKind::Contract, "duplicate link");
        }
    }
}

std::optional<NodeId> NetworkModel::find(const std::string& name) const {
    const auto it = std::find(names_.begin(), names_.end(), name);
    if (it == names_.end()) return std::nullopt;
    return NodeId{static_cast<int>(it - names_.begin())};
}

std::optional<std::size_t> NetworkModel::link_index(NodeId from, NodeId to) const {
    const auto it = index_.find({from.value, to.value});
    if (it == index_.end()) return std::nullopt;
    return it->second;
}

bool NetworkModel::reliable() const {
    return std::all_of(links_.begin(), links_.end(), [](const Link& l) { return l.pdr >= 1.0; });
}

Slot RhythmicSpec::total_period() const { return std::accumulate(periods.begin(), periods.end(), Slot{0}); }

void RhythmicSpec::validate() const {
    if (periods.empty() || periods.size() != deadlines.size()) {
        throw Error(ErrorKind::Contract, "rhythmic vectors must be non-empty and of equal length");
    }
    for (std::size_t x = 0; x < periods.size(); ++x) {
        if (periods[x] <= 0 || deadlines[x] <= 0 || deadlines[x] > periods[x]) {
            throw Error(ErrorKind::Contract, "rhythmic deadline must lie in (0, period]");
        }
        if (x > 0 && periods[x] < periods[x - 1]) throw Error(ErrorKind::Contract, "rhythmic periods must not decrease");
    }
}

int TaskSpec::budget() const { return std::accumulate(retries.begin(), retries.end(), 0); }

void validate_task(const TaskSpec& task, const NetworkModel& network) {
    const std::string who = "task " + std::to_string(task.id) + ": ";
    if (task.hops() < 2) throw Error(ErrorKind::Contract, who + "path needs at least two hops");
    if (std::find(task.path.begin(), task.path.end(), network.controller()) == task.path.end()) {
        throw Error(ErrorKind::Contract, who + "path must pass through the controller");
    }
    for (std::size_t h = 0; h + 1 < task.path.size(); ++h) {
        if (!network.link_index(task.path[h], task.path[h + 1])) throw Error(ErrorKind::Contract, who + "path uses an undeclared link");
    }
    if (task.period <= 0 || task.deadline <= 0 || task.deadline > task.period) {
        throw Error(ErrorKind::Contract, who + "deadline must lie in (0, period]");
    }
    if (!task.retries.empty()) {
        if (static_cast<int>(task.retries.size()) != task.hops()) throw Error(ErrorKind::Contract, who + "retry vector length must equal hop count");
        if (std::any_of(task.retries.begin(), task.retries.end(), [](int r) { return r < 1; })) {
            throw Error(ErrorKind::Contract, who + "every hop needs at least one slot");
        }
    }
}

std::vector<double> path_pdrs(const TaskSpec& task, const NetworkModel& network) {
    std::vector<double> out;
    for (std::size_t h = 0; h + 1 < task.path.size(); ++h) {
        const auto idx = network.link_index(task.path[h], task.path[h + 1]);
        if (!idx) throw Error(ErrorKind::Contract, "path uses an undeclared link");
        out.push_back(network.links()[*idx].pdr);
    }
    return out;
}

double packet_pdr(std::span<const double> hop_pdrs, std::span<const int> trials) {
    if (hop_pdrs.size() != trials.size() || hop_pdrs.empty()) {
        throw Error(ErrorKind::Contract, "packet_pdr: hop and trial lists differ in length");
    }
    double p = 1.0;
    for (std::size_t h = 0; h < hop_pdrs.size(); ++h) {
        if (trials[h] < 0) throw Error(ErrorKind::Contract, "packet_pdr: negative trial count");
        p *= 1.0 - std::pow(1.0 - hop_pdrs[h], trials[h]);
    }
    return p;
}

double shared_slot_pdr(std::span<const double> hop_pdrs, int slots) {
    const std::size_t hops = hop_pdrs.size();
    std::vector<double> at(hops + 1, 0.0);
    at[0] = 1.0;
    for (int s = 0; s < slots; ++s) {
        for (std::size_t h = hops; h-- > 0;) {
            const double moved = at[h] * hop_pdrs[h];
            at[h + 1] += moved;
            at[h] -= moved;
        }
    }
    return at[hops];
}

double pdr_degradation(double required, double achieved) { return std::max(0.0, required - achieved); }

RhythmicSpec generate_rhythmic_spec(Slot nominal_period, double ratio, int steps, int min_window) {
    if (!(ratio > 0.0 && ratio < 1.0) || steps < 1) throw Error(ErrorKind::Contract, "ratio must lie in (0,1) and steps >= 1");
    // Exact rational evaluation of floor(P * (g + (k-1)(1-g)/R)) with g = num/den.
    constexpr std::int64_t den = 1'000'000;
    const auto num = static_cast<std::int64_t>(std::llround(ratio * den));
    RhythmicSpec spec;
    for (int k = 1; k <= steps; ++k) {
        const std::int64_t top = nominal_period * (num * steps + (k - 1) * (den - num));
        const Slot period = top / (den * steps);
        if (period < min_window) throw Error(ErrorKind::Infeasible, "rhythmic period shorter than the packet demand");
        spec.periods.push_back(period);
    }
    spec.deadlines = spec.periods;
    return spec;
}

double utilization(const std::vector<TaskSpec>& tasks) {
    double u = 0.0;
    for (const auto& t : tasks) u += static_cast<double>(t.budget()) / static_cast<double>(t.period);
    return u;
}

std::vector<TaskSpec> generate_taskset(std::uint64_t seed, double target_utilization, const NetworkModel& network,
                                       const GeneratorOptions& options) {
    if (!(target_utilization >= 0.0 && target_utilization <= 1.0)) throw Error(ErrorKind::Contract, "target utilization outside [0, 1]");
    std::mt19937_64 gen(seed);
    const NodeId ctrl = network.controller();
    const auto to_ctrl = bfs(network, ctrl, true);
    const auto from_ctrl = bfs(network, ctrl, false);

    std::vector<std::pair<NodeId, NodeId>> by_hops[64];
    std::vector<int> lengths;
    for (std::size_t s = 0; s < network.node_count(); ++s) {
        for (std::size_t a = 0; a < network.node_count(); ++a) {
            if (s == a || static_cast<int>(s) == ctrl.value || static_cast<int>(a) == ctrl.value) continue;
            if (to_ctrl[s] < 1 || from_ctrl[a] < 1) continue;
            const int h = to_ctrl[s] + from_ctrl[a];
            if (h < options.min_hops || h > options.max_hops || h >= 64) continue;
            if (by_hops[h].empty()) lengths.push_back(h);
            by_hops[h].emplace_back(NodeId{static_cast<int>(s)}, NodeId{static_cast<int>(a)});
        }
    }
    if (lengths.empty()) throw Error(ErrorKind::Generation, "network too small to host any sensor-controller-actuator path");
    std::sort(lengths.begin(), lengths.end());

    const auto walk = [&](NodeId from, NodeId to, const std::vector<int>& dist, bool towards_root) {
        // towards_root: dist is distance to `to`; otherwise dist is distance from `from`, walked backwards from `to`.
        std::vector<NodeId> seq{towards_root ? from : to};
        while (seq.back() != (towards_root ? to : from)) {
            const NodeId cur = seq.back();
            std::vector<NodeId> next;
            for (const auto& l : network.links()) {
                const NodeId a = towards_root ? l.from : l.to;
                const NodeId b = towards_root ? l.to : l.from;
                if (a == cur && dist[static_cast<std::size_t>(b.value)] == dist[static_cast<std::size_t>(cur.value)] - 1) next.push_back(b);
            }
            seq.push_back(pick(gen, next));
        }
        if (!towards_root) std::reverse(seq.begin(), seq.end());
        return seq;
    };

    std::vector<TaskSpec> tasks;
    double total = 0.0;
    int attempts = 0;
    while (total < target_utilization) {
        if (++attempts > 100000) throw Error(ErrorKind::Generation, "could not reach the target utilization");
        const int h = pick(gen, lengths);
        const auto [sensor, actuator] = pick(gen, by_hops[h]);
        auto path = walk(sensor, ctrl, to_ctrl, true);
        const auto tail = walk(ctrl, actuator, from_ctrl, false);
        path.insert(path.end(), tail.begin() + 1, tail.end());
        auto sorted = path;
        std::sort(sorted.begin(), sorted.end());
        if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) continue;

        TaskSpec task;
        task.id = static_cast<int>(tasks.size());
        task.path = std::move(path);
        task.period = draw_int(gen, h, options.max_period);
        task.deadline = task.period;
        task.retries = allocate_retry_vector(path_pdrs(task, network), options.required_pdr);
        const double u = static_cast<double>(task.budget()) / static_cast<double>(task.period);
        if (total + u > 1.0) continue;
        total += u;
        tasks.push_back(std::move(task));
    }
    return tasks;
}

NetworkModel grid_network(int side, double pdr_low, double pdr_high, std::uint64_t seed) {
    if (side < 2) throw Error(ErrorKind::Contract, "grid side must be at least 2");
    std::mt19937_64 gen(seed);
    const int centre = (side / 2) * side + side / 2;
    std::vector<std::string> names;
    int next = 0;
    for (int i = 0; i < side * side; ++i) names.push_back(i == centre ? "Vc" : "V" + std::to_string(next++));
    std::vector<Link> links;
    const auto add = [&](int a, int b) {
        for (const auto& [x, y] : {std::pair{a, b}, std::pair{b, a}}) {
            links.push_back({NodeId{x}, NodeId{y}, pdr_low + (pdr_high - pdr_low) * draw_unit(gen)});
        }
    };
    for (int r = 0; r < side; ++r) {
        for (int c = 0; c < side; ++c) {
            if (c + 1 < side) add(r * side + c, r * side + c + 1);
            if (r + 1 < side) add(r * side + c, (r + 1) * side + c);
        }
    }
    return NetworkModel(std::move(names), NodeId{centre}, std::move(links));
}

}  // namespace fdpas
