#pragma once

#include <compare>
#include <map>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace fdpas {

using Slot = std::int64_t;

enum class ErrorKind { Contract, Infeasible, Parse, SizeLimit, Generation };

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

struct NodeId {
    int value = -1;
    auto operator<=>(const NodeId&) const = default;
};

struct Link {
    NodeId from;
    NodeId to;
    double pdr = 1.0;
};

class NetworkModel {
public:
    NetworkModel() = default;
    // Throws Contract on dangling endpoints, a missing controller or a pdr outside (0, 1].
    NetworkModel(std::vector<std::string> names, NodeId controller, std::vector<Link> links);

    std::size_t node_count() const { return names_.size(); }
    const std::vector<std::string>& names() const { return names_; }
    const std::string& name(NodeId n) const { return names_.at(static_cast<std::size_t>(n.value)); }
    std::optional<NodeId> find(const std::string& name) const;
    NodeId controller() const { return controller_; }
    const std::vector<Link>& links() const { return links_; }
    std::optional<std::size_t> link_index(NodeId from, NodeId to) const;
    bool reliable() const;

private:
    std::vector<std::string> names_;
    NodeId controller_;
    std::vector<Link> links_;
    std::map<std::pair<int, int>, std::size_t> index_;
};

struct RhythmicSpec {
    std::vector<Slot> periods;
    std::vector<Slot> deadlines;

    std::size_t steps() const { return periods.size(); }
    Slot total_period() const;
    void validate() const;
};

struct TaskSpec {
    int id = 0;
    std::vector<NodeId> path;
    Slot period = 0;
    Slot deadline = 0;
    // Per-hop trial counts in the static schedule; empty until resolved.
    std::vector<int> retries;

    int hops() const { return static_cast<int>(path.size()) - 1; }
    int budget() const;
    Slot release(std::int64_t instance) const { return instance * period; }
    Slot absolute_deadline(std::int64_t instance) const { return instance * period + deadline; }
};

void validate_task(const TaskSpec& task, const NetworkModel& network);
std::vector<double> path_pdrs(const TaskSpec& task, const NetworkModel& network);

// Product over hops of 1 - (1 - pdr)^trials.
double packet_pdr(std::span<const double> hop_pdrs, std::span<const int> trials);
// Probability that all hops complete within `slots` shared slots, one hop attempt per slot.
double shared_slot_pdr(std::span<const double> hop_pdrs, int slots);
double pdr_degradation(double required, double achieved);

RhythmicSpec generate_rhythmic_spec(Slot nominal_period, double ratio, int steps, int min_window = 1);

struct GeneratorOptions {
    int min_hops = 2;
    int max_hops = 16;
    Slot max_period = 500;
    double required_pdr = 0.99;
};

std::vector<TaskSpec> generate_taskset(std::uint64_t seed, double target_utilization,
                                       const NetworkModel& network, const GeneratorOptions& options = {});
double utilization(const std::vector<TaskSpec>& tasks);

// Square grid with the controller at the centre and bidirectional links.
NetworkModel grid_network(int side, double pdr_low, double pdr_high, std::uint64_t seed);

}  // namespace fdpas
