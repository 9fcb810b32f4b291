#include "fdpas/config.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "json.hpp"

namespace fdpas {

namespace {

using nlohmann::json;
using nlohmann::ordered_json;

[[noreturn]] void fail(const std::string& what) { throw Error(ErrorKind::Parse, what); }

json parse_json(const std::string& text) {
    try {
        return json::parse(text);
    } catch (const json::parse_error& e) {
        const auto upto = std::min<std::size_t>(e.byte, text.size());
        const auto line = 1 + std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(upto), '\n');
        fail("line " + std::to_string(line) + ": malformed JSON (" + e.what() + ")");
    }
}

const json& need(const json& obj, const char* key, const std::string& where) {
    if (!obj.is_object() || !obj.contains(key)) fail(where + ": missing key '" + key + "'");
    return obj.at(key);
}

template <class T>
T get(const json& v, const std::string& where) {
    try {
        return v.get<T>();
    } catch (const json::exception&) {
        fail(where + ": value has the wrong type");
    }
}

template <class T>
T get_or(const json& obj, const char* key, T fallback, const std::string& where) {
    if (!obj.is_object() || !obj.contains(key)) return fallback;
    return get<T>(obj.at(key), where + "." + key);
}

NodeId node_named(const NetworkModel& net, const json& v, const std::string& where) {
    const auto name = get<std::string>(v, where);
    const auto id = net.find(name);
    if (!id) fail(where + ": unknown node '" + name + "'");
    return *id;
}

NetworkModel network_from(const json& j) {
    const std::string where = "network";
    auto names = get<std::vector<std::string>>(need(j, "nodes", where), where + ".nodes");
    const auto controller = get<std::string>(need(j, "controller", where), where + ".controller");
    const auto cit = std::find(names.begin(), names.end(), controller);
    if (cit == names.end()) fail(where + ".controller: unknown node '" + controller + "'");
    std::vector<Link> links;
    const auto& arr = need(j, "links", where);
    if (!arr.is_array()) fail(where + ".links: expected an array");
    const auto index = [&](const std::string& n, const std::string& w) {
        const auto it = std::find(names.begin(), names.end(), n);
        if (it == names.end()) fail(w + ": unknown node '" + n + "'");
        return NodeId{static_cast<int>(it - names.begin())};
    };
    for (std::size_t i = 0; i < arr.size(); ++i) {
        const std::string w = where + ".links[" + std::to_string(i) + "]";
        links.push_back({index(get<std::string>(need(arr[i], "from", w), w + ".from"), w),
                         index(get<std::string>(need(arr[i], "to", w), w + ".to"), w),
                         get<double>(need(arr[i], "pdr", w), w + ".pdr")});
    }
    const NodeId ctrl{static_cast<int>(cit - names.begin())};
    try {
        return NetworkModel(std::move(names), ctrl, std::move(links));
    } catch (const Error& e) {
        fail(where + ": " + e.what());
    }
}

SlotMode mode_from(const std::string& s) {
    if (s == "TBS") return SlotMode::TBS;
    if (s == "PBS") return SlotMode::PBS;
    fail("sim.mode: expected TBS or PBS");
}

Solver solver_from(const std::string& s) {
    if (s == "greedy") return Solver::Greedy;
    if (s == "oracle") return Solver::Oracle;
    fail("sim.solver: expected greedy or oracle");
}

}  // namespace

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorKind::Parse, "cannot open '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

NetworkModel parse_network(const std::string& text) {
    const json j = parse_json(text);
    return network_from(j.contains("network") ? j.at("network") : j);
}

NetworkModel load_network(const std::string& path) { return parse_network(read_file(path)); }

SimConfig parse_scenario(const std::string& text) {
    const json j = parse_json(text);
    SimConfig c;
    c.network = network_from(need(j, "network", "scenario"));

    const auto& tasks = need(j, "tasks", "scenario");
    if (!tasks.is_array()) fail("tasks: expected an array");
    for (std::size_t i = 0; i < tasks.size(); ++i) {
        const std::string w = "tasks[" + std::to_string(i) + "]";
        const auto& tj = tasks[i];
        TaskSpec t;
        t.id = get_or<int>(tj, "id", static_cast<int>(i), w);
        if (t.id != static_cast<int>(i)) fail(w + ".id: task ids must equal their position");
        const auto& path = need(tj, "path", w);
        if (!path.is_array()) fail(w + ".path: expected an array");
        for (std::size_t h = 0; h < path.size(); ++h) t.path.push_back(node_named(c.network, path[h], w + ".path"));
        t.period = get<Slot>(need(tj, "period", w), w + ".period");
        t.deadline = get_or<Slot>(tj, "deadline", t.period, w);
        t.retries = get_or<std::vector<int>>(tj, "retries", {}, w);
        try {
            validate_task(t, c.network);
        } catch (const Error& e) {
            fail(e.what());
        }
        c.tasks.push_back(std::move(t));
    }

    if (j.contains("disturbance") && !j.at("disturbance").is_null()) {
        const auto& dj = j.at("disturbance");
        const std::string w = "disturbance";
        DisturbanceConfig d;
        d.task = get_or<int>(dj, "task", 0, w);
        if (d.task < 0 || d.task >= static_cast<int>(c.tasks.size())) fail(w + ".task: no such task");
        d.instance = get_or<std::int64_t>(dj, "instance", 1, w);
        d.spec.periods = get<std::vector<Slot>>(need(dj, "periods", w), w + ".periods");
        d.spec.deadlines = get_or<std::vector<Slot>>(dj, "deadlines", d.spec.periods, w);
        try {
            d.spec.validate();
        } catch (const Error& e) {
            fail(w + ": " + e.what());
        }
        c.disturbance = d;
    }

    const json mac = j.value("mac", json::object());
    c.timing.priority_tick_us = get_or<int>(mac, "priority_tick_us", c.timing.priority_tick_us, "mac");
    c.rhythmic_priority = get_or<int>(mac, "rhythmic_priority", c.rhythmic_priority, "mac");
    c.periodic_priority = get_or<int>(mac, "periodic_priority", c.periodic_priority, "mac");
    if (mac.contains("per_table")) {
        const auto& pj = mac.at("per_table");
        c.per.safe_tick_us = get_or<int>(pj, "safe_tick_us", c.per.safe_tick_us, "mac.per_table");
        if (pj.contains("below_safe")) {
            c.per.below_safe.clear();
            for (const auto& [k, v] : pj.at("below_safe").items()) {
                try {
                    c.per.below_safe[std::stoi(k)] = get<double>(v, "mac.per_table.below_safe");
                } catch (const std::logic_error&) {
                    fail("mac.per_table.below_safe: keys must be priority distances");
                }
            }
        }
    }

    const json sim = j.value("sim", json::object());
    const std::string w = "sim";
    c.mode = mode_from(get_or<std::string>(sim, "mode", "TBS", w));
    c.required = get_or<double>(sim, "required_pdr", c.required, w);
    c.horizon = get_or<Slot>(sim, "horizon", 0, w);
    c.seed = get_or<std::uint64_t>(sim, "seed", c.seed, w);
    c.alpha = get_or<int>(sim, "alpha", c.alpha, w);
    c.beta = get_or<int>(sim, "beta", c.beta, w);
    c.solver = solver_from(get_or<std::string>(sim, "solver", "greedy", w));
    try {
        c.framework = framework_from_string(get_or<std::string>(sim, "framework", "fdpas-packet", w));
    } catch (const Error& e) {
        fail(w + ".framework: " + e.what());
    }
    c.broadcast_period = get_or<Slot>(sim, "broadcast_period", c.broadcast_period, w);
    c.broadcast_depth = get_or<int>(sim, "broadcast_depth", c.broadcast_depth, w);
    c.broadcast_offset = get_or<Slot>(sim, "broadcast_offset", c.broadcast_offset, w);
    if (!(c.required > 0.0 && c.required < 1.0)) fail("sim.required_pdr: must lie in (0, 1)");
    if (c.alpha < 1) fail("sim.alpha: must be at least 1");
    if (c.beta < 1) fail("sim.beta: must be at least 1");
    if (c.horizon < 0) fail("sim.horizon: must not be negative");
    return c;
}

SimConfig load_scenario(const std::string& path) { return parse_scenario(read_file(path)); }

std::string dump_scenario(const SimConfig& c) {
    ordered_json j;
    ordered_json net;
    net["nodes"] = c.network.names();
    net["controller"] = c.network.name(c.network.controller());
    net["links"] = ordered_json::array();
    for (const auto& l : c.network.links()) {
        net["links"].push_back({{"from", c.network.name(l.from)}, {"to", c.network.name(l.to)}, {"pdr", l.pdr}});
    }
    j["network"] = net;
    j["tasks"] = ordered_json::array();
    for (const auto& t : c.tasks) {
        ordered_json tj;
        tj["id"] = t.id;
        std::vector<std::string> path;
        for (NodeId n : t.path) path.push_back(c.network.name(n));
        tj["path"] = path;
        tj["period"] = t.period;
        tj["deadline"] = t.deadline;
        if (!t.retries.empty()) tj["retries"] = t.retries;
        j["tasks"].push_back(tj);
    }
    if (c.disturbance) {
        j["disturbance"] = {{"task", c.disturbance->task},
                            {"instance", c.disturbance->instance},
                            {"periods", c.disturbance->spec.periods},
                            {"deadlines", c.disturbance->spec.deadlines}};
    }
    j["mac"] = {{"priority_tick_us", c.timing.priority_tick_us},
                {"rhythmic_priority", c.rhythmic_priority},
                {"periodic_priority", c.periodic_priority}};
    ordered_json below = ordered_json::object();
    for (const auto& [d, per] : c.per.below_safe) below[std::to_string(d)] = per;
    j["mac"]["per_table"] = {{"safe_tick_us", c.per.safe_tick_us}, {"below_safe", below}};

    ordered_json sim;
    sim["mode"] = c.mode == SlotMode::TBS ? "TBS" : "PBS";
    sim["required_pdr"] = c.required;
    if (c.horizon > 0) sim["horizon"] = c.horizon;
    sim["seed"] = c.seed;
    sim["alpha"] = c.alpha;
    sim["beta"] = c.beta;
    sim["solver"] = c.solver == Solver::Greedy ? "greedy" : "oracle";
    sim["framework"] = to_string(c.framework);
    if (c.broadcast_period > 0) sim["broadcast_period"] = c.broadcast_period;
    if (c.broadcast_depth >= 0) sim["broadcast_depth"] = c.broadcast_depth;
    if (c.broadcast_offset >= 0) sim["broadcast_offset"] = c.broadcast_offset;
    j["sim"] = sim;
    return j.dump(2) + "\n";
}

}  // namespace fdpas
