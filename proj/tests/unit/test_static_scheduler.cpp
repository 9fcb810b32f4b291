#include <random>

#include "doctest.h"
#include "fdpas/static_scheduler.hpp"
#include "fdpas/sweep.hpp"
#include "oracles.hpp"
#include "support.hpp"

using namespace fdpas;

namespace {

std::vector<int> alloc(std::vector<double> p, double req) { return allocate_retry_vector(p, req); }

std::string layout(const StaticSchedule& s, Slot from, Slot to) {
    std::string out;
    for (Slot t = from; t < to; ++t) {
        const auto e = s.at(t);
        if (!out.empty()) out += ' ';
        out += e.idle() ? std::string("-") : std::to_string(e.packet.task) + "/" + std::to_string(e.packet.instance) + "h" + std::to_string(e.hop);
    }
    return out;
}

}  // namespace

TEST_CASE("retry allocation on hand examples") {
    CHECK(alloc({1.0, 1.0}, 0.99) == std::vector<int>{1, 1});
    CHECK(alloc({0.9}, 0.99) == std::vector<int>{2});
    CHECK(alloc({0.9, 0.9}, 0.95) == std::vector<int>{2, 2});
    CHECK_THROWS_AS(alloc({0.9}, 1.0), Error);
}

TEST_CASE("retry allocation matches exhaustive search") {
    std::mt19937_64 gen(5);
    std::uniform_real_distribution<double> q(0.6, 1.0);
    std::uniform_int_distribution<int> hops(1, 4);
    for (int n = 0; n < 150; ++n) {
        std::vector<double> pdrs(static_cast<std::size_t>(hops(gen)));
        for (auto& p : pdrs) p = q(gen);
        const double req = n % 2 ? 0.99 : 0.95;
        const auto got = allocate_retry_vector(pdrs, req);
        const auto want = oracle::exhaustive_retry(pdrs, req, 7 * static_cast<int>(pdrs.size()));
        CHECK(got == want);
    }
}

TEST_CASE("single two-hop task fills the first slots") {
    const auto net = support::line_network(3);
    TaskSpec t{0, {NodeId{0}, NodeId{1}, NodeId{2}}, 4, 4, {}};
    const auto tasks = resolve_retries({t}, net, 0.99);
    const auto r = build_static_schedule(tasks, net, SlotMode::TBS);
    REQUIRE(r.feasible);
    CHECK(r.hyperperiod == 4);
    CHECK(layout(r.schedule, 0, 4) == "0/0h0 0/0h1 - -");
    CHECK(layout(r.schedule, 4, 8) == "0/1h0 0/1h1 - -");
    CHECK(verify_schedulable(r, tasks, net, 0.99).ok);
}

TEST_CASE("overloaded task set is reported with its failing packet") {
    const auto net = support::line_network(3);
    std::vector<TaskSpec> tasks{{0, {NodeId{0}, NodeId{1}, NodeId{2}}, 3, 3, {}}, {1, {NodeId{0}, NodeId{1}, NodeId{2}}, 3, 3, {}}};
    tasks = resolve_retries(tasks, net, 0.99);
    const auto r = build_static_schedule(tasks, net, SlotMode::TBS);
    CHECK_FALSE(r.feasible);
    REQUIRE(r.first_failure.has_value());
    CHECK(r.first_failure->task == 1);
    CHECK(r.first_failure->instance == 0);
}

TEST_CASE("testbed static schedule") {
    const auto c = support::testbed();
    const auto r = build_static_schedule(c.tasks, c.network, SlotMode::TBS);
    REQUIRE(r.feasible);
    CHECK(r.hyperperiod == 60);
    CHECK(verify_schedulable(r, c.tasks, c.network, 0.99).ok);
    CHECK(layout(r.schedule, 60, 90) ==
          "0/4h0 0/4h0 0/4h1 0/4h1 0/4h2 0/4h2 0/4h3 0/4h3 2/3h0 2/3h0 2/3h1 2/3h1 1/2h0 1/2h0 1/2h0 "
          "0/5h0 0/5h0 0/5h1 0/5h1 0/5h2 0/5h2 0/5h3 0/5h3 1/2h1 1/2h1 1/2h1 2/4h0 2/4h0 2/4h1 2/4h1");
    CHECK(layout(r.schedule, 90, 120) ==
          "0/6h0 0/6h0 0/6h1 0/6h1 0/6h2 0/6h2 0/6h3 0/6h3 1/3h0 1/3h0 1/3h0 1/3h1 1/3h1 1/3h1 2/5h0 "
          "0/7h0 0/7h0 0/7h1 0/7h1 0/7h2 0/7h2 0/7h3 0/7h3 2/5h0 2/5h1 2/5h1 - - - -");
    CHECK(r.schedule.slots_of(c.tasks[1], 2) == std::vector<Slot>{72, 73, 74, 83, 84, 85});
}

TEST_CASE("verifier catches constructed defects") {
    const auto c = support::testbed();
    auto r = build_static_schedule(c.tasks, c.network, SlotMode::TBS);
    SUBCASE("missing slot") {
        // the table repeats every 60 slots; slot 13 holds the second trial of 1/0 hop 0
        r.schedule.set(13, SlotEntry{});
        const auto v = verify_schedulable(r, c.tasks, c.network, 0.99);
        CHECK_FALSE(v.ok);
        REQUIRE(v.packet.has_value());
        CHECK(*v.packet == PacketRef{1, 0, false});
        CHECK(v.message.find("short") != std::string::npos);
    }
    SUBCASE("hop order") {
        auto e = r.schedule.at(12);
        e.hop = 1;
        r.schedule.set(12, e);
        const auto v = verify_schedulable(r, c.tasks, c.network, 0.99);
        CHECK_FALSE(v.ok);
        CHECK(v.message.find("order") != std::string::npos);
    }
}

TEST_CASE("static schedule is deterministic and respects retry vectors") {
    const auto net = grid_network(9, 0.9, 1.0, 1);
    int feasible = 0;
    for (std::uint64_t seed = 1; seed <= 30; ++seed) {
        const auto tasks = generate_taskset(seed, 0.5, net);
        const auto a = build_static_schedule(tasks, net, SlotMode::TBS, 4000);
        const auto b = build_static_schedule(tasks, net, SlotMode::TBS, 4000);
        REQUIRE(a.schedule.length() == b.schedule.length());
        for (Slot t = 0; t < a.schedule.length(); ++t) REQUIRE(a.schedule.at(t) == b.schedule.at(t));
        if (!a.feasible) continue;
        ++feasible;
        CHECK(verify_schedulable(a, tasks, net, 0.99).ok);
    }
    CHECK(feasible >= 25);
}

TEST_CASE("PBS tables carry packets without fixed trials") {
    const auto c = support::testbed();
    const auto r = build_static_schedule(c.tasks, c.network, SlotMode::PBS);
    REQUIRE(r.feasible);
    CHECK(r.schedule.mode() == SlotMode::PBS);
    CHECK(verify_schedulable(r, c.tasks, c.network, 0.99).ok);
}

// Among any three consecutive transmissions of one task at a relay, the relay has an idle slot.
// All retry slots of one hop count as one transmission.
TEST_CASE("relay idle-slot property on random schedules") {
    const auto net = grid_network(9, 0.9, 1.0, 1);
    int checked = 0;
    std::size_t windows = 0, violations = 0;
    for (std::uint64_t seed = 1; checked < 500 && seed < 2000; ++seed) {
        const auto tasks = generate_taskset(seed, 0.5, net);
        const auto r = build_static_schedule(tasks, net, SlotMode::TBS, 3000);
        if (!r.feasible) continue;
        ++checked;
        const Slot len = std::min<Slot>(r.schedule.length(), 3000);
        for (const auto& task : tasks) {
            for (std::size_t i = 1; i + 1 < task.path.size(); ++i) {
                const NodeId node = task.path[i];
                if (node == net.controller()) continue;
                struct Tx {
                    PacketRef packet;
                    int hop;
                    Slot first, last;
                };
                std::vector<Tx> own;
                for (Slot t = 0; t < len; ++t) {
                    const auto e = r.schedule.at(t);
                    if (e.idle() || e.packet.task != task.id || !involves(tasks, e, node)) continue;
                    if (!own.empty() && own.back().packet == e.packet && own.back().hop == e.hop) own.back().last = t;
                    else own.push_back({e.packet, e.hop, t, t});
                }
                for (std::size_t k = 0; k + 2 < own.size(); ++k) {
                    ++windows;
                    bool idle = false;
                    for (Slot t = own[k].first; t <= own[k + 2].last && !idle; ++t) idle = !involves(tasks, r.schedule.at(t), node);
                    if (!idle) ++violations;
                }
            }
        }
    }
    CHECK(checked == 500);
    CHECK(windows > 10000);
    CHECK(violations == 0);
}
