#include <random>
#include <set>

#include "doctest.h"
#include "fdpas/dropping.hpp"
#include "fdpas/static_scheduler.hpp"
#include "oracles.hpp"
#include "support.hpp"

using namespace fdpas;

namespace {

TransmissionVector tv(int task, std::int64_t instance, std::vector<int> eps) { return {{task, instance, false}, std::move(eps)}; }

struct Testbed {
    SimConfig config;
    StaticSchedule schedule;
    DisturbanceEvent event;
};

Testbed testbed() {
    Testbed t{support::testbed(), {}, {}};
    t.schedule = build_static_schedule(t.config.tasks, t.config.network, SlotMode::TBS).schedule;
    t.event = make_event(t.config.tasks[0], 3, t.config.disturbance->spec);
    return t;
}

PeriodicPacket single_hop(int task, double pdr, int trials, Slot first_slot) {
    PeriodicPacket p{{task, 0, false}, {pdr}, {trials}, {}};
    for (int k = 0; k < trials; ++k) p.slots.push_back({first_slot + k, 0, 0});
    return p;
}

}  // namespace

TEST_CASE("greedy packet dropping on hand examples") {
    CHECK(greedy_drop_packets({0, 0}, {tv(1, 0, {1, 1})}, 0.99).packets.empty());

    const auto a = greedy_drop_packets({1, 1}, {tv(1, 0, {1, 0}), tv(2, 0, {0, 1}), tv(3, 0, {1, 1})}, 0.99);
    REQUIRE(a.packets.size() == 1);
    CHECK(a.packets[0].task == 3);
    CHECK(a.total_degradation == doctest::Approx(0.99));

    const auto b = greedy_drop_packets({2, 0}, {tv(1, 0, {1, 0}), tv(2, 0, {1, 0})}, 0.99);
    REQUIRE(b.packets.size() == 2);
    CHECK(b.packets[0].task == 1);
    CHECK(b.packets[1].task == 2);

    CHECK_THROWS_AS(greedy_drop_packets({3, 0}, {tv(1, 0, {1, 0}), tv(2, 0, {1, 0})}, 0.99), Error);
}

TEST_CASE("greedy re-clips vectors after each drop") {
    // once window 0 is satisfied the second packet is worth one slot, not two,
    // so the third packet goes next and finishes the job
    const auto d = greedy_drop_packets({1, 2}, {tv(1, 0, {3, 0}), tv(2, 0, {1, 1}), tv(3, 0, {0, 2})}, 0.99);
    REQUIRE(d.packets.size() == 2);
    CHECK(d.packets[0].task == 1);
    CHECK(d.packets[1].task == 3);
}

TEST_CASE("exhaustive packet dropping") {
    const std::vector<TransmissionVector> vs{tv(1, 0, {1, 0}), tv(2, 0, {0, 1}), tv(3, 0, {1, 1})};
    const auto d = optimal_drop_packets({1, 1}, vs, 0.99);
    REQUIRE(d.packets.size() == 1);
    CHECK(d.packets[0].task == 3);
    CHECK(optimal_drop_packets({0, 0}, vs, 0.99).packets.empty());
    CHECK(optimal_drop_packets({0, 0}, vs, 0.99).total_degradation == 0.0);
    CHECK_THROWS_AS(optimal_drop_packets({3, 2}, vs, 0.99), Error);
}

TEST_CASE("transmission dropping takes one retry") {
    DroppingInstance inst{SlotMode::TBS, 0.99, {1}, {single_hop(1, 0.9, 2, 5)}};
    const auto d = drop_transmissions(inst);
    CHECK(d.packets.empty());
    REQUIRE(d.slots.size() == 1);
    CHECK(d.total_degradation == doctest::Approx(0.09));
    CHECK(d.degradation.at(PacketRef{1, 0, false}) == doctest::Approx(0.09));

    inst.need = {0};
    CHECK(drop_transmissions(inst).slots.empty());
}

TEST_CASE("transmission dropping picks the cheaper slot first") {
    // dropping from the 0.8 link costs 0.03; from the 0.9 link 0.09; the second 0.8 drop would cost 0.16 more
    DroppingInstance inst{SlotMode::TBS, 0.99, {1}, {single_hop(1, 0.9, 2, 5), single_hop(2, 0.8, 3, 7)}};
    const auto one = drop_transmissions(inst);
    REQUIRE(one.slots.size() == 1);
    CHECK(one.slots[0].packet.task == 2);
    CHECK(one.total_degradation == doctest::Approx(0.03));

    inst.need = {2};
    const auto two = drop_transmissions(inst);
    REQUIRE(two.slots.size() == 2);
    CHECK(two.total_degradation == doctest::Approx(0.12));
    CHECK(optimal_drop_transmissions(inst).total_degradation == doctest::Approx(0.12));
}

TEST_CASE("transmission dropping ignores slots outside needy windows") {
    auto p = single_hop(1, 0.9, 2, 5);
    p.slots[0].window = 1;
    p.slots[1].window = -1;
    DroppingInstance inst{SlotMode::TBS, 0.99, {1, 0}, {p}};
    CHECK_THROWS_AS(drop_transmissions(inst), Error);
}

TEST_CASE("set-cover reduction") {
    const auto one = from_set_cover({1, {{0}}});
    CHECK(one.need == std::vector<int>{1});
    REQUIRE(one.vectors.size() == 1);
    CHECK(optimal_drop_packets(one.need, one.vectors, 0.99).packets.size() == 1);

    const auto two = from_set_cover({2, {{0}, {1}, {0, 1}}});
    CHECK(two.vectors[2].per_window == std::vector<int>{1, 1});
    CHECK(optimal_drop_packets(two.need, two.vectors, 0.99).packets.size() == 1);
    CHECK(oracle::brute_set_cover(2, {{0}, {1}, {0, 1}}) == 1);

    CHECK_THROWS_AS(from_set_cover({3, {{0}, {1}}}), Error);
}

TEST_CASE("transmission vectors match a naive scan") {
    const auto tb = testbed();
    const auto sets = build_active_sets(120, tb.event, tb.schedule, tb.config.tasks, rhythmic_demand_labels(tb.config.tasks[0], true));
    const auto vs = build_transmission_vectors(sets, tb.schedule);
    REQUIRE(vs.size() == sets.periodic.size());
    for (std::size_t j = 0; j < vs.size(); ++j) {
        for (std::size_t i = 0; i < sets.rhythmic.size(); ++i) {
            int n = 0;
            for (Slot t = sets.rhythmic[i].release; t < sets.rhythmic[i].deadline; ++t) n += tb.schedule.at(t).packet == sets.periodic[j] ? 1 : 0;
            CHECK(vs[j].per_window[i] == n);
        }
    }
    // packet 1/2 holds 72-74 and 83 in window 1 (72-83), 84-85 in window 2
    CHECK(vs[0].packet == PacketRef{1, 2, false});
    CHECK(vs[0].per_window == std::vector<int>{0, 4, 2, 0, 0});
}

TEST_CASE("demand vector on the testbed") {
    const auto tb = testbed();
    const auto sets = build_active_sets(120, tb.event, tb.schedule, tb.config.tasks, rhythmic_demand_labels(tb.config.tasks[0], true));
    const auto dv = build_demand_vector(sets, tb.schedule, 0);
    CHECK(dv.demand == std::vector<int>{8, 8, 8, 8, 8});
    CHECK(dv.need == std::vector<int>{0, 0, 2, 3, 0});
    for (std::size_t i = 0; i < dv.need.size(); ++i) CHECK(dv.need[i] == std::max(0, dv.demand[i] - dv.available[i]));
}

TEST_CASE("lossy single-hop rhythmic packet needs two slots") {
    const auto L = [](int a, int b, double p) { return Link{NodeId{a}, NodeId{b}, p}; };
    const NetworkModel net({"A", "C", "B"}, NodeId{1}, {L(0, 1, 0.9), L(1, 2, 1.0)});
    auto tasks = resolve_retries({TaskSpec{0, {NodeId{0}, NodeId{1}, NodeId{2}}, 10, 10, {}}}, net, 0.99);
    CHECK(tasks[0].retries == std::vector<int>{2, 1});
    const auto labels = rhythmic_demand_labels(tasks[0], true);
    CHECK(std::count(labels.begin(), labels.end(), 0) == 2);
}

TEST_CASE("testbed dynamic schedules at both levels") {
    const auto tb = testbed();
    const auto& tasks = tb.config.tasks;
    DynamicOptions po;
    po.lossy = true;
    const auto pk = generate_dynamic_schedule(tb.event, tb.schedule, tasks, tb.config.network, po);
    auto to = po;
    to.level = DropLevel::Transmission;
    const auto tx = generate_dynamic_schedule(tb.event, tb.schedule, tasks, tb.config.network, to);

    CHECK(pk.end_point == 120);
    CHECK(pk.upper_bound == 165);
    CHECK(pk.candidates.size() == 4);
    CHECK(pk.decision.packets == std::vector<PacketRef>{{1, 2, false}, {1, 3, false}});
    CHECK(pk.decision.total_degradation == doctest::Approx(1.98));

    CHECK(tx.end_point == 120);
    CHECK(tx.decision.packets.empty());
    std::vector<Slot> dropped;
    for (const auto& s : tx.decision.slots) dropped.push_back(s.slot);
    CHECK(dropped == std::vector<Slot>{84, 85, 101, 102, 104});
    CHECK(tx.decision.total_degradation == doctest::Approx(0.0031668).epsilon(1e-4));
    CHECK(tx.decision.total_degradation <= pk.decision.total_degradation);

    // both task-1 packets keep four of their six slots
    for (std::int64_t k : {2, 3}) {
        int kept = 0;
        for (Slot t : tb.schedule.slots_of(tasks[1], k)) kept += tx.schedule.at(tb.schedule, t).packet == PacketRef{1, k, false} ? 1 : 0;
        CHECK(kept == 4);
    }
}

TEST_CASE("dynamic schedule invariants on the testbed") {
    const auto tb = testbed();
    const auto& tasks = tb.config.tasks;
    for (auto level : {DropLevel::Packet, DropLevel::Transmission}) {
        DynamicOptions o;
        o.lossy = true;
        o.level = level;
        const auto d = generate_dynamic_schedule(tb.event, tb.schedule, tasks, tb.config.network, o);
        for (Slot t = d.schedule.start; t < d.schedule.end; ++t) {
            const auto e = d.schedule.at(tb.schedule, t);
            CHECK((e == tb.schedule.at(t) || (e.packet.task == 0 && e.packet.dynamic)));
        }
        for (std::size_t i = 0; i < d.sets.rhythmic.size(); ++i) {
            const auto& rp = d.sets.rhythmic[i];
            std::vector<int> got;
            for (Slot t = rp.release; t < rp.deadline; ++t) {
                const auto e = d.schedule.at(tb.schedule, t);
                if (e.packet == PacketRef{0, rp.index, true}) got.push_back(e.hop);
            }
            CHECK(got == rp.hops);
        }
        CHECK(d.last_rhythmic_finish <= d.end_point);
    }
}

TEST_CASE("idle capacity alone absorbs a light rhythmic load") {
    const auto tb = testbed();
    DynamicOptions o;  // perfect-link demand: one slot per hop
    const auto d = generate_dynamic_schedule(tb.event, tb.schedule, tb.config.tasks, tb.config.network, o);
    CHECK(d.decision.packets.empty());
    CHECK(d.decision.total_degradation == 0.0);
    for (Slot t = d.schedule.start; t < d.schedule.end; ++t) {
        const auto s = tb.schedule.at(t);
        if (!s.idle() && s.packet.task != 0) CHECK(d.schedule.at(tb.schedule, t) == s);
    }
}

TEST_CASE("greedy against exhaustive on random vectors") {
    std::mt19937_64 gen(3);
    for (int n = 0; n < 200; ++n) {
        std::uniform_int_distribution<int> rows(1, 5), cols(1, 10), val(0, 3), need(0, 4);
        std::vector<int> v(static_cast<std::size_t>(rows(gen)));
        for (auto& x : v) x = need(gen);
        std::vector<TransmissionVector> vs;
        std::vector<std::vector<int>> raw;
        const int m = cols(gen);
        for (int j = 0; j < m; ++j) {
            std::vector<int> e(v.size());
            for (auto& x : e) x = val(gen);
            raw.push_back(e);
            vs.push_back(tv(1 + j % 4, j / 4, e));
        }
        const int brute = oracle::brute_packet_drop(v, raw);
        if (brute < 0) {
            CHECK_THROWS_AS(greedy_drop_packets(v, vs, 0.99), Error);
            CHECK_THROWS_AS(optimal_drop_packets(v, vs, 0.99), Error);
            continue;
        }
        const auto g = greedy_drop_packets(v, vs, 0.99);
        const auto o = optimal_drop_packets(v, vs, 0.99);
        CHECK(static_cast<int>(o.packets.size()) == brute);
        CHECK(g.packets.size() >= o.packets.size());
    }
}
