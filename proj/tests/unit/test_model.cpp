#include <random>

#include "doctest.h"
#include "fdpas/model.hpp"
#include "oracles.hpp"

using namespace fdpas;

namespace {

std::vector<double> v(std::initializer_list<double> x) { return x; }
std::vector<int> vi(std::initializer_list<int> x) { return x; }

}  // namespace

TEST_CASE("packet pdr on hand examples") {
    CHECK(packet_pdr(v({0.9, 0.9}), vi({2, 2})) == doctest::Approx(0.9801));
    CHECK(packet_pdr(v({0.9}), vi({2})) == doctest::Approx(0.99));
    CHECK(packet_pdr(v({0.9, 0.98}), vi({2, 1})) == doctest::Approx(0.9702));
    CHECK(packet_pdr(v({1.0, 1.0, 1.0}), vi({1, 1, 1})) == 1.0);
}

TEST_CASE("packet pdr is monotone in every retry component") {
    std::mt19937_64 gen(11);
    std::uniform_real_distribution<double> q(0.5, 1.0);
    std::uniform_int_distribution<int> r(1, 4);
    for (int n = 0; n < 200; ++n) {
        std::vector<double> pdrs(static_cast<std::size_t>(r(gen)));
        std::vector<int> trials(pdrs.size());
        for (std::size_t h = 0; h < pdrs.size(); ++h) {
            pdrs[h] = q(gen);
            trials[h] = r(gen);
        }
        const double base = packet_pdr(pdrs, trials);
        CHECK(base == doctest::Approx(oracle::product_pdr(pdrs, trials)));
        for (std::size_t h = 0; h < pdrs.size(); ++h) {
            auto more = trials;
            ++more[h];
            CHECK(packet_pdr(pdrs, more) >= base);
        }
    }
}

TEST_CASE("shared-slot pdr") {
    // one hop, k shared slots: same as k dedicated trials
    CHECK(shared_slot_pdr(v({0.9}), 2) == doctest::Approx(0.99));
    // two perfect hops need exactly two slots
    CHECK(shared_slot_pdr(v({1.0, 1.0}), 1) == 0.0);
    CHECK(shared_slot_pdr(v({1.0, 1.0}), 2) == 1.0);
    // two hops at 0.9 in 3 slots: fail only with 2+ losses before the second success
    CHECK(shared_slot_pdr(v({0.9, 0.9}), 3) == doctest::Approx(0.81 + 2 * 0.1 * 0.81));
    // pooling slots never does worse than any split across hops
    CHECK(shared_slot_pdr(v({0.9, 0.8}), 4) >= packet_pdr(v({0.9, 0.8}), vi({2, 2})));
}

TEST_CASE("pdr degradation") {
    CHECK(pdr_degradation(0.99, 0.995) == 0.0);
    CHECK(pdr_degradation(0.99, 0.0) == doctest::Approx(0.99));
    CHECK(pdr_degradation(0.99, 0.9) == doctest::Approx(0.09));
}

TEST_CASE("rhythmic spec generation") {
    CHECK(generate_rhythmic_spec(100, 0.2, 4).periods == std::vector<Slot>{20, 40, 60, 80});
    CHECK(generate_rhythmic_spec(100, 0.2, 1).periods == std::vector<Slot>{20});
    CHECK(generate_rhythmic_spec(15, 0.8, 5).periods == std::vector<Slot>{12, 12, 13, 13, 14});
    const auto long_ramp = generate_rhythmic_spec(100, 0.2, 16);
    CHECK(long_ramp.periods.front() == 20);
    CHECK(long_ramp.periods.back() == 95);
    CHECK(long_ramp.deadlines == long_ramp.periods);

    for (int steps = 1; steps <= 16; ++steps) {
        CHECK(generate_rhythmic_spec(100, 0.2, steps).periods == [&] {
            auto p = oracle::rhythmic_periods(100, 1, 5, steps);
            return std::vector<Slot>(p.begin(), p.end());
        }());
        CHECK(generate_rhythmic_spec(37, 0.8, steps).periods == [&] {
            auto p = oracle::rhythmic_periods(37, 4, 5, steps);
            return std::vector<Slot>(p.begin(), p.end());
        }());
    }
}

TEST_CASE("rhythmic spec rejects windows shorter than the demand") {
    CHECK_THROWS_AS(generate_rhythmic_spec(10, 0.2, 4, 3), Error);
    CHECK_NOTHROW(generate_rhythmic_spec(10, 0.2, 4, 2));
}

TEST_CASE("network model validation") {
    CHECK_THROWS_AS(NetworkModel({"a", "b"}, NodeId{0}, {Link{NodeId{0}, NodeId{2}, 0.9}}), Error);
    CHECK_THROWS_AS(NetworkModel({"a", "b"}, NodeId{5}, {}), Error);
    CHECK_THROWS_AS(NetworkModel({"a", "b"}, NodeId{0}, {Link{NodeId{0}, NodeId{1}, 0.0}}), Error);
    CHECK_THROWS_AS(NetworkModel({"a", "b"}, NodeId{0}, {Link{NodeId{0}, NodeId{1}, 1.5}}), Error);
    const NetworkModel net({"a", "b"}, NodeId{0}, {Link{NodeId{0}, NodeId{1}, 0.9}});
    CHECK(net.link_index(NodeId{0}, NodeId{1}).has_value());
    CHECK_FALSE(net.link_index(NodeId{1}, NodeId{0}).has_value());
    CHECK(net.find("b")->value == 1);
    CHECK_FALSE(net.reliable());
}

TEST_CASE("task validation rejects a path without links") {
    const NetworkModel net({"a", "b", "c"}, NodeId{1}, {Link{NodeId{0}, NodeId{1}, 1.0}});
    TaskSpec t;
    t.path = {NodeId{0}, NodeId{1}, NodeId{2}};
    t.period = t.deadline = 10;
    CHECK_THROWS_AS(validate_task(t, net), Error);
}

TEST_CASE("task set generator") {
    const auto net = grid_network(9, 0.9, 1.0, 1);
    CHECK(net.node_count() == 81);
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        const auto a = generate_taskset(seed, 0.5, net);
        const auto b = generate_taskset(seed, 0.5, net);
        REQUIRE(a.size() == b.size());
        for (std::size_t i = 0; i < a.size(); ++i) {
            CHECK(a[i].period == b[i].period);
            CHECK(a[i].path == b[i].path);
            CHECK(a[i].hops() >= 2);
            CHECK(a[i].deadline <= a[i].period);
            CHECK_NOTHROW(validate_task(a[i], net));
        }
        CHECK(utilization(a) >= 0.5);
        CHECK(utilization(a) <= 1.0);
    }
}

TEST_CASE("generated utilization overshoots the target by at most one task") {
    const auto net = grid_network(9, 0.9, 1.0, 1);
    double sum = 0.0, slack = 0.0;
    for (std::uint64_t seed = 1; seed <= 100; ++seed) {
        const auto tasks = generate_taskset(seed, 0.5, net);
        double largest = 0.0;
        for (const auto& t : tasks) largest = std::max(largest, static_cast<double>(t.budget()) / static_cast<double>(t.period));
        const double u = utilization(tasks);
        CHECK(u >= 0.5);
        CHECK(u < 0.5 + largest + 1e-12);
        sum += u;
        slack = std::max(slack, largest);
    }
    CHECK(sum / 100 >= 0.5);
    CHECK(sum / 100 <= 0.5 + slack);
}
