#pragma once

#include <string>

#include "fdpas/config.hpp"

#ifndef FDPAS_FIXTURE_DIR
#define FDPAS_FIXTURE_DIR "tests/fixtures"
#endif

namespace support {

inline std::string fixture(const std::string& name) { return std::string(FDPAS_FIXTURE_DIR) + "/" + name; }

inline fdpas::SimConfig testbed() { return fdpas::load_scenario(fixture("testbed.json")); }

inline fdpas::NetworkModel line_network(int nodes, double pdr = 1.0) {
    std::vector<std::string> names;
    std::vector<fdpas::Link> links;
    for (int i = 0; i < nodes; ++i) names.push_back("N" + std::to_string(i));
    for (int i = 0; i + 1 < nodes; ++i) links.push_back({fdpas::NodeId{i}, fdpas::NodeId{i + 1}, pdr});
    return fdpas::NetworkModel(names, fdpas::NodeId{nodes / 2}, links);
}

}  // namespace support
