#pragma once

#include <string>

#include "fdpas/sim.hpp"

namespace fdpas {

// Scenario files are JSON with sections network, tasks, disturbance, mac and sim.
SimConfig parse_scenario(const std::string& text);
SimConfig load_scenario(const std::string& path);

// Accepts either a whole scenario or a bare network object.
NetworkModel parse_network(const std::string& text);
NetworkModel load_network(const std::string& path);

std::string dump_scenario(const SimConfig& config);
std::string read_file(const std::string& path);

}  // namespace fdpas
